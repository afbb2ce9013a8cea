"""Command-line front end: ``nonlocal-eraser {parity,erasure,bell,tomo,run}``.

Settings come from built-in defaults, then an optional flat JSON ``--config``
file (keys ``seed``, ``shots``, ``noise``, ``output_dir``, ``format``), then
command-line flags. Exit status is 0 on success, 1 on errors raised while
running, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import circuit
from .core import DensityMatrix, SystemAmplitudes
from .errors import EraserError
from .noise import (
    BASIS_INPUTS,
    SUPERPOSITION_STATE,
    CountsTable,
    NoiseModel,
    apply_noise,
    error_rate,
    expected_cells,
    ideal_cells,
    perturb,
    sample_table,
    snapshot_cells,
)
from .protocol import BellLabel, run_protocol
from .tomography import (
    TomographyRecord,
    bootstrap_fidelity,
    fidelity,
    mle_reconstruct,
    simulate_tomography,
)


@dataclass
class RunConfig:
    seed: int = 0
    shots: int = 10_000
    noise: NoiseModel = field(default_factory=NoiseModel.default)
    output_dir: Path = Path(".")
    format: str = "csv"

    def validate(self):
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if not isinstance(self.shots, int) or self.shots < 0:
            raise ValueError(f"shots must be a non-negative integer, got {self.shots!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if not isinstance(self.noise, NoiseModel):
            raise ValueError("noise must be a NoiseModel")


def _noise_from(value) -> NoiseModel:
    if isinstance(value, dict):
        return NoiseModel.from_json(value)
    return NoiseModel.load(value)


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        doc = json.loads(Path(args.config).read_text())
        unknown = set(doc) - {"seed", "shots", "noise", "output_dir", "format"}
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        if "seed" in doc:
            cfg.seed = doc["seed"]
        if "shots" in doc:
            cfg.shots = doc["shots"]
        if "noise" in doc:
            cfg.noise = _noise_from(doc["noise"])
        if "output_dir" in doc:
            cfg.output_dir = Path(doc["output_dir"])
        if "format" in doc:
            cfg.format = doc["format"]
    if args.seed is not None:
        cfg.seed = args.seed
    if args.shots is not None:
        cfg.shots = args.shots
    if args.noise is not None:
        cfg.noise = _noise_from(args.noise)
    if args.ideal:
        cfg.noise = NoiseModel.ideal()
    if args.out is not None:
        cfg.output_dir = Path(args.out)
    if args.format is not None:
        cfg.format = args.format
    cfg.validate()
    return cfg


# --------------------------------------------------------------------------
# named states

NAMED_STATES = {
    **BASIS_INPUTS,
    "psi_plus": BellLabel.PsiPlus.amplitudes,
    "psi_minus": BellLabel.PsiMinus.amplitudes,
    "phi_plus": BellLabel.PhiPlus.amplitudes,
    "phi_minus": BellLabel.PhiMinus.amplitudes,
    "superposition": SUPERPOSITION_STATE,
}


def parse_state(text: str) -> SystemAmplitudes:
    """A named state or four whitespace-separated complex amplitudes."""
    if text in NAMED_STATES:
        return NAMED_STATES[text]
    parts = text.split()
    if len(parts) != 4:
        raise ValueError(f"unknown state {text!r}; give a name or four amplitudes")
    amps = [circuit.parse_complex(p) for p in parts]
    return SystemAmplitudes.from_array(amps, normalize=True)


def named_target(text: str) -> DensityMatrix:
    """Tomography target: a named state, a branch of the superposition state, or a JSON file."""
    if text in ("even_branch", "odd_branch"):
        outcome = run_protocol(SUPERPOSITION_STATE)
        return (outcome.branch_even if text == "even_branch" else outcome.branch_odd).rho
    if text in NAMED_STATES:
        return NAMED_STATES[text].density()
    path = Path(text)
    if path.exists():
        return DensityMatrix.from_json(json.loads(path.read_text()))
    raise ValueError(f"unknown tomography target {text!r}")


# --------------------------------------------------------------------------
# output helpers

def _write(cfg: RunConfig, stem: str, payload) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, CountsTable):
        if cfg.format == "csv":
            path = cfg.output_dir / f"{stem}.csv"
            path.write_text(payload.to_csv())
            return path
        payload = payload.to_json()
    path = cfg.output_dir / f"{stem}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _safe_error_rate(table, expected):
    return None if table.counts.sum() == 0 else error_rate(table, expected)


def _report(paths, summary):
    for p in paths:
        print(p)
    print(json.dumps(summary, sort_keys=True))


# --------------------------------------------------------------------------
# subcommands

def cmd_parity(cfg: RunConfig, states: list[str] | None = None) -> dict:
    inputs = ({s: parse_state(s) for s in states} if states else dict(BASIS_INPUTS))
    outcomes = {k: run_protocol(s) for k, s in inputs.items()}
    ideal = {k: ideal_cells(o) for k, o in outcomes.items()}
    table = sample_table({k: apply_noise(o, cfg.noise) for k, o in outcomes.items()},
                         cfg.shots, cfg.seed)
    summary = {
        "seed": cfg.seed,
        "shots": cfg.shots,
        "noise": cfg.noise.to_json(),
        "parity_error_rate": _safe_error_rate(
            table, {k: expected_cells(c, "channel") for k, c in ideal.items()}),
        "cell_error_rate": _safe_error_rate(
            table, {k: expected_cells(c, "cell") for k, c in ideal.items()}),
    }
    paths = [_write(cfg, "parity_counts", table), _write(cfg, "parity_summary", summary)]
    _report(paths, summary)
    return summary


def cmd_erasure(cfg: RunConfig, state: str = "superposition") -> dict:
    sys_amp = parse_state(state)
    outcome = run_protocol(sys_amp)
    pre_ideal = snapshot_cells(sys_amp)
    post_ideal = ideal_cells(outcome)
    pre = sample_table({state: perturb(pre_ideal, cfg.noise, interference=False)},
                       cfg.shots, cfg.seed)
    post = sample_table({state: apply_noise(outcome, cfg.noise)}, cfg.shots, cfg.seed ^ 0x5A5A)
    summary = {
        "seed": cfg.seed,
        "shots": cfg.shots,
        "noise": cfg.noise.to_json(),
        "pre_erasure_error_rate": _safe_error_rate(pre, {state: expected_cells(pre_ideal)}),
        "post_erasure_error_rate": _safe_error_rate(post, {state: expected_cells(post_ideal)}),
    }
    paths = [
        _write(cfg, "erasure_pre", pre),
        _write(cfg, "erasure_post", post),
        _write(cfg, "erasure_branches", outcome.to_json()),
        _write(cfg, "erasure_summary", summary),
    ]
    _report(paths, summary)
    return summary


def _bell_label(cell) -> BellLabel:
    channel, basis = cell
    sign = +1 if basis.count("-") % 2 == 0 else -1
    return BellLabel.from_outcomes("even" if channel == "l" else "odd", sign)


def cmd_bell(cfg: RunConfig) -> dict:
    inputs = {lab.name: lab.amplitudes for lab in BellLabel}
    noisy = {k: apply_noise(run_protocol(s), cfg.noise, basis="x") for k, s in inputs.items()}
    table = sample_table(noisy, cfg.shots, cfg.seed)
    matrix = {}
    for k, cells in noisy.items():
        row = dict.fromkeys((lab.name for lab in BellLabel), 0.0)
        for cell, p in cells.items():
            row[_bell_label(cell).name] += p
        matrix[k] = row
    correct = {k: {c for c in noisy[k] if _bell_label(c).name == k} for k in inputs}
    summary = {
        "seed": cfg.seed,
        "shots": cfg.shots,
        "noise": cfg.noise.to_json(),
        "label_matrix": matrix,
        "error_rate": _safe_error_rate(table, correct),
    }
    paths = [_write(cfg, "bell_counts", table), _write(cfg, "bell_summary", summary)]
    _report(paths, summary)
    return summary


def cmd_tomo(cfg: RunConfig, target: str, record: str | None = None,
             bootstrap: int = 0) -> dict:
    truth = named_target(target)
    paths = []
    if record is not None:
        rec = TomographyRecord.from_csv(Path(record).read_text())
    else:
        if cfg.shots < 1:
            raise ValueError("tomography simulation needs --shots >= 1")
        rec = simulate_tomography(truth, cfg.shots, cfg.seed)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        path = cfg.output_dir / "tomo_record.csv"
        path.write_text(rec.to_csv())
        paths.append(path)
    result = mle_reconstruct(rec)
    summary = {
        "target": target,
        "seed": cfg.seed,
        "shots": rec.shots,
        "fidelity": fidelity(result.rho, truth),
        "iterations": result.iterations,
        "converged": result.converged,
        "rho": result.rho.to_json(),
    }
    if bootstrap:
        _, std = bootstrap_fidelity(rec, truth, resamples=bootstrap, seed=cfg.seed)
        summary["fidelity_std"] = std
    paths.append(_write(cfg, "tomo_result", summary))
    _report(paths, {k: v for k, v in summary.items() if k != "rho"})
    return summary


def cmd_run(cfg: RunConfig, circuit_file: str, prepare: str | None = None) -> dict:
    path = Path(circuit_file)
    if path.exists():
        program = circuit.load(path)
    elif path.name in circuit.shipped_circuits():
        program = circuit.parse(circuit.shipped_source(path.name))
    else:
        raise FileNotFoundError(f"no such circuit file: {circuit_file}")
    if prepare is not None:
        program = program.with_prepare(parse_state(prepare).as_array())
    trace = circuit.execute(program).to_json()
    out = _write(cfg, "run_trace", trace)
    _report([out], {"cumulative_probability": trace["cumulative_probability"],
                    "readout": trace["readout"] if not isinstance(trace["readout"], dict)
                    or "amplitudes" not in trace["readout"] else "state"})
    return trace


# --------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat JSON file with RunConfig fields")
    p.add_argument("--seed", type=int, help="64-bit generator seed")
    p.add_argument("--shots", type=int, help="post-selected events per row")
    p.add_argument("--ideal", action="store_true", help="noise-free model")
    p.add_argument("--noise", help="'default', 'ideal' or a JSON noise file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), help="table format")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocal-eraser", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parity", help="parity-check count table")
    _common(p)
    p.add_argument("--states", nargs="+", help="state names or quoted amplitude quadruples")

    p = sub.add_parser("erasure", help="counts before and after the eraser, branch states")
    _common(p)
    p.add_argument("--state", default="superposition")

    p = sub.add_parser("bell", help="Bell-state discrimination table")
    _common(p)

    p = sub.add_parser("tomo", help="MLE tomography and fidelity")
    _common(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--simulate", action="store_true", help="simulate a record (default)")
    src.add_argument("--record", help="CSV record setting_a,setting_b,count,shots")
    p.add_argument("--target", default="psi_plus")
    p.add_argument("--bootstrap", type=int, default=0, help="bootstrap resamples for an error bar")

    p = sub.add_parser("run", help="execute a .qec circuit file")
    _common(p)
    p.add_argument("circuit")
    p.add_argument("--prepare", help="override the prepared amplitudes")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "parity":
            cmd_parity(cfg, args.states)
        elif args.command == "erasure":
            cmd_erasure(cfg, args.state)
        elif args.command == "bell":
            cmd_bell(cfg)
        elif args.command == "tomo":
            cmd_tomo(cfg, args.target, args.record, args.bootstrap)
        elif args.command == "run":
            cmd_run(cfg, args.circuit, args.prepare)
    except (EraserError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
