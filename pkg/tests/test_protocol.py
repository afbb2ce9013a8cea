import json

import numpy as np
import pytest

from nonlocal_eraser.core import (
    DIM,
    StateVector,
    SystemAmplitudes,
    basis_index,
    build_initial_state,
)
from nonlocal_eraser.protocol import (
    BellLabel,
    alice_stage,
    bell_measure,
    bob_coupling,
    erase,
    parity_readout,
    pre_erasure_snapshot,
    run_protocol,
)

S2 = 1 / np.sqrt(2)
SUPERPOSITION = SystemAmplitudes(0.5, -0.5j, 0.5, -0.5j)
POL = [("H", "H"), ("H", "V"), ("V", "H"), ("V", "V")]


def closed_form_final(sys):
    """Ancilla 1 on HH/VV, 0 on HV/VH; both paths d."""
    v = np.zeros(DIM, dtype=complex)
    for (a, b), c, aux in zip(POL, sys.as_array(), (1, 0, 0, 1)):
        v[basis_index(a, "d", b, "d", aux)] = c
    return v


def pure(vec):
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


class TestAliceStage:
    def test_hh(self):
        out, p = alice_stage(build_initial_state(SystemAmplitudes(1, 0, 0, 0)))
        assert p == pytest.approx(0.5, abs=1e-12)
        assert out.nonzero() == pytest.approx({("H", "d", "H", "u", "0"): 1})

    def test_vv(self):
        out, p = alice_stage(build_initial_state(SystemAmplitudes(0, 0, 0, 1)))
        assert p == pytest.approx(0.5, abs=1e-12)
        assert out.nonzero() == pytest.approx({("V", "d", "V", "d", "0"): 1})

    def test_half_for_random_inputs(self, rng):
        for _ in range(200):
            _, p = alice_stage(build_initial_state(SystemAmplitudes.random(rng)))
            assert abs(p - 0.5) < 1e-12


class TestBobCoupling:
    def test_hh_term(self):
        out = bob_coupling(StateVector.basis("H", "d", "H", "u", 0))
        assert out.nonzero() == {("H", "d", "H", "u", "1"): 1}

    def test_hv_term(self):
        out = bob_coupling(StateVector.basis("H", "d", "V", "u", 0))
        assert out.nonzero() == {("H", "d", "V", "u", "0"): 1}

    def test_vv_term(self):
        out = bob_coupling(StateVector.basis("V", "d", "V", "d", 0))
        assert out.nonzero() == {("V", "d", "V", "d", "1"): 1}

    def test_routing_of_all_four_terms(self, rng):
        sys = SystemAmplitudes.random(rng)
        state, _ = alice_stage(build_initial_state(sys))
        out = bob_coupling(state)
        v = np.zeros(DIM, dtype=complex)
        for (a, b), c, (path, aux) in zip(POL, sys.as_array(),
                                          [("u", 1), ("u", 0), ("d", 0), ("d", 1)]):
            v[basis_index(a, "d", b, path, aux)] = c
        np.testing.assert_allclose(out.amplitudes, v, atol=1e-12)


class TestErase:
    def test_hadamard_signs_before_postselection(self, rng):
        from nonlocal_eraser.core import apply
        from nonlocal_eraser.gates import hadamard

        sys = SystemAmplitudes.random(rng)
        state, _ = alice_stage(build_initial_state(sys))
        out = apply(bob_coupling(state), hadamard("BPath"))
        # u-terms become (d - u)/sqrt2, d-terms (d + u)/sqrt2
        v = np.zeros(DIM, dtype=complex)
        for (a, b), c, (path, aux) in zip(POL, sys.as_array(),
                                          [("u", 1), ("u", 0), ("d", 0), ("d", 1)]):
            sign = -1 if path == "u" else 1
            v[basis_index(a, "d", b, "d", aux)] += c * S2
            v[basis_index(a, "d", b, "u", aux)] += sign * c * S2
        np.testing.assert_allclose(out.amplitudes, v, atol=1e-12)

    @pytest.mark.parametrize("sys, pol, aux", [
        (SystemAmplitudes(1, 0, 0, 0), ("H", "H"), "1"),
        (SystemAmplitudes(0, 1, 0, 0), ("H", "V"), "0"),
    ])
    def test_basis_inputs(self, sys, pol, aux):
        state, _ = alice_stage(build_initial_state(sys))
        out, p = erase(bob_coupling(state))
        assert p == pytest.approx(0.5, abs=1e-12)
        assert list(out.nonzero()) == [(pol[0], "d", pol[1], "d", aux)]

    def test_bell_even_coherent(self):
        out = run_protocol(SystemAmplitudes(S2, 0, 0, S2))
        assert out.branch_even.probability == pytest.approx(1.0, abs=1e-12)
        assert out.branch_odd.probability == 0.0 and out.branch_odd.rho is None
        np.testing.assert_allclose(out.branch_even.rho.entries, pure([S2, 0, 0, S2]), atol=1e-12)


class TestRunProtocol:
    def test_superposition_branches(self):
        out = run_protocol(SUPERPOSITION)
        assert out.success_probability == pytest.approx(0.25, abs=1e-12)
        assert out.branch_even.probability == pytest.approx(0.5, abs=1e-12)
        assert out.branch_odd.probability == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(out.branch_even.rho.entries, pure([S2, 0, 0, -1j * S2]), atol=1e-12)
        np.testing.assert_allclose(out.branch_odd.rho.entries, pure([0, -1j * S2, S2, 0]), atol=1e-12)

    def test_odd_only(self):
        out = run_protocol(SystemAmplitudes(0, 1, 0, 0))
        assert parity_readout(out) == {"even": 0.0, "odd": pytest.approx(1.0)}

    def test_random_inputs_closed_form(self, rng):
        for _ in range(300):
            sys = SystemAmplitudes.random(rng)
            out = run_protocol(sys)
            assert abs(out.success_probability - 0.25) < 1e-12
            ov = abs(np.vdot(closed_form_final(sys), out.final_state.amplitudes))
            assert abs(ov - 1) < 1e-10

    def test_branches_are_subspace_projections(self, rng):
        even_p = np.diag([1, 0, 0, 1])
        odd_p = np.diag([0, 1, 1, 0])
        for _ in range(200):
            sys = SystemAmplitudes.random(rng)
            out = run_protocol(sys)
            psi = sys.as_array()
            for proj, br in ((even_p, out.branch_even), (odd_p, out.branch_odd)):
                v = proj @ psi
                assert br.probability == pytest.approx(np.vdot(v, v).real, abs=1e-12)
                np.testing.assert_allclose(br.rho.entries, pure(v / np.linalg.norm(v)), atol=1e-10)
                support = np.diag(1 - np.diag(proj))
                assert np.abs(support @ br.rho.entries).max() < 1e-10
            assert out.branch_even.probability + out.branch_odd.probability == pytest.approx(1, abs=1e-12)

    def test_json_schema(self):
        doc = json.loads(json.dumps(run_protocol(SUPERPOSITION).to_json()))
        assert set(doc) == {"p_success", "even", "odd"}
        assert len(doc["even"]["rho"]) == 4 and len(doc["even"]["rho"][0]) == 4
        assert doc["even"]["rho"][0][3] == pytest.approx([0.0, 0.5])


class TestParity:
    def test_even(self):
        assert parity_readout(run_protocol(SystemAmplitudes(1, 0, 0, 0)))["even"] == pytest.approx(1)

    def test_odd(self):
        assert parity_readout(run_protocol(SystemAmplitudes(0, 1, 0, 0)))["odd"] == pytest.approx(1)

    def test_equal_split(self):
        r = parity_readout(run_protocol(SystemAmplitudes(S2, S2, 0, 0)))
        assert r["even"] == pytest.approx(0.5) and r["odd"] == pytest.approx(0.5)

    def test_linear_in_weights(self, rng):
        for _ in range(200):
            sys = SystemAmplitudes.random(rng)
            a, b, g, e = np.abs(sys.as_array()) ** 2
            assert abs(parity_readout(run_protocol(sys))["even"] - (a + e)) < 1e-12


class TestBell:
    def test_labels_biject(self):
        assert {(l.parity, l.x_product) for l in BellLabel} == {
            ("even", 1), ("even", -1), ("odd", 1), ("odd", -1)}

    def test_psi_plus(self):
        d = bell_measure(SystemAmplitudes(S2, 0, 0, S2))
        assert d[BellLabel.PsiPlus] == pytest.approx(1, abs=1e-12)

    def test_phi_minus(self):
        d = bell_measure(SystemAmplitudes(0, S2, -S2, 0))
        assert d[BellLabel.PhiMinus] == pytest.approx(1, abs=1e-12)

    def test_hh_splits(self):
        d = bell_measure(SystemAmplitudes(1, 0, 0, 0))
        assert d[BellLabel.PsiPlus] == pytest.approx(0.5)
        assert d[BellLabel.PsiMinus] == pytest.approx(0.5)

    def test_completeness(self):
        for label in BellLabel:
            d = bell_measure(label.amplitudes)
            for other, p in d.items():
                assert abs(p - (1.0 if other is label else 0.0)) < 1e-12

    def test_matches_sampling_free_expansion(self, rng):
        # P(label) = |<Bell_label|psi>|^2 for any input
        bells = {
            BellLabel.PsiPlus: [S2, 0, 0, S2], BellLabel.PsiMinus: [S2, 0, 0, -S2],
            BellLabel.PhiPlus: [0, S2, S2, 0], BellLabel.PhiMinus: [0, S2, -S2, 0],
        }
        for _ in range(100):
            sys = SystemAmplitudes.random(rng)
            d = bell_measure(sys)
            for lab, vec in bells.items():
                assert d[lab] == pytest.approx(abs(np.vdot(vec, sys.as_array())) ** 2, abs=1e-12)


class TestSnapshot:
    def test_hh(self):
        snap = pre_erasure_snapshot(SystemAmplitudes(1, 0, 0, 0))
        assert snap[("l", "u", "HH")] == pytest.approx(1)
        assert sum(snap.values()) == pytest.approx(1)

    def test_vh(self):
        snap = pre_erasure_snapshot(SystemAmplitudes(0, 0, 1, 0))
        assert snap[("r", "d", "VH")] == pytest.approx(1)

    def test_superposition_quarter_each(self):
        snap = pre_erasure_snapshot(SUPERPOSITION)
        hits = {k: v for k, v in snap.items() if v > 1e-12}
        assert hits == pytest.approx({("l", "u", "HH"): 0.25, ("r", "u", "HV"): 0.25,
                                      ("r", "d", "VH"): 0.25, ("l", "d", "VV"): 0.25})
