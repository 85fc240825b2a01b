import math

import numpy as np
import pytest

from gtp import core
from gtp.core import ParameterError
from gtp.linalg import I2, SIGMA_X, SIGMA_Z, ket

from oracles import brute_force

S = 1 / math.sqrt(2)
PHI_P, PHI_M, PSI_P, PSI_M = core.OUTCOMES


def by_outcome(records):
    return {r.outcome: r for r in records}


class TestChannelAndBasis:
    def test_channel_examples(self):
        np.testing.assert_allclose(core.channel_state(1), [S, 0, 0, S], atol=1e-15)
        np.testing.assert_allclose(core.channel_state(0), [1, 0, 0, 0])
        np.testing.assert_allclose(core.channel_state(0.5), [0.894427191, 0, 0, 0.4472135955], atol=1e-9)

    def test_channel_rejects_large_n(self):
        with pytest.raises(ParameterError):
            core.channel_state(1.2)
        with pytest.raises(ParameterError):
            core.channel_state(0.9 + 0.9j)

    @pytest.mark.parametrize("n, expected", [(1, 1.0), (0, 0.0), (0.5, 0.8), (0.5j, 0.8)])
    def test_concurrence(self, n, expected):
        assert core.concurrence(n) == pytest.approx(expected, abs=1e-15)

    def test_concurrence_monotone(self):
        values = [core.concurrence(x) for x in np.linspace(0, 1, 101)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_basis_at_one_is_standard_bell(self):
        basis = core.bell_basis(1)
        np.testing.assert_allclose(basis[PHI_P], [S, 0, 0, S], atol=1e-15)
        np.testing.assert_allclose(basis[PHI_M], [S, 0, 0, -S], atol=1e-15)
        np.testing.assert_allclose(basis[PSI_P], [0, S, S, 0], atol=1e-15)
        np.testing.assert_allclose(basis[PSI_M], [0, S, -S, 0], atol=1e-15)

    def test_basis_at_zero(self):
        basis = core.bell_basis(0)
        np.testing.assert_allclose(basis[PHI_P], ket("00"))
        np.testing.assert_allclose(basis[PHI_M], -ket("11"))
        np.testing.assert_allclose(basis[PSI_P], ket("01"))
        np.testing.assert_allclose(basis[PSI_M], -ket("10"))

    def test_basis_half(self):
        np.testing.assert_allclose(core.bell_basis(0.5)[PHI_P], [2 / math.sqrt(5), 0, 0, 1 / math.sqrt(5)], atol=1e-15)

    @pytest.mark.parametrize("mod", [0, 0.1, 0.37, 0.5, 0.99, 1.0])
    @pytest.mark.parametrize("phase", [0, 0.4, math.pi / 2, -2.5, math.pi])
    def test_basis_orthonormal(self, mod, phase):
        vecs = np.stack(list(core.bell_basis(mod * np.exp(1j * phase)).values()))
        np.testing.assert_allclose(vecs.conj() @ vecs.T, np.eye(4), atol=1e-12)

    def test_basis_rejects_large_m(self):
        with pytest.raises(ParameterError):
            core.bell_basis(1.01)


class TestCorrections:
    def test_fixed_operators(self):
        np.testing.assert_allclose(core.correction_operator(PHI_P, 0), I2)
        np.testing.assert_allclose(core.correction_operator(PSI_P, 0), SIGMA_X)
        np.testing.assert_allclose(core.correction_operator(PHI_M, 0), SIGMA_Z)
        np.testing.assert_allclose(core.correction_operator(PSI_M, 0), SIGMA_Z @ SIGMA_X)

    def test_phi_minus_quarter_turn(self):
        # diag(e^{i pi/2}, e^{-i pi/2}) @ sigma_z = diag(i, i)
        np.testing.assert_allclose(core.correction_operator(PHI_M, math.pi / 2), np.diag([1j, 1j]), atol=1e-15)

    def test_accepts_labels(self):
        np.testing.assert_allclose(core.correction_operator("Psi+", 0), SIGMA_X)

    @pytest.mark.parametrize(
        "outcome, theta_n, theta_m, theta, expected",
        [
            (PHI_P, 0, 0, 0, 0),
            (PHI_P, math.pi / 3, 0, math.pi / 6, 0),
            (PSI_P, math.pi / 3, 0, -math.pi / 6, 0),
            (PSI_M, 0.2, 0.3, 0.1, 0.7),
            (PHI_M, 0.2, 0.3, 0.1, -0.3),
        ],
    )
    def test_xi(self, outcome, theta_n, theta_m, theta, expected):
        assert core.xi(outcome, theta_n, theta_m, theta) == pytest.approx(expected, abs=1e-15)

    def test_optimal_phases_examples(self):
        assert all(v == 0 for v in core.optimal_phases(0.3, 0.8).values())
        ph = core.optimal_phases(np.exp(1j * math.pi / 3), 1)
        assert ph[PHI_P] == ph[PHI_M] == pytest.approx(math.pi / 6)
        assert ph[PSI_P] == ph[PSI_M] == pytest.approx(-math.pi / 6)
        ph = core.optimal_phases(1, np.exp(1j * math.pi / 2))
        assert ph[PHI_P] == pytest.approx(-math.pi / 4)
        assert ph[PSI_M] == pytest.approx(-math.pi / 4)

    @pytest.mark.parametrize("n", [0.4 * np.exp(0.7j), 0.9 * np.exp(-2.1j), 1j])
    @pytest.mark.parametrize("m", [0.3 * np.exp(1.2j), 1.0, -0.5])
    def test_optimal_phases_zero_xi(self, n, m):
        theta_n, theta_m = core.polar(n)[1], core.polar(m)[1]
        for o, theta in core.optimal_phases(n, m).items():
            x = core.xi(o, theta_n, theta_m, theta)
            assert abs(math.remainder(x, 2 * math.pi)) < 1e-12

    @pytest.mark.parametrize(
        "theta_n, phi, psi",
        [(0, 0, 0), (math.pi / 3, math.pi / 6, -math.pi / 6), (math.pi, math.pi / 2, -math.pi / 2)],
    )
    def test_dephasing_preset(self, theta_n, phi, psi):
        ph = core.dephasing_correction(theta_n)
        assert ph[PHI_P] == ph[PHI_M] == pytest.approx(phi)
        assert ph[PSI_P] == ph[PSI_M] == pytest.approx(psi)
        if theta_n < math.pi:
            assert ph == pytest.approx(core.optimal_phases(np.exp(1j * theta_n), 1))


class TestRunSingle:
    def test_standard_on_zero(self):
        for r in core.run_single(ket("0"), 1, 1):
            assert r.probability == pytest.approx(0.25, abs=1e-12)
            assert r.fidelity == pytest.approx(1, abs=1e-12)

    def test_weak_channel_on_zero(self):
        # frozen from tests/oracles/brute_force.py
        recs = by_outcome(core.run_single(ket("0"), 0.5, 1))
        expected = {PHI_P: 0.4, PHI_M: 0.4, PSI_P: 0.1, PSI_M: 0.1}
        for o, p in expected.items():
            assert recs[o].probability == pytest.approx(p, abs=1e-12)
            assert recs[o].fidelity == pytest.approx(1, abs=1e-12)

    def test_standard_on_plus(self):
        for r in core.run_single([S, S], 1, 1):
            assert r.probability == pytest.approx(0.25, abs=1e-12)
            assert r.fidelity == pytest.approx(1, abs=1e-12)

    def test_unreachable_outcome_is_null(self):
        # n = 0 and m = 0 on |0>: only Phi+ can occur
        recs = by_outcome(core.run_single(ket("0"), 0, 0))
        assert recs[PHI_P].probability == pytest.approx(1)
        for o in (PHI_M, PSI_P, PSI_M):
            assert recs[o].probability == 0.0
            assert recs[o].bob_state is None and recs[o].fidelity is None

    def test_requires_normalized_qubit(self):
        with pytest.raises(ValueError):
            core.run_single([1, 1], 1, 1)
        with pytest.raises(ValueError):
            core.run_single(ket("00"), 1, 1)

    def test_matches_brute_force(self, states):
        thetas = {"Phi+": 0.3, "Phi-": -1.2, "Psi+": 0.5, "Psi-": 2.0}
        n, m = 0.6 * np.exp(0.4j), 0.8 * np.exp(-1.1j)
        for phi in states(1, 10):
            ref = brute_force.teleport(tuple(phi), n, m, thetas)
            for r in core.run_single(phi, n, m, thetas):
                p, pf = ref[r.outcome.value]
                assert r.probability == pytest.approx(p, abs=1e-12)
                assert r.probability * r.fidelity == pytest.approx(pf, abs=1e-12)

    @pytest.mark.parametrize("n", [0.1, 0.35, 0.5, 0.8, 1.0])
    def test_probabilities_complete(self, states, n):
        for phi in states(1, 10):
            total = sum(r.probability for r in core.run_single(phi, n * np.exp(0.3j), 0.7, {"Psi-": 0.9}))
            assert abs(total - 1) < 1e-12

    @pytest.mark.parametrize("n", [0.2, 0.5, 0.9])
    def test_pqt_unity_fidelity(self, states, n):
        for phi in states(1, 100):
            recs = by_outcome(core.run_single(phi, n, n))
            assert abs(recs[PHI_M].fidelity - 1) < 1e-12
            assert abs(recs[PSI_P].fidelity - 1) < 1e-12

    @pytest.mark.parametrize("theta_n", [0.3, 1.7, math.pi, 5.0])
    def test_dephasing_recovered(self, states, theta_n):
        phases = core.dephasing_correction(theta_n)
        for phi in states(1, 20):
            for r in core.run_single(phi, np.exp(1j * theta_n), 1, phases):
                assert abs(r.fidelity - 1) < 1e-12

    def test_dephasing_uncorrected_loses_fidelity(self):
        recs = core.run_single([S, S], np.exp(1j * math.pi / 2), 1)
        assert all(r.fidelity < 0.9 for r in recs)


class TestReport:
    def test_all_accept_standard(self):
        rep = core.report(core.run_single(ket("0"), 1, 1), core.OUTCOMES)
        assert rep.p_suc == pytest.approx(1) and rep.c_pro == pytest.approx(1) and rep.f_pro == pytest.approx(1)

    def test_pqt_half(self, states):
        for phi in states(1, 5):
            rep = core.report(core.run_single(phi, 0.5, 0.5), ["Phi-", "Psi+"])
            assert rep.p_suc == pytest.approx(0.32, abs=1e-12)
            assert rep.f_pro == pytest.approx(1, abs=1e-12)

    def test_single_outcome(self):
        rep = core.report(core.run_single(ket("0"), 0.5, 1), [PHI_P])
        assert rep.p_suc == pytest.approx(0.4, abs=1e-12)
        assert rep.f_pro == pytest.approx(1, abs=1e-12)

    def test_empty_acceptance_rejected(self):
        with pytest.raises(ValueError):
            core.report(core.run_single(ket("0"), 1, 1), [])

    def test_degenerate_when_nothing_reachable(self):
        rep = core.report(core.run_single(ket("0"), 0, 0), [PSI_P])
        assert rep.degenerate and rep.f_pro is None and rep.p_suc == 0

    def test_per_outcome_rows(self):
        rep = core.report(core.run_single(ket("0"), 0.5, 1), core.OUTCOMES)
        assert [row[0] for row in rep.per_outcome] == ["Phi+", "Phi-", "Psi+", "Psi-"]

    def test_efficiency_bounded_by_success(self, states):
        for phi in states(1, 30):
            recs = core.run_single(phi, 0.4, 0.9, {"Phi+": 0.5})
            for accept in ([PHI_P], [PHI_P, PSI_M], core.OUTCOMES):
                rep = core.report(recs, accept)
                assert rep.c_pro <= rep.p_suc + 1e-15
                fids = [r.fidelity for r in recs if r.outcome in accept]
                if all(abs(f - 1) < 1e-12 for f in fids):
                    assert rep.c_pro == pytest.approx(rep.p_suc, abs=1e-12)
                else:
                    assert rep.c_pro < rep.p_suc
