"""Single-qubit generalized teleportation.

Qubit layout for a run is (input, Alice's channel half, Bob's channel half).
Alice measures qubits 1 and 2 in the generalized Bell basis of parameter
``m`` and Bob applies ``exp(i sigma_z theta) O`` for the reported outcome,
with ``O`` one of I, sigma_z, sigma_x, sigma_z sigma_x.
"""

from __future__ import annotations

import cmath
import enum
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from gtp import linalg
from gtp.linalg import I2, SIGMA_X, SIGMA_Z

DEGENERATE_PSUC = 1e-12


class ParameterError(ValueError):
    """A protocol parameter violates its domain (e.g. |n| > 1)."""


class Outcome(enum.Enum):
    PHI_PLUS = "Phi+"
    PHI_MINUS = "Phi-"
    PSI_PLUS = "Psi+"
    PSI_MINUS = "Psi-"

    def __str__(self) -> str:
        return self.value

    @property
    def is_phi(self) -> bool:
        return self in (Outcome.PHI_PLUS, Outcome.PHI_MINUS)


OUTCOMES = tuple(Outcome)

# Bob's fixed operator per outcome, before the phase factor.
FIXED_CORRECTIONS = {
    Outcome.PHI_PLUS: I2,
    Outcome.PHI_MINUS: SIGMA_Z,
    Outcome.PSI_PLUS: SIGMA_X,
    Outcome.PSI_MINUS: SIGMA_Z @ SIGMA_X,
}

CorrectionPhases = dict[Outcome, float]  # radians, read mod 2 pi


def _check_param(value, name: str) -> complex:
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ParameterError(f"{name} must be finite, got {value}")
    if abs(value) > 1 + linalg.ATOL:
        raise ParameterError(f"|{name}| must be <= 1, got {abs(value):.6g}")
    return value


def polar(value) -> tuple[float, float]:
    """(|z|, arg z) with arg 0 for z = 0."""
    value = complex(value)
    return abs(value), (cmath.phase(value) if value != 0 else 0.0)


def channel_state(n) -> np.ndarray:
    """(|00> + n|11>) / sqrt(1 + |n|^2)."""
    n = _check_param(n, "n")
    state = np.array([1, 0, 0, n], dtype=complex)
    return state / math.sqrt(1 + abs(n) ** 2)


def concurrence(n) -> float:
    r = abs(complex(n))
    return 2 * r / (1 + r * r)


def bell_basis(m) -> dict[Outcome, np.ndarray]:
    m = _check_param(m, "m")
    norm = 1 / math.sqrt(1 + abs(m) ** 2)
    mc = m.conjugate()
    return {
        Outcome.PHI_PLUS: norm * np.array([1, 0, 0, m], dtype=complex),
        Outcome.PHI_MINUS: norm * np.array([mc, 0, 0, -1], dtype=complex),
        Outcome.PSI_PLUS: norm * np.array([0, 1, m, 0], dtype=complex),
        Outcome.PSI_MINUS: norm * np.array([0, mc, -1, 0], dtype=complex),
    }


def phase_rotation(theta: float) -> np.ndarray:
    """exp(i sigma_z theta) = diag(e^{i theta}, e^{-i theta})."""
    return np.diag([cmath.exp(1j * theta), cmath.exp(-1j * theta)])


def correction_operator(outcome: Outcome, theta: float = 0.0) -> np.ndarray:
    return phase_rotation(theta) @ FIXED_CORRECTIONS[Outcome(outcome)]


def xi(outcome: Outcome, theta_n: float, theta_m: float, theta: float) -> float:
    """Phase entering cos(xi) of the averaged fidelity for one outcome."""
    if Outcome(outcome).is_phi:
        return theta_n - theta_m - 2 * theta
    return theta_n + theta_m + 2 * theta


def zero_phases() -> CorrectionPhases:
    return {o: 0.0 for o in OUTCOMES}


def optimal_phases(n, m) -> CorrectionPhases:
    """Phases that make xi vanish for all four outcomes."""
    _, theta_n = polar(n)
    _, theta_m = polar(m)
    # + 0.0 turns -0.0 into 0.0 for real parameters
    phi = (theta_n - theta_m) / 2 + 0.0
    psi = -(theta_n + theta_m) / 2 + 0.0
    return {
        Outcome.PHI_PLUS: phi,
        Outcome.PHI_MINUS: phi,
        Outcome.PSI_PLUS: psi,
        Outcome.PSI_MINUS: psi,
    }


def dephasing_correction(theta_n: float) -> CorrectionPhases:
    """Bob's preset for a dephased channel n = exp(i theta_n) measured with m = 1."""
    return {
        Outcome.PHI_PLUS: theta_n / 2,
        Outcome.PHI_MINUS: theta_n / 2,
        Outcome.PSI_PLUS: -theta_n / 2,
        Outcome.PSI_MINUS: -theta_n / 2,
    }


def coerce_phases(phases: Mapping | None) -> CorrectionPhases:
    """Fill a phase table keyed by Outcome or its label; missing entries are 0."""
    table = zero_phases()
    for key, value in (phases or {}).items():
        theta = float(value)
        if not math.isfinite(theta):
            raise ParameterError(f"phase for {key} must be finite")
        table[Outcome(key)] = theta
    return table


@dataclass(frozen=True)
class OutcomeRecord:
    outcome: Outcome
    probability: float
    bob_state: np.ndarray | None
    fidelity: float | None


def run_single(state, n, m, phases: Mapping | None = None) -> list[OutcomeRecord]:
    """Teleport one qubit and return a record for each of Alice's four outcomes."""
    phi = linalg.as_state(state)
    if phi.shape != (2,):
        raise ValueError("run_single teleports exactly one qubit")
    if abs(np.linalg.norm(phi) - 1) > linalg.ATOL:
        raise ValueError("input state must be normalized")
    phases = coerce_phases(phases)
    full = linalg.tensor(phi, channel_state(n))
    records = []
    for outcome, vec in bell_basis(m).items():
        prob, residual = linalg.project_pair(full, (1, 2), vec)
        if residual is None:
            records.append(OutcomeRecord(outcome, 0.0, None, None))
            continue
        bob = linalg.apply_local(residual, 1, correction_operator(outcome, phases[outcome]))
        records.append(OutcomeRecord(outcome, prob, bob, float(linalg.fidelity(phi, bob))))
    return records


@dataclass(frozen=True)
class ProtocolReport:
    p_suc: float
    c_pro: float
    f_pro: float | None
    per_outcome: tuple  # (label, probability, fidelity) triples
    degenerate: bool = False


def summarize(records: Iterable, accepted: set, label=str) -> ProtocolReport:
    """Shared report assembly for single-qubit and joint records."""
    if not accepted:
        raise ValueError("acceptance set must not be empty")
    records = list(records)
    known = {r.outcome for r in records}
    unknown = set(accepted) - known
    if unknown:
        raise ValueError(f"accepted outcomes not among the records: {sorted(map(label, unknown))}")
    p_terms, c_terms, rows = [], [], []
    for r in records:
        rows.append((label(r.outcome), r.probability, r.fidelity))
        if r.outcome in accepted and r.fidelity is not None:
            p_terms.append(r.probability)
            c_terms.append(r.probability * r.fidelity)
    p_suc = math.fsum(p_terms)
    c_pro = math.fsum(c_terms)
    degenerate = p_suc <= DEGENERATE_PSUC
    f_pro = None if degenerate else c_pro / p_suc
    return ProtocolReport(p_suc, c_pro, f_pro, tuple(rows), degenerate)


def report(records: Iterable[OutcomeRecord], acceptance: Iterable) -> ProtocolReport:
    accepted = {Outcome(a) for a in acceptance}
    return summarize(records, accepted)
