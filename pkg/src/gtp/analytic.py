"""Closed-form averaged quantities and an exact Haar-averaging oracle.

Averages are over input states drawn uniformly (Haar) from the unit sphere
of C^d, d = 2**N. For such states <|a_i|^2> = 1/d and
<|a_i a_j|^2> = (1 + delta_ij) / (d (d + 1)), which gives, for any linear
map M taking the input to Bob's unnormalized corrected state,

    <P>   = Tr(M^dag M) / d
    <P F> = (|Tr M|^2 + Tr(M^dag M)) / (d (d + 1)).

The transfer operators below are assembled from per-channel 2x2 blocks
written out by hand, so they are independent of the state-vector engine.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from gtp import core, multi
from gtp.core import OUTCOMES, Outcome
from gtp.multi import MultiParams


@dataclass(frozen=True)
class MomentTable:
    num_qubits: int

    @property
    def dimension(self) -> int:
        return 2**self.num_qubits

    @property
    def second_moment(self) -> float:
        return 1 / self.dimension

    def fourth_moment(self, i: int, j: int) -> float:
        """<|a_i a_j|^2> = 2**(delta_ij - N) / (1 + 2**N)."""
        delta = 1 if i == j else 0
        return 2.0 ** (delta - self.num_qubits) / (1 + self.dimension)


def _mods(n, m):
    a, b = abs(complex(n)), abs(complex(m))
    return a, b, (1 + a * a) * (1 + b * b)


def avg_prob(n, m, outcome: Outcome) -> float:
    a, b, denom = _mods(n, m)
    if Outcome(outcome) in (Outcome.PHI_PLUS, Outcome.PSI_MINUS):
        return (1 + (a * b) ** 2) / (2 * denom)
    return (a * a + b * b) / (2 * denom)


def avg_pf(n, m, xi: float, outcome: Outcome) -> float:
    a, b, denom = _mods(n, m)
    cross = a * b * math.cos(xi)
    if Outcome(outcome) in (Outcome.PHI_PLUS, Outcome.PSI_MINUS):
        return (1 + (a * b) ** 2 + cross) / (3 * denom)
    return (a * a + b * b + cross) / (3 * denom)


def xi_values(n, m, phases) -> dict[Outcome, float]:
    _, theta_n = core.polar(n)
    _, theta_m = core.polar(m)
    phases = core.coerce_phases(phases)
    return {o: core.xi(o, theta_n, theta_m, phases[o]) for o in OUTCOMES}


def c_pro_all_accept(n, m, xi_list: Sequence[float]) -> float:
    """Protocol efficiency when Alice accepts every outcome.

    ``xi_list`` is ordered (Phi+, Phi-, Psi+, Psi-).
    """
    if len(xi_list) != 4:
        raise ValueError("need one xi per outcome")
    a, b, denom = _mods(n, m)
    total = sum(math.cos(x) for x in xi_list)
    return (2 / 3) * (1 + a * b * total / (2 * denom))


def c_pro_concurrence(n, m) -> float:
    return (2 / 3) * (1 + core.concurrence(n) * core.concurrence(m) / 2)


def c_std(n: float) -> float:
    """Standard protocol (m = 1, xi = 0) on channel n."""
    return (2 / 3) * (1 + n / (1 + n * n))


def c_pqt(n: float) -> float:
    return 2 * n * n / (1 + n * n) ** 2


class PQTAttributes(NamedTuple):
    f_pqt: float | None
    p_suc: float
    c_pqt: float
    degenerate: bool = False


def pqt_attributes(n: float, m: float) -> PQTAttributes:
    """Averaged fidelity, success probability and efficiency of the
    {Phi-, Psi+} acceptance rule with real n, m and xi = 0."""
    n2, m2 = n * n, m * m
    denom = (1 + n2) * (1 + m2)
    p_suc = (n2 + m2) / denom
    c = 2 * (n2 + m2 + n * m) / (3 * denom)
    if n2 + m2 == 0:
        return PQTAttributes(None, 0.0, c, True)
    return PQTAttributes(2 * (n2 + m2 + n * m) / (3 * (n2 + m2)), p_suc, c)


def chi_values(n_list: Iterable, m_list: Iterable) -> list[float]:
    return [core.concurrence(n) * core.concurrence(m) / 2 for n, m in zip(n_list, m_list)]


def perm(i: int, chi: Sequence[float]) -> float:
    """Sum over all products of ``i`` distinct entries of ``chi``."""
    if not 1 <= i <= len(chi):
        raise ValueError(f"degree {i} out of range 1..{len(chi)}")
    return math.fsum(math.prod(c) for c in itertools.combinations(chi, i))


def _check_chi(chi: Sequence[float]) -> None:
    if not chi:
        raise ValueError("chi must be non-empty")
    for c in chi:
        if not -1e-15 <= c <= 0.5 + 1e-15:
            raise ValueError(f"chi value {c} outside [0, 1/2]")


def c_pro_N(chi: Sequence[float]) -> float:
    """All-accept efficiency of the N-qubit protocol, summed term by term."""
    _check_chi(chi)
    num = len(chi)
    total = 1 + math.fsum(2 ** (i - 1) * perm(i, chi) for i in range(1, num + 1))
    return 2 / (2**num + 1) * total


def c_pro_N_product(chi: Sequence[float]) -> float:
    """Same quantity as ``c_pro_N`` via (1 + prod(1 + 2 chi)) / (2**N + 1)."""
    _check_chi(chi)
    return (1 + math.prod(1 + 2 * c for c in chi)) / (2 ** len(chi) + 1)


def c_pqt_N(n_list: Sequence[float]) -> float:
    return math.prod(c_pqt(n) for n in n_list)


# -- transfer operators -------------------------------------------------------


def transfer_block(outcome: Outcome, n, m, theta: float = 0.0) -> np.ndarray:
    """2x2 map from the input qubit to Bob's corrected, unnormalized qubit."""
    n, m = complex(n), complex(m)
    scale = 1 / math.sqrt((1 + abs(n) ** 2) * (1 + abs(m) ** 2))
    mc = m.conjugate()
    outcome = Outcome(outcome)
    if outcome is Outcome.PHI_PLUS:
        raw = [[1, 0], [0, n * mc]]
    elif outcome is Outcome.PHI_MINUS:
        raw = [[m, 0], [0, -n]]
    elif outcome is Outcome.PSI_PLUS:
        raw = [[0, mc], [n, 0]]
    else:
        raw = [[0, -1], [m * n, 0]]
    return core.correction_operator(outcome, theta) @ (scale * np.array(raw, dtype=complex))


@dataclass(frozen=True)
class TransferOperator:
    matrix: np.ndarray
    outcome: tuple


def _channel_blocks(params: MultiParams) -> list[dict]:
    return [
        {o: transfer_block(o, params.n_list[k], params.m_list[k], params.phases[k][o]) for o in OUTCOMES}
        for k in range(params.num)
    ]


def _kron_chain(blocks, joint) -> np.ndarray:
    matrix = blocks[0][joint[0]]
    for table, kind in zip(blocks[1:], joint[1:]):
        matrix = np.kron(matrix, table[kind])
    return matrix


def joint_transfer_matrices(params: MultiParams) -> np.ndarray:
    """All 4**N joint transfer matrices, shape (4**N, d, d), in joint_outcomes order."""
    blocks = _channel_blocks(params)
    out = np.stack([blocks[0][o] for o in OUTCOMES])
    for table in blocks[1:]:
        nxt = np.stack([table[o] for o in OUTCOMES])
        d = out.shape[-1]
        out = np.einsum("aij,bkl->abikjl", out, nxt).reshape(out.shape[0] * 4, d * 2, d * 2)
    return out


def transfer_operator(outcome, params: MultiParams) -> TransferOperator:
    (joint,) = multi.normalize_acceptance([outcome], params.num)
    return TransferOperator(_kron_chain(_channel_blocks(params), joint), joint)


def _matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, TransferOperator) else np.asarray(op, dtype=complex)


def haar_avg_prob(op) -> float:
    mat = _matrix(op)
    d = mat.shape[0]
    return float(np.sum(np.abs(mat) ** 2)) / d


def haar_avg_pf(op) -> float:
    mat = _matrix(op)
    d = mat.shape[0]
    return (abs(np.trace(mat)) ** 2 + float(np.sum(np.abs(mat) ** 2))) / (d * (d + 1))


@dataclass(frozen=True)
class ExactAverage:
    """Haar-averaged outcome table for one protocol configuration."""

    outcomes: tuple
    probabilities: np.ndarray
    pf: np.ndarray
    p_suc: float
    c_pro: float
    f_pro: float | None
    degenerate: bool


def exact_average(params: MultiParams, acceptance: Iterable) -> ExactAverage:
    accepted = multi.normalize_acceptance(acceptance, params.num)
    if not accepted:
        raise ValueError("acceptance set must not be empty")
    outcomes = multi.joint_outcomes(params.num)
    mats = joint_transfer_matrices(params)
    d = mats.shape[-1]
    hs = np.sum(np.abs(mats) ** 2, axis=(1, 2))
    traces = np.abs(np.trace(mats, axis1=1, axis2=2)) ** 2
    probs = list(hs / d)
    pfs = list((traces + hs) / (d * (d + 1)))
    p_suc = math.fsum(p for o, p in zip(outcomes, probs) if o in accepted)
    c_pro = math.fsum(v for o, v in zip(outcomes, pfs) if o in accepted)
    degenerate = p_suc <= core.DEGENERATE_PSUC
    return ExactAverage(
        tuple(outcomes),
        np.array(probs),
        np.array(pfs),
        p_suc,
        c_pro,
        None if degenerate else c_pro / p_suc,
        degenerate,
    )


def all_accept_efficiency(params: MultiParams) -> float:
    """All-accept efficiency without enumerating the 4**N joint outcomes.

    Tr and Tr(M^dag M) factor over the Kronecker blocks, so the sums over
    joint outcomes are products of per-channel sums.
    """
    trace_sq, hs = 1.0, 1.0
    for n, m, phases in zip(params.n_list, params.m_list, params.phases):
        blocks = [transfer_block(o, n, m, phases[o]) for o in OUTCOMES]
        trace_sq *= sum(abs(np.trace(b)) ** 2 for b in blocks)
        hs *= sum(float(np.sum(np.abs(b) ** 2)) for b in blocks)
    d = 2**params.num
    return (trace_sq + hs) / (d * (d + 1))
