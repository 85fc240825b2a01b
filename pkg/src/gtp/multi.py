"""N-qubit generalized teleportation over N two-qubit channels.

Layout of the 3N-qubit register: input qubits 1..N, then channel k at
positions (N + 2k - 1, N + 2k) holding (Alice_k, Bob_k). Joint outcomes are
tuples of per-channel ``Outcome`` values and are enumerated in
``itertools.product`` order, so channel 1 is the most significant digit of
the flat outcome index.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from gtp import core, linalg
from gtp.core import OUTCOMES, Outcome, ProtocolReport

MAX_QUBITS = 3

JointOutcome = tuple[Outcome, ...]


def joint_outcomes(num: int) -> list[JointOutcome]:
    return list(itertools.product(OUTCOMES, repeat=num))


def outcome_label(outcome) -> str:
    if isinstance(outcome, Outcome):
        return outcome.value
    return ",".join(o.value for o in outcome)


def parse_outcome(label: str) -> JointOutcome:
    return tuple(Outcome(part.strip()) for part in label.split(","))


@dataclass(frozen=True)
class MultiParams:
    """Channel parameters, basis parameters and one phase table per channel."""

    n_list: tuple
    m_list: tuple
    phases: tuple = field(default=())

    def __post_init__(self):
        n_list = tuple(complex(n) for n in self.n_list)
        m_list = tuple(complex(m) for m in self.m_list)
        if not n_list or len(n_list) != len(m_list):
            raise core.ParameterError("n_list and m_list must be non-empty and of equal length")
        if len(n_list) > MAX_QUBITS:
            raise core.ParameterError(f"at most {MAX_QUBITS} qubits are supported")
        for n, m in zip(n_list, m_list):
            core.channel_state(n)
            core.bell_basis(m)
        phases = self.phases or [None] * len(n_list)
        if len(phases) != len(n_list):
            raise core.ParameterError("need one phase table per channel")
        object.__setattr__(self, "n_list", n_list)
        object.__setattr__(self, "m_list", m_list)
        object.__setattr__(self, "phases", tuple(core.coerce_phases(p) for p in phases))

    @property
    def num(self) -> int:
        return len(self.n_list)

    @classmethod
    def optimal(cls, n_list: Sequence, m_list: Sequence) -> "MultiParams":
        phases = [core.optimal_phases(n, m) for n, m in zip(n_list, m_list)]
        return cls(tuple(n_list), tuple(m_list), tuple(phases))


@dataclass(frozen=True)
class JointRecord:
    outcome: JointOutcome
    probability: float
    bob_state: np.ndarray | None
    fidelity: float | None


def initial_register(states: np.ndarray, params: MultiParams) -> np.ndarray:
    """input (x) channel_1 (x) ... (x) channel_N for a batch of inputs."""
    register = states
    for n in params.n_list:
        register = linalg.tensor(register, core.channel_state(n))
    return register


def propagate(states, params: MultiParams) -> np.ndarray:
    """Corrected, unnormalized Bob states for every joint outcome.

    ``states`` has shape (S, 2**N); the result has shape (S, 4**N, 2**N),
    with the outcome axis in ``joint_outcomes`` order.
    """
    states = linalg.as_state(states)
    num = params.num
    if states.ndim != 2 or states.shape[-1] != 2**num:
        raise ValueError(f"expected a batch of {num}-qubit states, got shape {states.shape}")
    batch = states.shape[0]
    # axes: batch, branch, then one axis per surviving qubit
    psi = initial_register(states, params).reshape((batch, 1) + (2,) * (3 * num))
    labels = [("in", k) for k in range(num)]
    for k in range(num):
        labels += [("alice", k), ("bob", k)]
    for k in range(num):
        basis = core.bell_basis(params.m_list[k])
        bras = np.stack([basis[o] for o in OUTCOMES]).conj().reshape(4, 2, 2)
        i = labels.index(("in", k)) + 2
        j = labels.index(("alice", k)) + 2
        psi = np.tensordot(psi, bras, axes=([i, j], [1, 2]))
        labels = [lab for lab in labels if lab not in (("in", k), ("alice", k))]
        # (S, B, rest..., 4) -> (S, B, 4, rest...)
        psi = np.moveaxis(psi, -1, 2)
        ops = np.stack([core.correction_operator(o, params.phases[k][o]) for o in OUTCOMES])
        b = labels.index(("bob", k)) + 3
        psi = np.moveaxis(psi, b, -1)
        psi = np.einsum("jxy,sbj...y->sbj...x", ops, psi)
        psi = np.moveaxis(psi, -1, b)
        # fold the outcome digit into the branch index: b * 4 + j
        psi = psi.reshape((batch, -1) + (2,) * len(labels))
    return psi.reshape(batch, 4**num, 2**num)


def batch_quantities(states, params: MultiParams) -> tuple[np.ndarray, np.ndarray]:
    """Per-input outcome probabilities P and products P*F, each (S, 4**N)."""
    states = linalg.as_state(states)
    bob = propagate(states, params)
    probs = np.sum(np.abs(bob) ** 2, axis=-1)
    overlaps = np.einsum("sd,sbd->sb", states.conj(), bob)
    return probs, np.abs(overlaps) ** 2


def run_multi(state, params: MultiParams) -> list[JointRecord]:
    """Teleport an N-qubit state and return one record per joint outcome."""
    phi = linalg.as_state(state)
    if phi.shape != (2**params.num,):
        raise ValueError(f"input must be a single {params.num}-qubit state")
    if abs(np.linalg.norm(phi) - 1) > linalg.ATOL:
        raise ValueError("input state must be normalized")
    bob = propagate(phi[None, :], params)[0]
    records = []
    for outcome, unnorm in zip(joint_outcomes(params.num), bob):
        prob = float(np.vdot(unnorm, unnorm).real)
        if prob <= linalg.NULL_PROBABILITY:
            records.append(JointRecord(outcome, 0.0, None, None))
            continue
        out = unnorm / math.sqrt(prob)
        records.append(JointRecord(outcome, prob, out, float(linalg.fidelity(phi, out))))
    return records


def pqt_acceptance(num: int) -> frozenset:
    """Joint outcomes whose every component is Phi- or Psi+."""
    if num < 1:
        raise ValueError("need at least one qubit")
    return frozenset(itertools.product((Outcome.PHI_MINUS, Outcome.PSI_PLUS), repeat=num))


def all_acceptance(num: int) -> frozenset:
    return frozenset(joint_outcomes(num))


def normalize_acceptance(acceptance: Iterable, num: int) -> frozenset:
    """Accept joint outcomes as tuples, bare Outcomes (N=1) or labels."""
    result = set()
    for item in acceptance:
        if isinstance(item, str):
            item = parse_outcome(item)
        elif isinstance(item, Outcome):
            item = (item,)
        item = tuple(Outcome(o) for o in item)
        if len(item) != num:
            raise ValueError(f"outcome {outcome_label(item)} does not have {num} components")
        result.add(item)
    return frozenset(result)


def joint_report(records: Iterable[JointRecord], acceptance: Iterable) -> ProtocolReport:
    records = list(records)
    if not records:
        raise ValueError("no records")
    accepted = normalize_acceptance(acceptance, len(records[0].outcome))
    return core.summarize(records, accepted, label=outcome_label)


def acceptance_mask(acceptance: Iterable, num: int) -> np.ndarray:
    """Boolean mask over the flat joint-outcome index."""
    accepted = normalize_acceptance(acceptance, num)
    return np.array([o in accepted for o in joint_outcomes(num)])


def phases_from_mapping(tables: Sequence[Mapping] | None, num: int) -> tuple:
    if tables is None:
        return tuple(core.zero_phases() for _ in range(num))
    return tuple(core.coerce_phases(t) for t in tables)
