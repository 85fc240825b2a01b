"""Seeded Monte-Carlo averaging over Haar-random input states.

Random numbers come from PCG64 (64-bit output words via ``random_raw``),
seeded through ``SeedSequence(seed, spawn_key=(stream_id,))``. Each word is
turned into a double in (0, 1] from its top 53 bits, and complex Gaussian
amplitudes are made by Box-Muller from consecutive pairs of uniforms
(radius from the first, angle from the second). Numpy's own normal sampler
is deliberately not used because its algorithm is not part of any stability
promise.

Shards use ``stream_id`` = shard index. Within a shard samples are drawn in
chunks; per-chunk means and co-moment matrices are merged with the pairwise
(Chan et al.) update, first chunk by chunk, then shard by shard in index
order, so results are bit-for-bit reproducible for a fixed configuration.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from gtp import multi
from gtp.multi import MultiParams

DEFAULT_SEED = 20061016
VERIFY_SAMPLES = 100_000
SWEEP_SAMPLES = 10_000
DEFAULT_SHARDS = 4
CHUNK = 4096


@dataclass(frozen=True)
class RandomStream:
    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.PCG64:
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,)))


def uniforms(bitgen: np.random.PCG64, size: int) -> np.ndarray:
    """Doubles in (0, 1] from the top 53 bits of each raw 64-bit word."""
    raw = bitgen.random_raw(size)
    return ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def complex_gaussians(bitgen: np.random.PCG64, size: int) -> np.ndarray:
    u = uniforms(bitgen, 2 * size).reshape(size, 2)
    radius = np.sqrt(-2.0 * np.log(u[:, 0]))
    return radius * np.exp(2j * np.pi * u[:, 1])


def haar_states(num_qubits: int, count: int, bitgen: np.random.PCG64) -> np.ndarray:
    """``count`` Haar-random states, shape (count, 2**num_qubits)."""
    if not 1 <= num_qubits <= multi.MAX_QUBITS:
        raise ValueError(f"num_qubits must be in 1..{multi.MAX_QUBITS}")
    dim = 2**num_qubits
    z = complex_gaussians(bitgen, count * dim).reshape(count, dim)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_state(num_qubits: int, stream: RandomStream) -> np.ndarray:
    """First Haar-random state of ``stream``."""
    return haar_states(num_qubits, 1, stream.generator())[0]


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    samples: int | None

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "samples": self.samples}


class RunningMoments:
    """Mean vector and co-moment matrix of a stream of real observation rows."""

    def __init__(self, width: int):
        self.count = 0
        self.mean = np.zeros(width)
        self.comoment = np.zeros((width, width))

    def add_batch(self, rows: np.ndarray) -> None:
        other = RunningMoments(rows.shape[1])
        other.count = rows.shape[0]
        other.mean = rows.mean(axis=0)
        centered = rows - other.mean
        other.comoment = centered.T @ centered
        self.merge(other)

    def merge(self, other: "RunningMoments") -> None:
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.comoment = other.count, other.mean.copy(), other.comoment.copy()
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.count / total)
        self.comoment = self.comoment + other.comoment + np.outer(delta, delta) * (self.count * other.count / total)
        self.count = total

    def covariance(self) -> np.ndarray:
        if self.count < 2:
            raise ValueError("need at least two samples")
        return self.comoment / (self.count - 1)

    def estimate(self, column: int) -> Estimate:
        var = max(self.covariance()[column, column], 0.0)
        return Estimate(float(self.mean[column]), math.sqrt(var / self.count), self.count)


def ratio_estimate(moments: RunningMoments, num: int, den: int) -> Estimate:
    """Mean of column ``num`` over mean of column ``den``, delta-method error."""
    cov = moments.covariance()
    a, b = moments.mean[num], moments.mean[den]
    r = a / b
    var = (cov[num, num] - 2 * r * cov[num, den] + r * r * cov[den, den]) / (b * b)
    return Estimate(float(r), math.sqrt(max(var, 0.0) / moments.count), moments.count)


@dataclass(frozen=True)
class MonteCarloResult:
    outcomes: tuple
    prob: tuple  # Estimate per joint outcome
    pf: tuple
    p_suc: Estimate
    c_pro: Estimate
    f_pro: Estimate | None
    degenerate: bool

    def per_outcome(self) -> dict:
        return {o: (p, q) for o, p, q in zip(self.outcomes, self.prob, self.pf)}


def shard_sizes(samples: int, shards: int) -> list[int]:
    base, extra = divmod(samples, shards)
    return [base + (1 if s < extra else 0) for s in range(shards)]


def mc_protocol_average(
    params: MultiParams,
    acceptance: Iterable,
    samples: int = VERIFY_SAMPLES,
    seed: int = DEFAULT_SEED,
    shards: int = DEFAULT_SHARDS,
) -> MonteCarloResult:
    """Average outcome probabilities and P*F over Haar-random inputs."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    num = params.num
    mask = multi.acceptance_mask(acceptance, num)
    if not mask.any():
        raise ValueError("acceptance set must not be empty")
    width = 4**num
    # columns: P per outcome, PF per outcome, p_suc, c_pro
    total = RunningMoments(2 * width + 2)
    for shard, size in enumerate(shard_sizes(samples, shards)):
        bitgen = RandomStream(seed, shard).generator()
        moments = RunningMoments(2 * width + 2)
        remaining = size
        while remaining > 0:
            count = min(CHUNK, remaining)
            remaining -= count
            states = haar_states(num, count, bitgen)
            probs, pf = multi.batch_quantities(states, params)
            rows = np.concatenate(
                [probs, pf, probs[:, mask].sum(axis=1, keepdims=True), pf[:, mask].sum(axis=1, keepdims=True)],
                axis=1,
            )
            moments.add_batch(rows)
        total.merge(moments)
    p_col, c_col = 2 * width, 2 * width + 1
    p_suc = total.estimate(p_col)
    c_pro = total.estimate(c_col)
    degenerate = p_suc.mean < 10 * p_suc.std_error or p_suc.mean <= 1e-12
    f_pro = None if degenerate else ratio_estimate(total, c_col, p_col)
    return MonteCarloResult(
        tuple(multi.joint_outcomes(num)),
        tuple(total.estimate(j) for j in range(width)),
        tuple(total.estimate(width + j) for j in range(width)),
        p_suc,
        c_pro,
        f_pro,
        degenerate,
    )


def empirical_moments(num_qubits: int, samples: int, seed: int = DEFAULT_SEED):
    """Estimates of <|a_i|^2> (length d) and <|a_i a_j|^2> (d x d)."""
    states = haar_states(num_qubits, samples, RandomStream(seed).generator())
    sq = np.abs(states) ** 2
    d = sq.shape[1]
    second = [Estimate(float(c.mean()), float(c.std(ddof=1) / math.sqrt(samples)), samples) for c in sq.T]
    fourth = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            col = sq[:, i] * sq[:, j]
            fourth[i][j] = Estimate(float(col.mean()), float(col.std(ddof=1) / math.sqrt(samples)), samples)
    return second, fourth
