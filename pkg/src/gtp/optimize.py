"""Grid-then-refine coordinate search for the channel efficiency.

The free parameters per channel are the basis parameter m in [0, 1] and the
four phases xi in [0, 2 pi). The objective is the exact Haar-averaged
all-accept efficiency, evaluated through the transfer-operator oracle.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

from gtp import analytic, core
from gtp.core import OUTCOMES
from gtp.multi import MultiParams

TWO_PI = 2 * math.pi
FLAT_TOL = 1e-12


def phases_for_xi(n, m, xi: Sequence[float]) -> dict:
    """Correction phases realising the requested xi per outcome."""
    _, theta_n = core.polar(n)
    _, theta_m = core.polar(m)
    table = {}
    for o, x in zip(OUTCOMES, xi):
        if o.is_phi:
            table[o] = (theta_n - theta_m - x) / 2
        else:
            table[o] = (x - theta_n - theta_m) / 2
    return table


def efficiency(n_list, m_list, xi_tables) -> float:
    phases = [phases_for_xi(n, m, xi) for n, m, xi in zip(n_list, m_list, xi_tables)]
    return analytic.all_accept_efficiency(MultiParams(tuple(n_list), tuple(m_list), tuple(phases)))


@dataclass
class OptimizeResult:
    n_list: list
    m_star: list
    xi_star: list
    c_channel: float
    degenerate: bool
    evaluations: int = 0
    flat_coordinates: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.n_list,
            "m_star": self.m_star,
            "xi_star": self.xi_star,
            "c_channel": self.c_channel,
            "degenerate_maximizer": self.degenerate,
        }


def _scan_points(center, lo, hi, step, periodic, full):
    if full:
        count = int(math.floor((hi - lo) / step + 1e-9)) + (0 if periodic else 1)
        return [lo + i * step for i in range(count)]
    pts = [center + i * step for i in range(-10, 11)]
    if periodic:
        return [p % TWO_PI for p in pts]
    return [p for p in pts if lo - 1e-12 <= p <= hi + 1e-12]


def optimize_channel(
    n_list: Sequence[float],
    initial_step: float = 0.05,
    refinements: int = 2,
    shrink: float = 0.1,
    max_sweeps: int = 50,
) -> OptimizeResult:
    """Maximize the all-accept efficiency over m and xi for fixed channels."""
    n_list = [float(n) for n in n_list]
    for n in n_list:
        if not 0 <= n <= 1:
            raise core.ParameterError(f"n must lie in [0, 1], got {n}")
    num = len(n_list)
    # coordinate vector: m_1..m_N, then xi_{k, outcome} row by row
    x = [0.5] * num + [math.pi] * (4 * num)
    evals = 0

    def objective(vec):
        nonlocal evals
        evals += 1
        m_list = vec[:num]
        xi = [vec[num + 4 * k: num + 4 * k + 4] for k in range(num)]
        return efficiency(n_list, m_list, xi)

    best = objective(x)
    # phases before m: from m = 0 every phase direction is flat, so an m-first
    # cycle started at bad phases can collapse onto m = 0 and stall there
    order = list(range(num, len(x))) + list(range(num))
    step = initial_step
    for level in range(refinements + 1):
        for _ in range(max_sweeps):
            improved = False
            for c in order:
                periodic = c >= num
                lo, hi = (0.0, TWO_PI) if periodic else (0.0, 1.0)
                values = []
                for p in _scan_points(x[c], lo, hi, step, periodic, full=(level == 0)):
                    trial = list(x)
                    trial[c] = p
                    values.append((objective(trial), p))
                top = max(v for v, _ in values)
                if top > best + 1e-15:
                    best = top
                    # first maximiser in scan order breaks ties
                    x[c] = next(p for v, p in values if v == top)
                    improved = True
            if not improved:
                break
        step *= shrink
    # a flat objective along some m_k leaves that maximiser undetermined
    flat = []
    for c in range(num):
        values = []
        for p in _scan_points(x[c], 0.0, 1.0, initial_step, False, full=True):
            trial = list(x)
            trial[c] = p
            values.append(objective(trial))
        if max(values) - min(values) < FLAT_TOL:
            flat.append(c)
    return OptimizeResult(
        n_list=n_list,
        m_star=[float(v) for v in x[:num]],
        xi_star=[[float(v % TWO_PI) for v in x[num + 4 * k: num + 4 * k + 4]] for k in range(num)],
        c_channel=float(best),
        degenerate=bool(flat),
        evaluations=evals,
        flat_coordinates=flat,
    )


def circular_distance(a: float, b: float = 0.0) -> float:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


def expected_channel_efficiency(n_list: Sequence[float]) -> float:
    """Value at m = 1, xi = 0 for every channel."""
    chi = analytic.chi_values(n_list, [1.0] * len(n_list))
    return analytic.c_pro_N_product(chi)

