"""Acceptance criteria for the simulator, shared by ``gtp verify`` and the tests.

Each check returns a ``CriterionResult``. Tolerances are fixed here; the
``tolerance_scale`` knob exists only so the failure path can be exercised
(a negative scale makes every check fail).
"""

from __future__ import annotations

import contextlib
import io
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from gtp import analytic, core, multi, sampler, sweep
from gtp import optimize as opt
from gtp.core import OUTCOMES, Outcome

WIDE_CI_SAMPLES = 10_000
MC_OUTLIER_ALLOWANCE = 0.01
SIGMAS = 4.0
# float noise allowance for estimates whose true variance is zero
ZERO_VARIANCE_SLACK = 1e-12


@dataclass(frozen=True)
class VerifyConfig:
    samples: int | None = None
    seed: int = sampler.DEFAULT_SEED
    grid: str = "coarse"
    tolerance_scale: float = 1.0

    def tol(self, value: float) -> float:
        return value * self.tolerance_scale

    def mc_samples(self, default: int) -> int:
        return self.samples if self.samples is not None else default


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: str
    expected: str
    warnings: list = field(default_factory=list)
    elapsed: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} [{self.number:2d}] {self.title}: measured {self.measured}; expected {self.expected}"
        for w in self.warnings:
            text += f"\n     WARN {w}"
        return text

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "measured": self.measured,
            "expected": self.expected,
            "warnings": list(self.warnings),
        }


def _inputs(num_qubits: int, count: int, seed: int, stream: int) -> np.ndarray:
    return sampler.haar_states(num_qubits, count, sampler.RandomStream(seed, stream).generator())


def _within(diff: float, sigma: float, cfg: VerifyConfig) -> bool:
    return abs(diff) <= cfg.tol(SIGMAS * sigma + ZERO_VARIANCE_SLACK)


def _wide_ci(samples: int) -> list[str]:
    if samples < WIDE_CI_SAMPLES:
        return [f"WIDE-CI: only {samples} samples; statistical checks are weak"]
    return []


def standard_protocol(cfg: VerifyConfig) -> CriterionResult:
    worst_f = worst_p = worst_r = 0.0
    for phi in _inputs(1, 100, cfg.seed, 101):
        records = core.run_single(phi, 1.0, 1.0)
        for r in records:
            worst_f = max(worst_f, abs(r.fidelity - 1))
            worst_p = max(worst_p, abs(r.probability - 0.25))
        rep = core.report(records, OUTCOMES)
        worst_r = max(worst_r, abs(rep.p_suc - 1), abs(rep.c_pro - 1))
    tol = cfg.tol(1e-12)
    return CriterionResult(
        1,
        "standard protocol exactness (n=m=1)",
        max(worst_f, worst_p, worst_r) <= tol,
        f"max|F-1|={worst_f:.2e} max|P-1/4|={worst_p:.2e} max report err={worst_r:.2e}",
        "<= 1e-12",
    )


def pqt_exactness(cfg: VerifyConfig) -> CriterionResult:
    worst_f = worst_p = 0.0
    accepted = (Outcome.PHI_MINUS, Outcome.PSI_PLUS)
    inputs = _inputs(1, 100, cfg.seed, 102)
    for k in range(1, 11):
        n = k / 10
        target = analytic.c_pqt(n)
        for phi in inputs:
            records = core.run_single(phi, n, n)
            for r in records:
                if r.outcome in accepted:
                    worst_f = max(worst_f, abs(r.fidelity - 1))
            worst_p = max(worst_p, abs(core.report(records, accepted).p_suc - target))
        exact = analytic.exact_average(multi.MultiParams([n], [n]), multi.pqt_acceptance(1))
        worst_p = max(worst_p, abs(exact.p_suc - target))
        worst_f = max(worst_f, abs(exact.f_pro - 1))
    tol = cfg.tol(1e-12)
    return CriterionResult(
        2,
        "PQT exactness (m=n, accept Phi-/Psi+)",
        max(worst_f, worst_p) <= tol,
        f"max|F-1|={worst_f:.2e} max|p_suc-2n^2/(1+n^2)^2|={worst_p:.2e}",
        "<= 1e-12",
    )


PHASE_GRID = (0.0, math.pi / 4, math.pi / 2)
FIXED_PHASES = {Outcome.PHI_PLUS: 0.3, Outcome.PHI_MINUS: -0.7, Outcome.PSI_PLUS: 1.1, Outcome.PSI_MINUS: 2.0}


def _complex(mod: float, phase: float) -> complex:
    return mod * complex(math.cos(phase), math.sin(phase))


def averaged_formulas(cfg: VerifyConfig) -> CriterionResult:
    worst = 0.0
    points = 0
    mods = [k / 10 for k in range(11)]
    for a, b, tn, tm in itertools.product(mods, mods, PHASE_GRID, PHASE_GRID):
        n, m = _complex(a, tn), _complex(b, tm)
        for phases in (core.zero_phases(), core.optimal_phases(n, m), FIXED_PHASES):
            xis = analytic.xi_values(n, m, phases)
            for o in OUTCOMES:
                block = analytic.transfer_block(o, n, m, phases[o])
                worst = max(
                    worst,
                    abs(analytic.haar_avg_prob(block) - analytic.avg_prob(n, m, o)),
                    abs(analytic.haar_avg_pf(block) - analytic.avg_pf(n, m, xis[o], o)),
                )
                points += 1
    return CriterionResult(
        3,
        "averaged <P>, <PF> formulas vs exact Haar oracle",
        worst <= cfg.tol(1e-12),
        f"max deviation {worst:.2e} over {points} outcome checks",
        "<= 1e-12",
    )


def _mc_grid(cfg: VerifyConfig):
    if cfg.grid == "fine":
        mods = (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)
        phase_pairs = ((0.0, 0.0), (math.pi / 4, math.pi / 2), (math.pi / 2, math.pi / 4))
    else:
        mods = (0.1, 0.4, 0.7, 1.0)
        phase_pairs = ((math.pi / 4, math.pi / 2),)
    for a, b in itertools.product(mods, mods):
        for tn, tm in phase_pairs:
            yield _complex(a, tn), _complex(b, tm)


def monte_carlo_agreement(cfg: VerifyConfig) -> CriterionResult:
    samples = cfg.mc_samples(sampler.VERIFY_SAMPLES)
    checks = outliers = 0
    worst_z = 0.0
    for idx, (n, m) in enumerate(_mc_grid(cfg)):
        # zero correction phases keep xi nonzero for complex n, m
        params = multi.MultiParams([n], [m])
        res = sampler.mc_protocol_average(params, multi.all_acceptance(1), samples, cfg.seed + idx)
        xis = analytic.xi_values(n, m, params.phases[0])
        for (o,), p_est, pf_est in zip(res.outcomes, res.prob, res.pf):
            for est, target in ((p_est, analytic.avg_prob(n, m, o)), (pf_est, analytic.avg_pf(n, m, xis[o], o))):
                checks += 1
                diff = est.mean - target
                if not _within(diff, est.std_error, cfg):
                    outliers += 1
                if est.std_error > ZERO_VARIANCE_SLACK:
                    worst_z = max(worst_z, abs(diff) / est.std_error)
    allowed = math.floor(MC_OUTLIER_ALLOWANCE * checks)
    return CriterionResult(
        4,
        f"Monte-Carlo agreement ({cfg.grid} grid, {samples} samples)",
        outliers <= allowed,
        f"{outliers}/{checks} estimates outside 4 sigma (max |z|={worst_z:.2f} among nonzero-variance estimates)",
        f"<= {allowed} outliers (1% allowance)",
        _wide_ci(samples),
    )


def exchange_symmetry(cfg: VerifyConfig) -> CriterionResult:
    worst = 0.0
    mods = [k / 10 for k in range(11)]
    xi_sets = [(0.0,) * 4, (math.pi / 3,) * 4, (0.0, math.pi / 2, math.pi, 2.5), (1.0, -0.4, 3.0, 0.2)]
    for a, b in itertools.product(mods, mods):
        for xis in xi_sets:
            worst = max(worst, abs(analytic.c_pro_all_accept(a, b, xis) - analytic.c_pro_all_accept(b, a, xis)))
        for tn, tm in itertools.product(PHASE_GRID, PHASE_GRID):
            n, m = _complex(a, tn), _complex(b, tm)
            fwd = analytic.exact_average(multi.MultiParams.optimal([n], [m]), multi.all_acceptance(1)).c_pro
            bwd = analytic.exact_average(multi.MultiParams.optimal([m], [n]), multi.all_acceptance(1)).c_pro
            worst = max(worst, abs(fwd - bwd))
    samples = cfg.mc_samples(sampler.VERIFY_SAMPLES)
    mc_ok = True
    zs = []
    for idx, (a, b) in enumerate(((0.3, 0.7), (0.5, 1.0), (0.1, 0.9))):
        fwd = sampler.mc_protocol_average(
            multi.MultiParams.optimal([a], [b]), multi.all_acceptance(1), samples, cfg.seed + 500 + idx
        ).c_pro
        bwd = sampler.mc_protocol_average(
            multi.MultiParams.optimal([b], [a]), multi.all_acceptance(1), samples, cfg.seed + 600 + idx
        ).c_pro
        sigma = math.hypot(fwd.std_error, bwd.std_error)
        mc_ok &= _within(fwd.mean - bwd.mean, sigma, cfg)
        zs.append(abs(fwd.mean - bwd.mean) / sigma if sigma > 0 else 0.0)
    return CriterionResult(
        5,
        "exchange symmetry n <-> m",
        worst < cfg.tol(1e-14) and mc_ok,
        f"analytic max diff {worst:.2e}; MC |z| = {', '.join(f'{z:.2f}' for z in zs)}",
        "< 1e-14 analytic; < 4 sigma MC",
        _wide_ci(samples),
    )


def dephasing_recovery(cfg: VerifyConfig) -> CriterionResult:
    worst = 0.0
    inputs = _inputs(1, 20, cfg.seed, 106)
    for k in range(13):
        theta_n = k * math.pi / 6
        n = complex(math.cos(theta_n), math.sin(theta_n))
        phases = core.dephasing_correction(theta_n)
        for phi in inputs:
            for r in core.run_single(phi, n, 1.0, phases):
                worst = max(worst, abs(r.fidelity - 1))
    return CriterionResult(
        6,
        "dephased channel recovered by Bob's phases",
        worst <= cfg.tol(1e-12),
        f"max|F-1|={worst:.2e} over 13 dephasing angles x 20 inputs",
        "<= 1e-12",
    )


N_QUBIT_VALUES = (0.3, 0.5, 0.8, 1.0)


def n_qubit_efficiency(cfg: VerifyConfig) -> CriterionResult:
    worst_literal = worst_product = 0.0
    configs = 0
    for num in (2, 3):
        for values in itertools.product(N_QUBIT_VALUES, repeat=2 * num):
            params = multi.MultiParams.optimal(values[:num], values[num:])
            exact = analytic.exact_average(params, multi.all_acceptance(num)).c_pro
            chi = analytic.chi_values(params.n_list, params.m_list)
            worst_literal = max(worst_literal, abs(exact - analytic.c_pro_N(chi)))
            worst_product = max(worst_product, abs(exact - analytic.c_pro_N_product(chi)))
            configs += 1
    samples = cfg.mc_samples(sampler.SWEEP_SAMPLES)
    picker = np.random.Generator(sampler.RandomStream(cfg.seed, 107).generator())
    zs, mc_ok = [], True
    for num, count in ((2, 3), (3, 2)):
        for j in range(count):
            values = picker.choice(N_QUBIT_VALUES, size=2 * num)
            params = multi.MultiParams.optimal(values[:num], values[num:])
            est = sampler.mc_protocol_average(params, multi.all_acceptance(num), samples, cfg.seed + 700 + 10 * num + j)
            target = analytic.c_pro_N(analytic.chi_values(params.n_list, params.m_list))
            mc_ok &= _within(est.c_pro.mean - target, est.c_pro.std_error, cfg)
            zs.append(abs(est.c_pro.mean - target) / est.c_pro.std_error)
    return CriterionResult(
        7,
        "N-qubit channel efficiency (N=2,3)",
        max(worst_literal, worst_product) <= cfg.tol(1e-10) and mc_ok,
        f"{configs} configs: max|exact-literal|={worst_literal:.2e} max|exact-product|={worst_product:.2e}; "
        f"MC |z| = {', '.join(f'{z:.2f}' for z in zs)}",
        "<= 1e-10; MC < 4 sigma",
        _wide_ci(samples),
    )


def n_qubit_pqt(cfg: VerifyConfig) -> CriterionResult:
    worst_f = worst_p = 0.0
    inputs = _inputs(2, 5, cfg.seed, 108)
    accept = multi.pqt_acceptance(2)
    values = [k / 10 for k in range(1, 11)]
    for n1, n2 in itertools.product(values, values):
        params = multi.MultiParams([n1, n2], [n1, n2])
        target = analytic.c_pqt_N([n1, n2])
        exact = analytic.exact_average(params, accept)
        worst_f = max(worst_f, abs(exact.f_pro - 1))
        worst_p = max(worst_p, abs(exact.p_suc - target))
        for phi in inputs:
            for r in multi.run_multi(phi, params):
                if r.outcome in accept:
                    worst_f = max(worst_f, abs(r.fidelity - 1))
    return CriterionResult(
        8,
        "N-qubit PQT (N=2)",
        max(worst_f, worst_p) <= cfg.tol(1e-12),
        f"max|f_pro-1|={worst_f:.2e} max|p_suc-prod|={worst_p:.2e}",
        "<= 1e-12",
    )


def fig1_sweep(cfg: VerifyConfig) -> CriterionResult:
    rows, _ = sweep.sweep_rows(sweep.SweepSpec())
    csv_rows = sweep.parse_csv(sweep.render_csv(rows))
    tol = cfg.tol(1e-12)
    problems = []
    diag = [r for r in csv_rows if r["delta"] == 0.0]
    if not diag or any(abs(r["f_pqt"] - 1) > tol for r in diag):
        problems.append("(a) f_pqt != 1 on delta = 0")
    by_n: dict[float, list] = {}
    for r in csv_rows:
        by_n.setdefault(r["n"], []).append(r)
    for n, group in by_n.items():
        for side in (1, -1):
            branch = sorted((r for r in group if side * r["delta"] >= 0), key=lambda r: abs(r["delta"]))
            if any(b["f_pqt"] >= a["f_pqt"] for a, b in zip(branch, branch[1:])):
                problems.append(f"(b) f_pqt not strictly decreasing in |delta| at n={n}")
    corner = [r for r in csv_rows if r["n"] == 1.0 and r["delta"] == 0.0]
    if len(corner) != 1 or abs(corner[0]["p_suc"] - 0.5) > tol:
        problems.append("(c) p_suc(n=1, delta=0) != 0.5")
    worst_d = max(abs(r.c_pqt - r.f_pqt * r.p_suc) for r in rows)
    if worst_d > tol:
        problems.append("(d) c_pqt != f_pqt * p_suc")
    # the CSV itself only carries 6 decimals
    worst_csv = max(abs(r["c_pqt"] - r["f_pqt"] * r["p_suc"]) for r in csv_rows)
    if worst_csv > cfg.tol(2e-6):
        problems.append("(d) CSV columns inconsistent beyond rounding")
    return CriterionResult(
        9,
        "perturbed PQT sweep properties",
        not problems,
        "; ".join(problems) if problems else f"{len(rows)} rows ok; max|c-f*p|={worst_d:.1e} (csv {worst_csv:.1e})",
        "(a)-(d) hold",
    )


def optimizer(cfg: VerifyConfig) -> CriterionResult:
    worst_m = worst_xi = worst_c = 0.0
    for n in (0.2, 0.5, 0.9):
        res = opt.optimize_channel([n])
        worst_m = max(worst_m, abs(res.m_star[0] - 1))
        worst_xi = max(worst_xi, max(opt.circular_distance(x) for x in res.xi_star[0]))
        worst_c = max(worst_c, abs(res.c_channel - (2 / 3) * (1 + core.concurrence(n) / 2)))
    return CriterionResult(
        10,
        "channel-efficiency optimizer",
        worst_m <= cfg.tol(0.005) and worst_xi <= cfg.tol(0.005) and worst_c <= cfg.tol(1e-4),
        f"max|m*-1|={worst_m:.1e} max xi dist={worst_xi:.1e} max|C-C_exp|={worst_c:.1e}",
        "0.005, 0.005, 1e-4",
    )


def haar_moments(cfg: VerifyConfig) -> CriterionResult:
    samples = cfg.mc_samples(sampler.VERIFY_SAMPLES)
    checks = failures = 0
    worst_z = 0.0
    for num in (1, 2, 3):
        table = analytic.MomentTable(num)
        second, fourth = sampler.empirical_moments(num, samples, cfg.seed + num)
        for i, est in enumerate(second):
            pairs = [(est, table.second_moment)]
            pairs += [(fourth[i][j], table.fourth_moment(i, j)) for j in range(table.dimension)]
            for e, target in pairs:
                checks += 1
                diff = e.mean - target
                failures += not _within(diff, e.std_error, cfg)
                if e.std_error > ZERO_VARIANCE_SLACK:
                    worst_z = max(worst_z, abs(diff) / e.std_error)
    return CriterionResult(
        11,
        "Haar moment sanity (N=1..3)",
        failures == 0,
        f"{failures}/{checks} moments outside 4 sigma (max |z|={worst_z:.2f})",
        "all within 4 sigma",
        _wide_ci(samples),
    )


def _capture(argv: list[str]) -> tuple[int, str]:
    from gtp import cli

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        code = cli.main(argv)
    return code, buf.getvalue()


def reproducibility(cfg: VerifyConfig) -> CriterionResult:
    seed = str(cfg.seed)
    invocations = {
        "verify": ["--seed", seed, "--samples", "2000", "verify", "--only", "1,4,11"],
        "run": ["--seed", seed, "--samples", "2000", "run", "--n", "0.5", "0.7", "--m", "0.5", "0.7",
                "--acceptance", "pqt", "--input", "haar"],
        "sweep": ["sweep"],
    }
    mismatched = []
    for name, argv in invocations.items():
        first, second = _capture(argv), _capture(argv)
        if first != second or not first[1]:
            mismatched.append(name)
    return CriterionResult(
        12,
        "byte-identical reruns (verify, run, sweep)",
        not mismatched and cfg.tolerance_scale >= 0,
        "mismatch in " + ", ".join(mismatched) if mismatched else "all outputs identical",
        "identical",
    )


CRITERIA = {
    1: standard_protocol,
    2: pqt_exactness,
    3: averaged_formulas,
    4: monte_carlo_agreement,
    5: exchange_symmetry,
    6: dephasing_recovery,
    7: n_qubit_efficiency,
    8: n_qubit_pqt,
    9: fig1_sweep,
    10: optimizer,
    11: haar_moments,
    12: reproducibility,
}

# wall-clock budgets in seconds
RUNTIME_BUDGETS = {1: 1, 2: 5, 3: 10, 4: 60, 5: 60, 6: 2, 7: 120, 8: 10, 9: 5, 10: 30, 11: 30, 12: 60}


def run_criterion(number: int, cfg: VerifyConfig) -> CriterionResult:
    start = time.perf_counter()
    result = CRITERIA[number](cfg)
    result.elapsed = time.perf_counter() - start
    return result


def run_all(cfg: VerifyConfig, only=None) -> list[CriterionResult]:
    numbers = sorted(only) if only else sorted(CRITERIA)
    return [run_criterion(k, cfg) for k in numbers]
