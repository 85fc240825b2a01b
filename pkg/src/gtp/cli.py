"""Command-line front end: ``gtp verify | run | sweep | optimize``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from gtp import analytic, core, linalg, multi, sampler, sweep, verification
from gtp import optimize as opt
from gtp.core import OUTCOMES


class ConfigError(ValueError):
    pass


def default_seed() -> int:
    value = os.environ.get("GTP_SEED")
    if value is None:
        return sampler.DEFAULT_SEED
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"GTP_SEED must be an integer, got {value!r}")


# -- parameter parsing --------------------------------------------------------


def parse_param(value) -> complex:
    """A bare real, an [abs, phase] pair, or the flag form 'abs:phase'."""
    if isinstance(value, str):
        parts = value.split(":")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"cannot parse parameter {value!r}")
        value = nums[0] if len(nums) == 1 else nums
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex parameters are [abs, phase] pairs, got {value!r}")
        mod, phase = map(float, value)
        if mod < 0:
            raise ConfigError("parameter modulus must be non-negative")
        return mod * complex(math.cos(phase), math.sin(phase))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"cannot parse parameter {value!r}")
    return complex(float(value))


def parse_amplitude(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError("complex amplitudes are [re, im] pairs")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


def parse_input(spec, num: int):
    """'haar', 'ket:<bits>' or an amplitude list (JSON text or parsed)."""
    if spec == "haar":
        return "haar"
    if isinstance(spec, str) and spec.startswith("ket:"):
        bits = spec[4:]
        if len(bits) != num:
            raise ConfigError(f"ket {bits!r} does not have {num} qubits")
        return linalg.ket(bits)
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError:
            raise ConfigError(f"cannot parse input {spec!r}")
    if not isinstance(spec, list) or len(spec) != 2**num:
        raise ConfigError(f"input amplitude list must have {2**num} entries")
    return linalg.normalize([parse_amplitude(a) for a in spec])


def parse_phases(spec, n_list, m_list) -> tuple:
    if spec in (None, "optimal"):
        return tuple(core.optimal_phases(n, m) for n, m in zip(n_list, m_list))
    if spec == "zero":
        return tuple(core.zero_phases() for _ in n_list)
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError:
            raise ConfigError(f"cannot parse phases {spec!r}")
    if isinstance(spec, dict):
        spec = [spec]
    if not isinstance(spec, list) or len(spec) != len(n_list):
        raise ConfigError("phases need one table per qubit")
    tables = []
    for table in spec:
        if isinstance(table, list):
            if len(table) != 4:
                raise ConfigError("a phase list needs four entries (Phi+, Phi-, Psi+, Psi-)")
            table = dict(zip(OUTCOMES, table))
        tables.append(core.coerce_phases(table))
    return tuple(tables)


def parse_acceptance(spec, num: int) -> frozenset:
    if spec in (None, "all"):
        return multi.all_acceptance(num)
    if spec == "pqt":
        return multi.pqt_acceptance(num)
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError:
            spec = spec.split(";")
    if not isinstance(spec, list) or not spec:
        raise ConfigError("acceptance must be 'all', 'pqt' or a non-empty outcome list")
    return multi.normalize_acceptance(spec, num)


def load_run_config(args) -> dict:
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        if not isinstance(config, dict):
            raise ConfigError("config file must hold a JSON object")
    # flags win over the config file
    for key in ("n", "m", "phases", "acceptance", "input"):
        value = getattr(args, key)
        if value is not None:
            config[key] = value
    if args.samples is not None:
        config["samples"] = args.samples
    if args.seed is not None:
        config["seed"] = args.seed
    if "n" not in config:
        raise ConfigError("run needs channel parameters (--n)")
    return config


# -- output helpers -----------------------------------------------------------


def _param_pair(z: complex) -> list:
    mod, phase = core.polar(z)
    return [mod, phase]


def _phase_table(table) -> dict:
    return {o.value: table[o] for o in OUTCOMES}


def emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# -- commands -----------------------------------------------------------------


def cmd_run(args) -> int:
    config = load_run_config(args)
    n_raw = config["n"] if isinstance(config["n"], list) else [config["n"]]
    m_raw = config.get("m", [1.0] * len(n_raw))
    m_raw = m_raw if isinstance(m_raw, list) else [m_raw]
    n_list = [parse_param(v) for v in n_raw]
    m_list = [parse_param(v) for v in m_raw]
    if len(n_list) != len(m_list):
        raise ConfigError("n and m need the same number of entries")
    phases = parse_phases(config.get("phases"), n_list, m_list)
    params = multi.MultiParams(tuple(n_list), tuple(m_list), phases)
    num = params.num
    acceptance = parse_acceptance(config.get("acceptance"), num)
    state = parse_input(config.get("input", "haar"), num)
    samples = int(config.get("samples", sampler.VERIFY_SAMPLES))
    seed = int(config.get("seed", default_seed()))

    header = {
        "n": [_param_pair(z) for z in params.n_list],
        "m": [_param_pair(z) for z in params.m_list],
        "phases": [_phase_table(t) for t in params.phases],
        "acceptance": sorted(multi.outcome_label(o) for o in acceptance),
    }
    if isinstance(state, str):
        header["input"] = "haar"
        if args.exact:
            header["mode"] = "exact"
            body = _exact_body(params, acceptance)
        else:
            header.update(mode="monte_carlo", samples=samples, seed=seed)
            body = _mc_body(params, acceptance, samples, seed)
    else:
        header["input"] = [[a.real, a.imag] for a in state]
        header["mode"] = "state"
        records = multi.run_multi(state, params)
        rep = multi.joint_report(records, acceptance)
        body = {
            "per_outcome": [
                {"outcome": label, "probability": p, "fidelity": f} for label, p, f in rep.per_outcome
            ],
            "p_suc": rep.p_suc,
            "c_pro": rep.c_pro,
            "f_pro": rep.f_pro,
            "degenerate": rep.degenerate,
        }
    emit(to_json({"params": header, **body}), args.out)
    return 0


def _exact_estimate(value) -> dict | None:
    if value is None:
        return None
    return sampler.Estimate(float(value), 0.0, None).to_dict()


def _exact_body(params, acceptance) -> dict:
    ex = analytic.exact_average(params, acceptance)
    per = []
    for o, p, pf in zip(ex.outcomes, ex.probabilities, ex.pf):
        per.append({
            "outcome": multi.outcome_label(o),
            "probability": _exact_estimate(p),
            "pf": _exact_estimate(pf),
            "fidelity": _exact_estimate(pf / p) if p > core.DEGENERATE_PSUC else None,
        })
    return {
        "per_outcome": per,
        "p_suc": _exact_estimate(ex.p_suc),
        "c_pro": _exact_estimate(ex.c_pro),
        "f_pro": _exact_estimate(ex.f_pro),
        "degenerate": ex.degenerate,
    }


def _mc_body(params, acceptance, samples, seed) -> dict:
    res = sampler.mc_protocol_average(params, acceptance, samples, seed)
    per = []
    for o, p, pf in zip(res.outcomes, res.prob, res.pf):
        fid = None
        if p.mean > core.DEGENERATE_PSUC:
            fid = sampler.Estimate(pf.mean / p.mean, pf.std_error / p.mean, p.samples).to_dict()
        per.append({"outcome": multi.outcome_label(o), "probability": p.to_dict(), "pf": pf.to_dict(),
                    "fidelity": fid})
    return {
        "per_outcome": per,
        "p_suc": res.p_suc.to_dict(),
        "c_pro": res.c_pro.to_dict(),
        "f_pro": res.f_pro.to_dict() if res.f_pro else None,
        "degenerate": res.degenerate,
    }


def _parse_grid(text: str | None, default: tuple) -> tuple:
    if text is None:
        return default
    try:
        start, stop, step = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"grid must be 'start,stop,step', got {text!r}")
    return (start, stop, step)


def cmd_sweep(args) -> int:
    spec = sweep.SweepSpec(
        n_grid=_parse_grid(args.n_grid, sweep.SweepSpec.n_grid),
        delta_grid=_parse_grid(args.delta_grid, sweep.SweepSpec.delta_grid),
    )
    try:
        rows, skipped = sweep.sweep_rows(spec)
    except ValueError as exc:
        raise ConfigError(str(exc))
    if skipped:
        shown = ", ".join(f"(n={n:g}, delta={d:g})" for n, d in skipped[:5])
        more = f" and {len(skipped) - 5} more" if len(skipped) > 5 else ""
        print(f"warning: skipped {len(skipped)} grid points with m outside (0, 1]: {shown}{more}",
              file=sys.stderr)
    emit(sweep.render_csv(rows), args.out)
    return 0


def cmd_optimize(args) -> int:
    n_list = list(args.n)
    for extra in (args.n2, args.n3):
        if extra is not None:
            n_list.append(extra)
    if len(n_list) > multi.MAX_QUBITS:
        raise ConfigError(f"at most {multi.MAX_QUBITS} channels")
    result = opt.optimize_channel(n_list)
    payload = result.to_dict()
    payload["expected_c_channel"] = opt.expected_channel_efficiency(n_list)
    emit(to_json(payload), args.out)
    return 0


def cmd_verify(args) -> int:
    only = None
    if args.only:
        try:
            only = [int(v) for v in args.only.split(",")]
        except ValueError:
            raise ConfigError(f"--only takes comma-separated criterion numbers, got {args.only!r}")
        unknown = set(only) - set(verification.CRITERIA)
        if unknown:
            raise ConfigError(f"unknown criteria: {sorted(unknown)}")
    seed = args.seed if args.seed is not None else default_seed()
    cfg = verification.VerifyConfig(
        samples=args.samples, seed=seed, grid=args.grid, tolerance_scale=args.tolerance_scale
    )
    if cfg.samples is not None and cfg.samples < 100:
        raise ConfigError("--samples must be at least 100")
    results = []
    for number in sorted(only or verification.CRITERIA):
        result = verification.run_criterion(number, cfg)
        results.append(result)
        if not args.json and not args.out:
            print(result.line(), flush=True)
    passed = all(r.passed for r in results)
    if args.json:
        emit(to_json({"passed": passed, "criteria": [r.to_dict() for r in results]}), args.out)
    else:
        summary = f"{sum(r.passed for r in results)}/{len(results)} criteria passed\n"
        if args.out:
            emit("\n".join(r.line() for r in results) + "\n" + summary, args.out)
        else:
            sys.stdout.write(summary)
    return 0 if passed else 1


# -- parser -------------------------------------------------------------------


def _add_globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="RNG seed (default: $GTP_SEED or built-in)")
    parser.add_argument("--samples", type=int, default=default, help="Monte-Carlo sample count")
    parser.add_argument("--exact", action="store_true", default=default if suppress else False,
                        help="average with the exact transfer-operator oracle instead of sampling")
    parser.add_argument("--json", action="store_true", default=default if suppress else False,
                        help="machine-readable output where applicable")
    parser.add_argument("--out", default=default, help="write output to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtp", description="Generalized teleportation simulator")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the acceptance criteria")
    _add_globals(p, suppress=True)
    p.add_argument("--grid", choices=("coarse", "fine"), default="coarse")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--tolerance-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="run one protocol configuration and print a JSON report")
    _add_globals(p, suppress=True)
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--n", nargs="+", help="channel parameters: real or abs:phase")
    p.add_argument("--m", nargs="+", help="basis parameters: real or abs:phase")
    p.add_argument("--phases", help="'optimal' (default), 'zero' or JSON tables per qubit")
    p.add_argument("--acceptance", help="'all' (default), 'pqt', JSON list or ';'-separated outcomes")
    p.add_argument("--input", help="'haar' (default), 'ket:<bits>' or JSON amplitude list")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="perturbed PQT sweep as CSV")
    _add_globals(p, suppress=True)
    p.add_argument("--n-grid", help="start,stop,step (default 0.05,1.0,0.05)")
    p.add_argument("--delta-grid", help="start,stop,step for delta = n - m (default -0.3,0.3,0.025); use --delta-grid=... for a negative start")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="maximize the all-accept efficiency over m and xi")
    _add_globals(p, suppress=True)
    p.add_argument("--n", type=float, nargs="+", required=True, help="channel parameter(s)")
    p.add_argument("--n2", type=float, help="second channel")
    p.add_argument("--n3", type=float, help="third channel")
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, core.ParameterError, ValueError) as exc:
        print(f"gtp {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
