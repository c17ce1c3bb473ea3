"""Command-line driver for the verification suites.

Every suite reads a JSON config (unknown keys rejected), takes all
randomness from one master seed, and emits an envelope report as CSV or
JSON.  Exit codes: 0 all rows pass, 1 a bound was violated, 2 invalid
config, 3 infeasible problem size.  ``--jobs`` is a parallelism hint
only; output bytes depend on config and seed, never on scheduling.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import characterization as char
from . import charfun, distributions, quadform
from . import vinogradov as vino
from .polynomials import VinogradovPolynomial
from .report import EnvelopeReport
from .seeding import rng_for

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

# rough throughputs used by --dry-run; order-of-magnitude on purpose
_OPS_PER_SEC = 2.0e8
_MC_SAMPLES_PER_SEC = 2.0e5


class ConfigError(ValueError):
    pass


def _merge(defaults: dict, config: dict, suite: str) -> dict:
    unknown = set(config) - set(defaults)
    if unknown:
        raise ConfigError(
            f"unknown config keys for suite {suite!r}: {sorted(unknown)}; "
            f"known keys: {sorted(defaults)}"
        )
    out = dict(defaults)
    out.update(config)
    return out


def _pmap(fn, items, jobs: int):
    """Ordered parallel map; results come back in grid order so the
    emitted report is independent of the worker count."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _make_dist(spec) -> distributions.Distribution:
    if isinstance(spec, str):
        spec = {"type": spec}
    spec = dict(spec)
    kind = spec.pop("type", None)
    try:
        if kind == "std_normal":
            dist = distributions.std_normal()
        elif kind == "normal":
            dist = distributions.normal(spec.pop("mu", 0.0), spec.pop("sigma", 1.0))
        elif kind == "uniform":
            dist = distributions.uniform_interval(spec.pop("lo"), spec.pop("hi"))
        elif kind == "lattice_uniform":
            dist = distributions.lattice_uniform(spec.pop("P"))
        elif kind == "cantor":
            dist = distributions.cantor(spec.pop("k", 1))
        elif kind == "symmetrized_exponential":
            dist = distributions.symmetrized_exponential(spec.pop("scale", 1.0))
        elif kind == "counterexample":
            c = spec.pop("c")
            base = _make_dist(spec.pop("base", "std_normal"))
            dist = char.counterexample_sampler(base, c)
        else:
            raise ConfigError(f"unknown distribution type {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"distribution {kind!r} missing parameter {exc}") from None
    if spec:
        raise ConfigError(f"unused distribution keys: {sorted(spec)}")
    return dist


def _qf_spec(obj) -> quadform.HilbertGaussianSpec:
    try:
        return quadform.HilbertGaussianSpec.from_json(obj)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad quadratic-form spec: {exc}") from None


# ---------------------------------------------------------------------------
# Suites.  Each entry: (defaults, run(cfg, seed, jobs) -> EnvelopeReport,
# dry_run(cfg) -> dict)
# ---------------------------------------------------------------------------


def _suite_cantor_scan(cfg, seed, jobs):
    return charfun.cantor_cramer_scan(
        t_min=cfg["t_min"], t_max=cfg["t_max"], step=cfg["step"], tol=cfg["tol"]
    )


def _dry_cantor(cfg):
    n = int((cfg["t_max"] - cfg["t_min"]) / cfg["step"])
    depth = charfun.cantor_truncation_depth(cfg["t_max"], cfg["tol"])
    ops = n * depth
    return {"grid_points": n, "truncation_depth": depth, "est_seconds": ops / _OPS_PER_SEC}


def _suite_weyl(cfg, seed, jobs):
    P, m = int(cfg["P"]), int(cfg["m"])
    if cfg["coeffs"] is not None:
        alphas = [np.asarray(c, dtype=float) for c in cfg["coeffs"]]
    else:
        rng = rng_for(seed, "weyl-suite")
        alphas = list(rng.random((int(cfg["n_alpha"]), m)))
    vals = _pmap(
        lambda a: abs(vino.weyl_sum(P, VinogradovPolynomial(m, tuple(a)))), alphas, jobs
    )
    report = EnvelopeReport()
    for i, v in enumerate(vals):
        report.add(i, v / P, upper=1.0)
    report.meta.update({"P": P, "m": m})
    return report


def _dry_weyl(cfg):
    n = len(cfg["coeffs"]) if cfg["coeffs"] is not None else int(cfg["n_alpha"])
    ops = n * int(cfg["P"])
    return {"evaluations": n, "est_seconds": ops / _OPS_PER_SEC}


def _suite_jk_count(cfg, seed, jobs):
    P, m, k = int(cfg["P"]), int(cfg["m"]), int(cfg["k"])
    method = cfg["method"]
    if method == "quadrature":
        value = vino.jk_unit_cell_quadrature(P, m, k)
    else:
        value = vino.jk_count(P, m, k, method=method).count
    print(value)
    report = EnvelopeReport()
    report.add(P, float(value), lower=float(P) ** k, upper=float(P) ** (2 * k))
    report.meta.update({"m": m, "k": k, "method": method, "count": value})
    return report


def _dry_jk(cfg):
    P, m, k = int(cfg["P"]), int(cfg["m"]), int(cfg["k"])
    method = cfg["method"]
    if method == "enumerate":
        ops, mem = float(P) ** (2 * k), float(P) ** k * k * 8
        feasible = ops <= vino.meanvalue.ENUMERATE_LIMIT
    elif method == "quadrature":
        ops = float(np.prod([k * P**j + 1 for j in range(1, m + 1)])) * k
        mem = ops * 16
        feasible = ops <= 5e8
    else:
        ops, mem = float(P) ** k * (k + math.log2(max(P, 2)) * k), float(P) ** k * 16
        feasible = float(P) ** k <= vino.meanvalue.HISTOGRAM_LIMIT
    return {
        "method": method,
        "est_ops": ops,
        "est_bytes": mem,
        "est_seconds": ops / _OPS_PER_SEC,
        "feasible": feasible,
    }


def _suite_ik(cfg, seed, jobs):
    P, m, k = float(cfg["P"]), int(cfg["m"]), int(cfg["k"])
    n_mc = int(cfg["n_mc"])
    report = EnvelopeReport()
    if cfg["method"] == "importance":
        value, se = vino.ik_uniform_importance(P, m, k, n_mc, seed)
        report.add(P, value)
        report.meta.update({"std_error": se})
    else:
        dist = _make_dist(cfg["dist"])
        est = vino.ik_estimate(dist, P, m, k, n_mc, seed, n_inner=int(cfg["n_inner"]))
        report.add(P, est.value)
        report.meta.update({"std_error": est.std_error, "note": est.note})
    report.meta.update({"m": m, "k": k, "n_mc": n_mc, "method": cfg["method"]})
    return report


def _dry_mc(cfg):
    n = int(cfg["n_mc"])
    return {"n_mc": n, "est_seconds": n / _MC_SAMPLES_PER_SEC}


def _suite_vinogradov_verify(cfg, seed, jobs):
    m, tau = int(cfg["m"]), int(cfg["tau"])
    P_grid = range(int(cfg["P_min"]), int(cfg["P_max"]) + 1)
    report = vino.verify_theorem7(P_grid, m, tau)
    if cfg["remark3_P"]:
        for P in cfg["remark3_P"]:
            for k in range(1, int(cfg["remark3_k_max"]) + 1):
                sub = vino.remark3_check(int(P), m, k)
                report.rows.extend(sub.rows)
    if cfg["theorem9"]:
        t9 = dict(cfg["theorem9"])
        sub = vino.verify_theorem9(
            float(t9.pop("P", 32)),
            m,
            int(t9.pop("b", 2)),
            n_mc=int(t9.pop("n_mc", 20000)),
            seed=seed,
        )
        if t9:
            raise ConfigError(f"unknown theorem9 keys: {sorted(t9)}")
        report.rows.extend(sub.rows)
        report.meta["theorem9"] = sub.meta
    return report


def _dry_vinogradov(cfg):
    m, tau = int(cfg["m"]), int(cfg["tau"])
    k = tau * m * (m + 1)  # J_{k} order used by the bound check
    pmax = int(cfg["P_max"])
    ops = sum(float(P) ** min(k, 2 * k) for P in range(int(cfg["P_min"]), pmax + 1))
    return {"k": k, "est_ops": ops, "est_seconds": ops / _OPS_PER_SEC}


def _suite_qf_density(cfg, seed, jobs):
    spec = _qf_spec(cfg["spec"])
    u_grid = np.asarray(cfg["u_grid"], dtype=float)

    def one(u):
        p, perr = quadform.density_p(spec, u, "cf_inversion")
        if cfg["cross_check_mc"]:
            pm, pmse = quadform.density_p(
                spec, u, "mc_kde", seed=seed, n_samples=int(cfg["n_samples"])
            )
            return p, perr, pm, pmse
        return p, perr, None, None

    rows = _pmap(one, u_grid, jobs)
    report = EnvelopeReport()
    for u, (p, perr, pm, pmse) in zip(u_grid, rows):
        if pm is None:
            report.add(u, p)
        else:
            report.add(u, p, passed=abs(p - pm) <= 3.0 * (perr + pmse))
    report.meta["method"] = "cf_inversion"
    return report


def _dry_qf_density(cfg):
    n = len(cfg["u_grid"])
    mc = int(cfg["n_samples"]) * n if cfg["cross_check_mc"] else 0
    return {"grid_points": n, "est_seconds": 0.1 * n + mc / _MC_SAMPLES_PER_SEC}


def _suite_qf_sandwich(cfg, seed, jobs):
    spec = _qf_spec(cfg["spec"])
    tf = quadform.tilt_weight(spec)
    if cfg["u_grid"] is not None:
        u_grid = np.asarray(cfg["u_grid"], dtype=float)
    else:
        thr = tf.u_star if spec.k == 3 else tf.u_double_star
        u_grid = np.linspace(
            cfg["u_min_factor"] * thr, cfg["u_max_factor"] * thr, int(cfg["n_points"])
        )
    return quadform.verify_theorem15(
        spec, u_grid, seed=seed, mc_samples=int(cfg["mc_samples"]), slack=cfg["slack"]
    )


def _dry_qf_sandwich(cfg):
    n = int(cfg["n_points"]) if cfg["u_grid"] is None else len(cfg["u_grid"])
    mc = int(cfg["mc_samples"]) * n
    return {"grid_points": n, "est_seconds": 0.2 * n + mc / _MC_SAMPLES_PER_SEC}


def _suite_qf_tail(cfg, seed, jobs):
    spec = _qf_spec(cfg["spec"])
    if cfg["r_grid"] is not None:
        r_grid = np.asarray(cfg["r_grid"], dtype=float)
    else:
        tf = quadform.tilt_weight(spec)
        abar = math.sqrt(spec.abar_sq(spec.k))
        r_min = spec.sigma1_sq / abar + 2.0 * abar + math.sqrt(tf.u_double_star)
        r_grid = np.linspace(1.05 * r_min, 2.0 * r_min, int(cfg["n_points"]))
    return quadform.verify_theorem16(spec, r_grid, seed=seed)


def _dry_qf_tail(cfg):
    n = int(cfg["n_points"]) if cfg["r_grid"] is None else len(cfg["r_grid"])
    return {"grid_points": n, "est_seconds": 0.2 * n}


def _suite_cp_test(cfg, seed, jobs):
    Q = np.asarray(cfg["matrix"], dtype=float)
    t_grid = np.linspace(cfg["t_min"], cfg["t_max"], int(cfg["n_t"]))
    return char.cp_distance(
        Q,
        _make_dist(cfg["dist1"]),
        _make_dist(cfg["dist2"]),
        t_grid,
        n_samples=int(cfg["n_samples"]),
        seed=seed,
    )


def _suite_stability(cfg, seed, jobs):
    Q = np.asarray(cfg["matrix"], dtype=float)
    target = _make_dist(cfg["target"])
    fam = dict(cfg["family"])
    kind = fam.pop("type", None)
    if kind == "normal_var":
        family = lambda N: distributions.normal(0.0, math.sqrt(1.0 + 1.0 / N))
    elif kind == "counterexample":
        base = _make_dist(fam.pop("base", "std_normal"))
        family = lambda N: char.counterexample_sampler(base, 1.0 / N)
    else:
        raise ConfigError(f"unknown family type {kind!r}")
    if fam:
        raise ConfigError(f"unknown family keys: {sorted(fam)}")
    return char.stability_experiment(
        Q,
        family,
        target,
        cfg["N_grid"],
        metric=cfg["metric"],
        n_samples=int(cfg["n_samples"]),
        seed=seed,
    )


def _dry_cp(cfg):
    n = int(cfg["n_samples"])
    return {"n_samples": n, "est_seconds": 2 * n / _MC_SAMPLES_PER_SEC}


def _dry_stability(cfg):
    n = int(cfg["n_samples"]) * len(cfg["N_grid"])
    return {"total_samples": n, "est_seconds": 4 * n / _MC_SAMPLES_PER_SEC}


_DEFAULT_QF_SPEC = {
    "k": 4,
    "head_sigma_sq": 1.0,
    "tail_sigma_sq": [0.25],
    "geo_ratio": 0.5,
}

SUITES = {
    "cantor-scan": (
        {"t_min": 8.5, "t_max": 2000.0, "step": 0.01, "tol": 1e-10},
        _suite_cantor_scan,
        _dry_cantor,
    ),
    "weyl": (
        {"P": 100, "m": 3, "n_alpha": 50, "coeffs": None},
        _suite_weyl,
        _dry_weyl,
    ),
    "jk-count": (
        {"P": 3, "m": 3, "k": 2, "method": "signature_histogram"},
        _suite_jk_count,
        _dry_jk,
    ),
    "ik": (
        {
            "P": 32.0,
            "m": 3,
            "k": 6,
            "n_mc": 20000,
            "method": "importance",
            "dist": "std_normal",
            "n_inner": 20000,
        },
        _suite_ik,
        _dry_mc,
    ),
    "vinogradov-verify": (
        {
            "m": 3,
            "tau": 1,
            "P_min": 2,
            "P_max": 20,
            "remark3_P": [2, 3, 4],
            "remark3_k_max": 2,
            "theorem9": {"P": 32, "b": 2, "n_mc": 20000},
        },
        _suite_vinogradov_verify,
        _dry_vinogradov,
    ),
    "qf-density": (
        {
            "spec": _DEFAULT_QF_SPEC,
            "u_grid": [2.0, 5.0, 10.0, 20.0],
            "cross_check_mc": False,
            "n_samples": 200000,
        },
        _suite_qf_density,
        _dry_qf_density,
    ),
    "qf-sandwich": (
        {
            "spec": _DEFAULT_QF_SPEC,
            "u_grid": None,
            "u_min_factor": 1.0,
            "u_max_factor": 5.0,
            "n_points": 9,
            "mc_samples": 0,
            "slack": 0.05,
        },
        _suite_qf_sandwich,
        _dry_qf_sandwich,
    ),
    "qf-tail": (
        {
            "spec": {
                "k": 4,
                "head_sigma_sq": 1.0,
                "head_shift": [1.0, 0.5, 0.5, 0.5],
                "tail_sigma_sq": [0.25],
                "tail_shift": [0.2],
                "geo_ratio": 0.5,
            },
            "r_grid": None,
            "n_points": 8,
        },
        _suite_qf_tail,
        _dry_qf_tail,
    ),
    "cp-test": (
        {
            "matrix": [[1.0, 0.0], [0.0, -1.0]],
            "dist1": "std_normal",
            "dist2": {"type": "counterexample", "c": 1.0},
            "t_min": 0.05,
            "t_max": 2.0,
            "n_t": 20,
            "n_samples": 100000,
        },
        _suite_cp_test,
        _dry_cp,
    ),
    "stability": (
        {
            "matrix": [[0.0, 0.5, 0.0], [0.5, 0.0, -0.5], [0.0, -0.5, 0.0]],
            "target": "std_normal",
            "family": {"type": "normal_var"},
            "N_grid": [1, 2, 4, 8, 16, 32, 64],
            "metric": "ks",
            "n_samples": 50000,
        },
        _suite_stability,
        _dry_stability,
    ),
}


def build_parser() -> argparse.ArgumentParser:
    epilog_lines = ["suite defaults (override via --config JSON):"]
    for name, (defaults, _, _) in SUITES.items():
        epilog_lines.append(f"  {name}: {json.dumps(defaults)}")
    parser = argparse.ArgumentParser(
        prog="polyrand",
        description=__doc__,
        epilog="\n".join(epilog_lines),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--suite", required=True, choices=sorted(SUITES))
    parser.add_argument("--config", help="JSON config file overriding suite defaults")
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--out", help="report file path (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--jobs", type=int, default=1, help="parallelism hint")
    parser.add_argument(
        "--dry-run",
        action="store_true",
        help="print a cost estimate without running the kernel",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    defaults, run, dry = SUITES[args.suite]
    try:
        config = {}
        if args.config:
            with open(args.config) as fh:
                config = json.load(fh)
            if not isinstance(config, dict):
                raise ConfigError("config file must hold a JSON object")
        cfg = _merge(defaults, config, args.suite)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        print(json.dumps({"suite": args.suite, **dry(cfg)}, indent=2, default=float))
        return EXIT_PASS
    try:
        report = run(cfg, args.seed, max(args.jobs, 1))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except vino.InfeasibleSize as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        print(json.dumps({"suite": args.suite, **dry(cfg)}, indent=2, default=float))
        return EXIT_INFEASIBLE
    text = report.to_csv() if args.format == "csv" else report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS if report.all_pass else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
