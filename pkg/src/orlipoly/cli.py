"""Batch experiment driver.

Subcommands: solve, extend, local-converge, verify-core, continuity,
list-functions.  Each run reads one INI config, writes ``summary.json``
plus CSV traces into the output directory, and exits 0 only when every
declared check passed.  Exit codes: 0 all checks pass, 1 a check
failed, 2 config error, 3 numeric/solver failure.  Failures also leave
an ``error.json`` record and print the same record to stderr.

Reproducibility contract: identical config and seed produce
byte-identical CSV files.  Floats are written with their shortest
round-trip decimal representation; JSON keys are sorted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import (
    build_domain,
    build_function,
    build_orlicz,
    load_config,
)
from .domains import SampledFunction
from .errors import ConfigError, DomainError, OrlipolyError
from .extension import (
    continuity_probe,
    default_levels,
    extend,
    membership_report,
)
from .generators import estimate_delta2, ratio_bounds, verify_structure
from .local_fit import (
    LocalProblem,
    convergence_experiment,
    estimate_local_constants,
    local_sup_bound,
    sandwich_records,
    smoothness_decay_ok,
)
from .polynomials import Polynomial, multi_indices
from .registry import list_functions, make_function
from .solver import ApproxProblem, minimizer_mass_bound, solve

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

RANDOMIZED = {"solve", "extend", "local_converge", "continuity"}


# -- serialization helpers -------------------------------------------------


def _alpha_key(alpha):
    return ",".join(str(int(a)) for a in alpha)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(val) for k, val in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")


def _check(value, bound, ok=None):
    if ok is None:
        ok = value <= bound
    return {"value": float(value), "bound": float(bound), "ok": bool(ok)}


def _coeff_map(P):
    return {
        _alpha_key(a): float(c) for a, c in zip(P.alphas, np.asarray(P.coeffs))
    }


# -- experiment handlers ---------------------------------------------------


def _sample(domain, tf, opts):
    use_avg = bool(opts.get("cell_average", False))
    if use_avg and tf.cell_average is None:
        raise ConfigError(
            f"{tf.name} has no exact cell averages", field="opts.cell_average"
        )
    return SampledFunction.from_callable(
        domain,
        tf.fn,
        name=tf.label(),
        cell_average=tf.cell_average if use_avg else None,
    )


def _run_solve(cfg, out, seed, resolution):
    F = build_orlicz(cfg.orlicz)
    dom = build_domain(cfg.domain, resolution)
    tf = build_function(cfg.function)
    if tf.dim != dom.dim:
        raise ConfigError(
            f"function {tf.name} is {tf.dim}-D but the domain is {dom.dim}-D",
            field="function.name",
        )
    f = _sample(dom, tf, cfg.opts)
    prob = ApproxProblem(F, f, cfg.degree)
    res = solve(
        prob,
        tol=float(cfg.opts.get("tol", 1e-4)),
        max_iter=int(cfg.opts.get("max_iter", 150)),
        seed=seed,
    )
    mass = minimizer_mass_bound(prob, res.polynomial)
    checks = {
        "characterization_residual": _check(
            res.residual_max, res.tol_effective, res.converged
        ),
        "solution_mass_bound": _check(mass.lhs, mass.rhs, mass.ok),
    }
    summary = {
        "experiment": "solve",
        "function": tf.label(),
        "dim": dom.dim,
        "degree": cfg.degree,
        "center": list(res.polynomial.center),
        "coefficients": _coeff_map(res.polynomial),
        "objective": res.objective,
        "residual_max": res.residual_max,
        "iterations": res.iterations,
        "seed": seed,
        "checks": checks,
    }
    write_csv(
        out / "trace.csv",
        ["iteration", "objective"],
        list(enumerate(res.trace)),
    )
    return summary, all(c["ok"] for c in checks.values())


def _run_extend(cfg, out, seed, resolution):
    F = build_orlicz(cfg.orlicz)
    dom = build_domain(cfg.domain, resolution)
    tf = build_function(cfg.function)
    if tf.dim != dom.dim:
        raise ConfigError(
            f"function {tf.name} is {tf.dim}-D but the domain is {dom.dim}-D",
            field="function.name",
        )
    f = _sample(dom, tf, cfg.opts)
    levels = cfg.opts.get("levels")
    run = extend(
        F,
        f,
        cfg.degree,
        levels=[float(v) for v in levels] if levels else None,
        cauchy_tol=float(cfg.opts.get("cauchy_tol", 1e-5)),
        tol=float(cfg.opts.get("tol", 1e-4)),
        seed=seed,
    )

    def sample_at(cells):
        return _sample(build_domain(cfg.domain, cells), tf, cfg.opts)

    base_cells = int(np.max(np.atleast_1d(dom.params["cells"])))
    membership = membership_report(F, sample_at, base_cells)
    checks = {
        "extended_residual": _check(
            run.extended_resid, run.tol_effective, run.accepted
        ),
        "extended_mass_bound": _check(
            run.mass_bound.lhs, run.mass_bound.rhs, run.mass_bound.ok
        ),
    }
    summary = {
        "experiment": "extend",
        "function": tf.label(),
        "dim": dom.dim,
        "degree": cfg.degree,
        "center": list(run.final.center),
        "coefficients": _coeff_map(run.final),
        "levels": [
            {
                "level": r.level,
                "coeff_delta": r.coeff_delta,
                "objective": r.objective,
                "residual_truncated": r.residual_truncated,
                "residual_extended": r.residual_extended,
            }
            for r in run.records
        ],
        "cauchy_level": run.cauchy_level,
        "extended_residual": run.extended_resid,
        "membership": membership,
        "seed": seed,
        "checks": checks,
    }
    write_csv(
        out / "trace.csv",
        ["level", "coeff_delta", "extended_residual"],
        [(r.level, r.coeff_delta, r.residual_extended) for r in run.records],
    )
    return summary, all(c["ok"] for c in checks.values())


def _run_local_converge(cfg, out, seed, resolution):
    F = build_orlicz(cfg.orlicz)
    tf = build_function(cfg.function)
    x = np.atleast_1d(np.asarray(cfg.opts.get("x", [0.0] * tf.dim), dtype=float))
    m = cfg.degree
    if tf.taylor is None:
        raise DomainError(f"{tf.name} carries no analytic derivatives")
    reference = tf.taylor(x, m)
    if reference is None:
        raise DomainError(
            f"{tf.label()} has no degree-{m} Taylor polynomial at {x.tolist()}"
        )
    use_avg = bool(cfg.opts.get("cell_average", False))
    lp = LocalProblem(
        orlicz=F,
        fn=tf.fn,
        x=x,
        degree=m,
        reference=reference,
        cell_average=tf.cell_average if use_avg else None,
        ball_cells=int(cfg.opts.get("ball_cells", resolution or 2048)),
        name=tf.label(),
    )
    constants = estimate_local_constants(
        F, tf.dim, m, trials=int(cfg.opts.get("trials", 2000)), seed=seed
    )
    eps = cfg.opts.get("eps_schedule")
    trace = convergence_experiment(
        lp,
        eps_schedule=[float(e) for e in eps] if eps else None,
        tol=float(cfg.opts.get("tol", 1e-4)),
        seed=seed,
        constants=constants,
    )
    alphas = multi_indices(tf.dim, m)
    keys = [_alpha_key(a) for a in alphas]

    sup_rows = []
    sandwich_worst = 0.0
    sandwich_ok = True
    for row in trace.rows:
        P = Polynomial(
            tf.dim, m, np.asarray([row["coeffs"][a] for a in alphas]), x
        )
        sb = local_sup_bound(F, lp, row["eps"], P, constants)
        sup_rows.append(sb)
        recs = sandwich_records(
            F,
            lp.ball(row["eps"]),
            m,
            constants.c1,
            n_polys=int(cfg.opts.get("sandwich_polys", 100)),
            seed=seed,
        )
        sandwich_ok &= all(r["ok"] for r in recs)
        for r in recs:
            sandwich_worst = max(
                sandwich_worst,
                (r["lhs"] - r["mid"]) / max(1.0, r["mid"]),
                (r["mid"] - r["rhs"]) / max(1.0, r["rhs"]),
            )
    worst_ratio = max(
        rec["ratio"] for row in trace.rows for rec in row["bound"].values()
    )
    decay_ok = smoothness_decay_ok(trace) if len(trace.rows) >= 5 else None
    checks = {
        "coefficient_bound_ratio": _check(worst_ratio, 1.0),
        "sup_norm_bound": _check(
            max(sb.lhs / max(sb.rhs, 1e-300) for sb in sup_rows),
            1.0,
            all(sb.ok for sb in sup_rows),
        ),
        "sup_average_sandwich": _check(sandwich_worst, 0.0, sandwich_ok),
    }
    if decay_ok is not None:
        checks["smoothness_decay"] = _check(
            trace.rows[-1]["rho"], 0.05 * trace.rows[0]["rho"] + 1e-300, decay_ok
        )
    err_tol = cfg.opts.get("err_tol")
    if err_tol is not None:
        checks["final_error"] = _check(
            max(trace.final_errors.values()), float(err_tol)
        )
    summary = {
        "experiment": "local_converge",
        "function": tf.label(),
        "x": x.tolist(),
        "degree": m,
        "constants": constants.as_dict(),
        "eps_schedule": trace.eps_schedule,
        "slopes": {k: trace.slopes[a] for k, a in zip(keys, alphas)},
        "final_errors": {k: trace.final_errors[a] for k, a in zip(keys, alphas)},
        "rho": [row["rho"] for row in trace.rows],
        "seed": seed,
        "checks": checks,
    }
    header = (
        ["eps"]
        + [f"a_{k}" for k in keys]
        + [f"err_{k}" for k in keys]
        + ["rho"]
        + [f"bound_{k}" for k in keys]
    )
    rows = [
        [row["eps"]]
        + [row["coeffs"][a] for a in alphas]
        + [row["errors"][a] for a in alphas]
        + [row["rho"]]
        + [row["bound"][a]["ratio"] for a in alphas]
        for row in trace.rows
    ]
    write_csv(out / "plotdata_local.csv", header, rows)
    write_csv(
        out / "trace.csv",
        ["eps", "max_error", "rho"],
        [
            (row["eps"], max(row["errors"].values()), row["rho"])
            for row in trace.rows
        ],
    )
    return summary, all(c["ok"] for c in checks.values())


def _run_verify_core(cfg, out, seed, resolution):
    F = build_orlicz(cfg.orlicz)
    kind = cfg.orlicz.get("kind")
    tol = float(cfg.opts.get("tol", 1e-7 if kind == "table" else 1e-9))
    rep = verify_structure(F)
    checks = {
        name: _check(getattr(rep, name), tol)
        for name in (
            "sided_order",
            "sided_doubling",
            "separation",
            "phi_lower",
            "phi_upper",
            "phi_doubled",
            "sum_lower",
            "sum_upper",
        )
    }
    doubling = {}
    for which, declared in (
        ("phi", F.lambda_phi),
        ("psi_minus", F.lambda_psi_minus),
        ("psi_plus", F.lambda_psi_plus),
    ):
        est = estimate_delta2(F, which)
        doubling[which] = {"estimate": est, "declared": declared}
        checks[f"doubling_{which}"] = _check(est, declared * (1.0 + 1e-12))
    etas = cfg.opts.get("eta", [0.5, 2.0])
    dilation = {}
    for eta in np.atleast_1d(etas):
        g1, g2 = ratio_bounds(F, float(eta))
        dilation[repr(float(eta))] = {"g1": g1, "g2": g2}
        checks[f"dilation_floor_eta_{eta}"] = _check(g1, 0.0, g1 > 0.0)
    summary = {
        "experiment": "verify_core",
        "generator": kind,
        "max_violation": rep.max_violation(),
        "doubling": doubling,
        "dilation": dilation,
        "checks": checks,
    }
    s = F.grid
    write_csv(
        out / "trace.csv",
        ["s", "psi_minus", "psi_plus", "phi"],
        list(zip(s, F.psi_minus(s), F.psi_plus(s), F.phi(s))),
    )
    return summary, all(c["ok"] for c in checks.values())


def _run_continuity(cfg, out, seed, resolution):
    F = build_orlicz(cfg.orlicz)
    dom = build_domain(cfg.domain, resolution)
    tf = build_function(cfg.function)
    bump_section = cfg.extra_functions.get("bump")
    if bump_section:
        bump_tf = build_function(bump_section, field_name="function.bump")
    else:
        bump_tf = make_function("sine", freq=1.0, amp=0.05)
    h = _sample(dom, tf, cfg.opts)
    bump_vals = SampledFunction.from_callable(dom, bump_tf.fn, name=bump_tf.label()).values
    n_values = [int(n) for n in cfg.opts.get("n_values", [1, 2, 4, 8, 16, 32, 64])]
    if not n_values:
        raise ConfigError("n_values must be non-empty", field="opts.n_values")
    perturbations = [
        h.with_values(
            h.values + bump_vals / n, provenance=f"{h.provenance}+bump/{n}"
        )
        for n in n_values
    ]
    envelope = h.with_values(
        np.abs(h.values) + np.abs(bump_vals), provenance="envelope"
    )
    levels = cfg.opts.get("levels")
    rows = continuity_probe(
        F,
        h,
        perturbations,
        envelope,
        cfg.degree,
        labels=n_values,
        tol=float(cfg.opts.get("tol", 1e-4)),
        seed=seed,
        levels=[float(v) for v in levels] if levels else None,
    )
    dist = [r.poly_dist for r in rows]
    noise = float(cfg.opts.get("noise_factor", 1.1))
    monotone = all(b <= a * noise + 1e-12 for a, b in zip(dist, dist[1:]))
    dist_tol = float(cfg.opts.get("dist_tol", 1e-3))
    checks = {
        "final_distance": _check(dist[-1], dist_tol),
        "monotone_decrease": _check(0.0, 0.0, monotone),
    }
    summary = {
        "experiment": "continuity",
        "function": tf.label(),
        "bump": bump_tf.label(),
        "degree": cfg.degree,
        "rows": [
            {"n": r.index, "modular_dist": r.modular_dist, "poly_dist": r.poly_dist}
            for r in rows
        ],
        "seed": seed,
        "checks": checks,
    }
    write_csv(
        out / "trace.csv",
        ["n", "modular_dist", "poly_dist"],
        [(r.index, r.modular_dist, r.poly_dist) for r in rows],
    )
    return summary, all(c["ok"] for c in checks.values())


def _run_list_functions(out):
    rows = list_functions()
    width = max(len(str(r["name"])) for r in rows)
    print(f"{'name':<{width}}  dim  defaults / membership")
    for r in rows:
        defaults = ", ".join(f"{k}={v!r}" for k, v in sorted(r["defaults"].items()))
        print(f"{r['name']:<{width}}  {r['dim']}    {defaults}")
        print(f"{'':<{width}}       {r['membership']}")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "summary.json", {"experiment": "list_functions", "functions": rows})
    return EXIT_OK


HANDLERS = {
    "solve": _run_solve,
    "extend": _run_extend,
    "local_converge": _run_local_converge,
    "verify_core": _run_verify_core,
    "continuity": _run_continuity,
}


def _error_record(exc, code):
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": code,
        "field": getattr(exc, "field", None),
    }


def _fail(out, exc, code):
    record = _error_record(exc, code)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            write_json(out / "error.json", record)
        except OSError:
            pass
    print(json.dumps(_jsonable(record), sort_keys=True), file=sys.stderr)
    return code


def build_parser():
    parser = argparse.ArgumentParser(
        prog="orlipoly",
        description="Best polynomial approximation experiments on Orlicz-type modulars.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("solve", "best approximation of sampled data on a fixed domain"),
        ("extend", "truncation scheme for data with finite psi_plus-mass only"),
        ("local-converge", "shrinking-ball fits and coefficient convergence"),
        ("verify-core", "structural inequality suite for a generator"),
        ("continuity", "stability of the extended fit under dominated perturbations"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="INI experiment config")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="overrides opts.seed")
        sp.add_argument(
            "--resolution", type=int, default=None, help="overrides domain cells"
        )
    lf = sub.add_parser("list-functions", help="catalog of closed-form test data")
    lf.add_argument("--out", default=None, help="also write the catalog as JSON")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = Path(args.out) if args.out is not None else None
    if args.command == "list-functions":
        return _run_list_functions(out)
    command = args.command.replace("-", "_")
    try:
        cfg = load_config(args.config)
        if cfg.experiment != command:
            raise ConfigError(
                f"config declares experiment {cfg.experiment!r} but the "
                f"subcommand is {command!r}",
                field="experiment.kind",
            )
        if out is None:
            out = Path(cfg.output.get("dir", "out"))
        seed = args.seed if args.seed is not None else cfg.opts.get("seed")
        if command in RANDOMIZED:
            if seed is None:
                raise ConfigError(
                    "a seed is required for randomized experiments "
                    "(opts.seed or --seed)",
                    field="opts.seed",
                )
            seed = int(seed)
        out.mkdir(parents=True, exist_ok=True)
        summary, ok = HANDLERS[command](cfg, out, seed, args.resolution)
    except ConfigError as exc:
        return _fail(out, exc, EXIT_CONFIG)
    except OrlipolyError as exc:
        return _fail(out, exc, EXIT_NUMERIC)
    summary["pass"] = bool(ok)
    write_json(out / "summary.json", summary)
    print(f"{command}: {'PASS' if ok else 'FAIL'} -> {out / 'summary.json'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED
