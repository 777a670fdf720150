"""Command-line front end.

Exit codes: 0 success, 1 runtime failure (a computation raised), 2 config
validation failure (bad spec file / bad flag combination), with a message
naming the offending field. The SUBGAUSS_SEED environment variable, when
set, overrides any base seed from flags or config files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from subgauss import evt, gausslin, harness, m4, pointproc
from subgauss.gausslin import SpecError
from subgauss.harness import ExperimentConfig, effective_base_seed


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_coeffs(path: str) -> gausslin.CoeffTable:
    return gausslin.CoeffTable.from_json(Path(path).read_text())


def _load_m4(path: str) -> m4.M4Spec:
    return m4.M4Spec.from_json(Path(path).read_text())


def _cmd_simulate(args) -> int:
    table = _load_coeffs(args.spec)
    seed = effective_base_seed(args.seed, 0)
    X = gausslin.simulate(table, args.n, seed)
    if args.format == "csv":
        _write(X.to_csv(), args.out)
    else:
        payload = {"meta": X.meta, "values": X.values.tolist()}
        _write(json.dumps(payload) + "\n", args.out)
    return 0


def _cmd_acf(args) -> int:
    table = _load_coeffs(args.spec)
    gammas = gausslin.autocov_all(table, args.hmax)
    _, tail = gausslin.autocov(table, args.hmax)
    if args.format == "csv":
        lines = ["h," + ",".join(f"g{i}{k}" for i in range(table.spec.d0)
                                 for k in range(table.spec.d0))]
        for h in range(args.hmax + 1):
            lines.append(f"{h}," + ",".join(repr(float(v)) for v in gammas[h].ravel()))
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(json.dumps({"gamma": gammas.tolist(), "tail_bound": tail}) + "\n",
               args.out)
    return 0


def _m4_path_fn(spec: m4.M4Spec, n: int):
    span = spec.r_hi - spec.r_lo

    def path_fn(seed):
        return m4.build(m4.innovations(spec, n + span, seed), spec)

    return path_fn


def _cmd_maxima(args) -> int:
    spec = _load_m4(args.spec)
    tau = tuple(float(t) for t in args.tau.split(","))
    u = m4.thresholds(spec, args.n, tau)
    seed = effective_base_seed(args.seed, 0)
    path_fn = _m4_path_fn(spec, args.n)
    p_hat, ci = evt.empirical_nonexceed(path_fn, u, reps=args.reps, base_seed=seed)
    g = m4.G_limit(spec, tau)
    th = m4.theta(spec, tau)
    payload = {
        "p_hat": p_hat,
        "ci_halfwidth": ci,
        "G": g,
        "theta": th,
        "limit": g**th,
        "u": u.u.tolist(),
    }
    if args.format == "csv":
        _write("p_hat,ci_halfwidth,limit\n"
               f"{p_hat!r},{ci!r},{payload['limit']!r}\n", args.out)
    else:
        _write(json.dumps(payload) + "\n", args.out)
    return 0


def _cmd_theta(args) -> int:
    spec = _load_m4(args.spec)
    tau = tuple(float(t) for t in args.tau.split(","))
    payload = {"theta": m4.theta(spec, tau)}
    if args.m_trunc is not None:
        payload["theta_2m"] = m4.theta_2m(spec, tau, args.m_trunc)
    _write(json.dumps(payload) + "\n", args.out)
    return 0


def _cmd_m4_verify(args) -> int:
    spec = _load_m4(args.spec)
    tau = tuple(float(t) for t in args.tau.split(","))
    g = m4.G_limit(spec, tau)
    t = m4.tail_limit(spec, tau)
    gap = abs(-np.log(g) - t)
    payload = {
        "A": m4.A_vec(spec).tolist(),
        "G_limit": g,
        "tail_limit": t,
        "identity_gap": gap,
        "ok": bool(gap <= 1e-12),
    }
    _write(json.dumps(payload) + "\n", args.out)
    return 0 if payload["ok"] else 1


def _cmd_pointproc(args) -> int:
    spec = _load_m4(args.spec)
    tau = tuple(float(t) for t in args.tau.split(","))
    u = m4.thresholds(spec, args.n, tau)
    cfg = pointproc.GapConfig(args.r, args.p, args.m)
    seed = effective_base_seed(args.seed, 0)
    path_fn = _m4_path_fn(spec, args.n)
    patterns = []
    for rep in range(args.reps):
        patterns.append(pointproc.gapped_blocks(path_fn(seed ^ rep), u, cfg))
    if args.format == "csv":
        _write(pointproc.patterns_to_csv(patterns), args.out)
    else:
        lam = float(np.mean([p.count for p in patterns]))
        rep_diag = pointproc.poisson_diagnostics(patterns, lam)
        _write(rep_diag.to_json() + "\n", args.out)
    return 0


def _cmd_dprime(args) -> int:
    spec = _load_m4(args.spec)
    tau = tuple(float(t) for t in args.tau.split(","))
    if spec.d != 1 or len(tau) != 1:
        raise SpecError("dprime requires a univariate spec (field: d)")
    u = m4.thresholds(spec, args.n, tau)
    seed = effective_base_seed(args.seed, 0)
    k_list = [int(k) for k in args.k_list.split(",")]
    rep = evt.dprime_stat(_m4_path_fn(spec, args.n), args.n, float(u.u[0]),
                          k_list, reps=args.reps, base_seed=seed)
    payload = {
        "stats": {str(k): v for k, v in rep.stats.items()},
        "stderr": {str(k): v for k, v in rep.stderr.items()},
        "joint_events": rep.joint_events,
        "wide_ci": rep.wide_ci,
    }
    _write(json.dumps(payload) + "\n", args.out)
    return 0


def _cmd_gauss_tools(args) -> int:
    table = _load_coeffs(args.spec)
    report = gausslin.check_decay(table)
    payload = {
        "tail_decreasing": report.tail_decreasing,
        "full_rank": gausslin.full_rank_check(table),
        "block_toeplitz_min_eig": gausslin.block_toeplitz_min_eig(table, args.nblock),
    }
    if args.berman_hmax:
        profile = gausslin.berman_profile(table, args.berman_hmax)
        payload["berman_last"] = float(profile[-1])
    _write(json.dumps(payload) + "\n", args.out)
    return 0


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    seed = effective_base_seed(args.seed, cfg.base_seed)
    if seed != cfg.base_seed:
        cfg = ExperimentConfig(
            name=cfg.name, generator=cfg.generator, n=cfg.n, tau=cfg.tau,
            reps=args.reps or cfg.reps, base_seed=seed,
            analyses=cfg.analyses, out=cfg.out,
        )
    elif args.reps:
        cfg = ExperimentConfig(
            name=cfg.name, generator=cfg.generator, n=cfg.n, tau=cfg.tau,
            reps=args.reps, base_seed=cfg.base_seed,
            analyses=cfg.analyses, out=cfg.out,
        )
    out_dir = args.out or cfg.out
    summary = harness.run(cfg, out_dir)
    if out_dir is None:
        sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subgauss",
        description="Simulation and verification tools for extremes of "
                    "transformed Gaussian linear processes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True, reps=False):
        if seed:
            p.add_argument("--seed", type=int, default=None)
        if reps:
            p.add_argument("--reps", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("simulate", help="sample a Gaussian linear process path")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("acf", help="autocovariances with truncation bound")
    p.add_argument("--spec", required=True)
    p.add_argument("--hmax", type=int, required=True)
    common(p, seed=False)
    p.set_defaults(func=_cmd_acf)

    p = sub.add_parser("maxima", help="non-exceedance rate vs. the limit")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", required=True)
    common(p)
    p.add_argument("--reps", type=int, default=200)
    p.set_defaults(func=_cmd_maxima)

    p = sub.add_parser("theta", help="extremal index from the coefficient array")
    p.add_argument("--spec", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--m-trunc", type=int, default=None)
    common(p, seed=False)
    p.set_defaults(func=_cmd_theta)

    p = sub.add_parser("m4-verify", help="cross-check the limit identities")
    p.add_argument("--spec", required=True)
    p.add_argument("--tau", required=True)
    common(p, seed=False)
    p.set_defaults(func=_cmd_m4_verify)

    p = sub.add_parser("pointproc", help="gapped-block exceedance point process")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, default=0)
    common(p)
    p.add_argument("--reps", type=int, default=200)
    p.set_defaults(func=_cmd_pointproc)

    p = sub.add_parser("dprime", help="anti-clustering statistic")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--k-list", required=True)
    common(p)
    p.add_argument("--reps", type=int, default=50)
    p.set_defaults(func=_cmd_dprime)

    p = sub.add_parser("gauss-tools", help="decay / rank / mixing diagnostics")
    p.add_argument("--spec", required=True)
    p.add_argument("--nblock", type=int, default=10)
    p.add_argument("--berman-hmax", type=int, default=0)
    common(p, seed=False)
    p.set_defaults(func=_cmd_gauss_tools)

    p = sub.add_parser("run", help="execute an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
