"""Command line front end.

Subcommands ``dist``, ``witness``, ``clicksim`` and ``figure``.  Output is
data only (CSV or JSON) in the directory given by ``--out``; a short JSON
summary goes to stdout.  Exit codes: 0 success, 2 configuration error,
3 numerical precondition error.  Phase-space points use ``alpha = x + i p``
with the vacuum Wigner function ``(2/pi) exp(-2|alpha|^2)``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .clicksim import covariance_exact, multi_zero_count_witness, simulate_clicks
from .config import RunConfig, load_config
from .errors import ConfigError, CutoffError, PreconditionError
from .phasespace import scan_many
from .witness import WitnessSpec, find_violation, witness_field

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
CONVENTION = "alpha = x + i p; vacuum Wigner function (2/pi) exp(-2|alpha|^2)"


def _tag(x: float) -> str:
    return f"{x:g}"


def _threads(args, cfg: RunConfig) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("PSW_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"PSW_THREADS must be an integer, got {env!r}") from exc
    return cfg.threads


def _field_summary(f) -> dict:
    return {"min": float(f.values.min()), "max": float(f.values.max()),
            "err_bound": float(f.err_bound), "argmin": f.argmin()}


def cmd_dist(cfg: RunConfig, out: Path, fmt: str, threads) -> dict:
    cfg.require("state", "grid")
    state = cfg.state.build()
    fields = scan_many(state, cfg.grid, cfg.s_list, threads=threads)
    files = []
    if fmt == "csv":
        for f in fields:
            files.append(str(io.write_field_csv(out / f"dist_s{_tag(f.s.s)}.csv", f)))
    else:
        files.append(str(io.write_json(out / "dist.json",
                                       {"convention": CONVENTION, "fields": [f.to_dict() for f in fields]})))
    summary = []
    for f in fields:
        item = {"s": f.s.s, **_field_summary(f), "integral": f.integral()}
        item["nonnegative"] = bool(f.values.min() >= -f.err_bound)
        summary.append(item)
    return {"command": "dist", "files": files, "fields": summary}


def _write_witness(out: Path, name: str, fld, fmt: str) -> str:
    if fmt == "csv":
        return str(io.write_field_csv(out / f"{name}.csv", fld))
    return str(io.write_json(out / f"{name}.json", {
        "convention": CONVENTION, "grid": fld.grid.to_dict(), "spec": fld.spec.to_dict(),
        "values": fld.values, "err_bound": fld.err_bound}))


def cmd_witness(cfg: RunConfig, out: Path, fmt: str, threads) -> dict:
    cfg.require("state", "grid")
    state = cfg.state.build()
    if cfg.k_vec is not None:
        specs = [WitnessSpec.multi(s, cfg.k_vec) for s in cfg.s_list]
    else:
        specs = [WitnessSpec.two(s, k) for s in cfg.s_list for k in cfg.k_list]
    files, summary = [], []
    for sp in specs:
        fld = witness_field(state, cfg.grid, sp, threads=threads)
        name = f"witness_s{_tag(sp.s.s)}_" + "_".join(f"k{_tag(k)}" for k in sp.k_vec)
        files.append(_write_witness(out, name, fld, fmt))
        summary.append(fld.min_result().to_dict())
    result = {"command": "witness", "files": files, "minima": summary}
    if cfg.search:
        best = find_violation(state, cfg.grid, list(cfg.s_list), list(cfg.k_list), threads=threads)
        files.append(str(io.write_json(out / "violation.json", best.to_dict())))
        result["violation"] = best.to_dict()
    return result


def cmd_clicksim(cfg: RunConfig, out: Path, fmt: str, threads) -> dict:
    cfg.require("state", "multiplex")
    state = cfg.state.build()
    mp = cfg.multiplex
    res = simulate_clicks(state, cfg.alpha, mp, cfg.shots, cfg.seed, threads=threads,
                          record=cfg.shot_log)
    est, log = res if cfg.shot_log else (res, None)
    if mp.channels == 2:
        exact = covariance_exact(state, cfg.alpha, mp.eta, mp.splits[1])
    else:
        exact = multi_zero_count_witness(state, cfg.alpha, mp)
    sigma = (est.covariance - exact.value) / est.std_err_cov if est.std_err_cov > 0 else 0.0
    report = {"estimate": est.to_dict(), "exact_covariance": exact.value,
              "exact_err_bound": exact.err_bound, "deviation_sigma": sigma}
    files = []
    if fmt == "csv":
        rows = [(est.p_joint, est.std_err_joint, est.covariance, est.std_err_cov,
                 exact.value, sigma)]
        files.append(str(io.write_csv(out / "clicksim.csv",
                                      ("p_joint", "std_err_joint", "covariance", "std_err_cov",
                                       "exact_covariance", "deviation_sigma"), rows)))
    files.append(str(io.write_json(out / "clicksim.json", report)))
    if log is not None:
        files.append(str(io.write_shot_log(out / "shots.csv", *log)))
    return {"command": "clicksim", "files": files, **report}


def cmd_figure(name: str, out: Path, fmt: str, threads) -> dict:
    from . import figures  # pulls in scipy.optimize; only needed here

    files = []
    if name == "fig1":
        data = figures.fig1(threads=threads)
        summary = {k: _field_summary(v) for k, v in data.items()}
        for key, fld in data.items():
            if fmt == "csv":
                files.append(str(io.write_field_csv(out / f"fig1_{key}.csv", fld)))
        if fmt == "json":
            files.append(str(io.write_json(out / "fig1.json", {
                "convention": CONVENTION, "grid": data["wigner"].grid.to_dict(),
                **{k: v.values for k, v in data.items()},
                "err_bound": {k: v.err_bound for k, v in data.items()}})))
    elif name == "fig2":
        data = figures.fig2()
        crossing = figures.wigner_origin_crossing()
        neg = data["q"][data["witness0"] < 0]
        summary = {"wigner0_zero_crossing": crossing,
                   "witness_negative_from_q": float(neg.min()) if neg.size else None}
        if fmt == "csv":
            files.append(str(io.write_csv(out / "fig2.csv", ("q", "wigner0", "witness0"),
                                          zip(data["q"], data["wigner0"], data["witness0"]))))
        else:
            files.append(str(io.write_json(out / "fig2.json", {**data, **summary})))
    elif name == "fig3":
        data = figures.fig3()
        summary = {"mandel_crossing": figures.spats_mandel_crossing(),
                   "boundary": data["boundary"]}
        cols = ("nbar", "epsilon", "loss", "witness_min", "err", "alpha_min", "violated",
                "wigner0", "mandel_q")
        if fmt == "csv":
            files.append(str(io.write_csv(out / "fig3.csv", cols,
                                          ([r[c] for c in cols] for r in data["rows"]))))
            files.append(str(io.write_csv(
                out / "fig3_boundary.csv", ("nbar", "epsilon", "loss"),
                ([b["nbar"], np.nan if b["epsilon"] is None else b["epsilon"],
                  np.nan if b["loss"] is None else b["loss"]] for b in data["boundary"]))))
        else:
            files.append(str(io.write_json(out / "fig3.json", {**data, **summary})))
    elif name == "fig5":
        data = figures.fig5(threads=threads)
        fld = data["witness"]
        summary = {"witness": fld.min_result().to_dict(),
                   "covariance_min": float(fld.values.min() * data["covariance_scale"])}
        if fmt == "csv":
            files.append(str(io.write_field_csv(out / "fig5_witness.csv", fld)))
            files.append(str(io.write_csv(
                out / "fig5_covariance.csv", io.FIELD_HEADER,
                ((a, b, v * data["covariance_scale"]) for a, b, v in fld.rows()))))
        else:
            files.append(str(io.write_json(out / "fig5.json", {
                "convention": CONVENTION, "grid": fld.grid.to_dict(), "spec": fld.spec.to_dict(),
                "witness": fld.values, "covariance": fld.values * data["covariance_scale"],
                "err_bound": fld.err_bound})))
    else:
        raise ConfigError(f"unknown figure {name!r}")
    return {"command": "figure", "figure": name, "files": files, "summary": summary}


FIGURES = ("fig1", "fig2", "fig3", "fig5")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory (default: config 'out' or '.')")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, help="worker threads (fallback: $PSW_THREADS)")

    parser = argparse.ArgumentParser(prog="psw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("dist", parents=[common], help="sample P(alpha; s) on a grid")
    w = sub.add_parser("witness", parents=[common], help="evaluate classicality inequalities")
    w.add_argument("--figure", choices=FIGURES, help="use a figure preset instead of --config")
    sub.add_parser("clicksim", parents=[common], help="Monte Carlo zero-count correlation run")
    f = sub.add_parser("figure", parents=[common], help="emit figure data")
    f.add_argument("name", choices=FIGURES)
    return parser


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0

    try:
        preset = getattr(args, "figure", None) or getattr(args, "name", None)
        if args.config:
            cfg = load_config(args.config)
        elif preset:
            cfg = RunConfig()
        else:
            raise ConfigError("--config is required")
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed})
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        out = Path(args.out or cfg.out or ".")
        fmt = args.format or cfg.format
        threads = _threads(args, cfg)

        if preset:
            result = cmd_figure(preset, out, fmt, threads)
        elif args.command == "dist":
            result = cmd_dist(cfg, out, fmt, threads)
        elif args.command == "witness":
            result = cmd_witness(cfg, out, fmt, threads)
        else:
            result = cmd_clicksim(cfg, out, fmt, threads)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except (CutoffError, PreconditionError) as exc:
        return _fail(EXIT_NUMERIC, type(exc).__name__, str(exc))
    except ValueError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))

    print(io.dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
