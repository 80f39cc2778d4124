"""Command-line front end: ``bo-rational {solve,sweep,verify,oracle,spectral}``.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 a numerical
verification failed.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from typing import Sequence

import numpy as np

from .config import RunConfig, format_number, load_config
from .errors import BORationalError, ConfigError
from .msoliton import m_soliton_oracle
from .quadrature import QuadratureSpec
from .scattering import renormalized_profile
from .solver import evaluate_u_grid
from .special import alpha_lambda, beta_lambda, expint_Ei
from .verification import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse would exit with status 2, which is reserved for config errors here
        raise UsageError(message)


def _spec(cfg: RunConfig | None, tol: float | None) -> QuadratureSpec:
    spec = cfg.quadrature() if cfg is not None else QuadratureSpec()
    if tol is not None:
        spec = QuadratureSpec(tol, spec.abs_floor, spec.max_subdivisions, spec.grading_ratio)
    return spec


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_number(v) if isinstance(v, float) else v for v in row])


def _figure():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    # fixed ids and no timestamp keep the SVG byte-identical between runs
    plt.rcParams["svg.hashsalt"] = "bo-rational"
    return plt


def _save_svg(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def _need_config(args) -> RunConfig:
    if not args.config:
        raise UsageError(f"{args.command} needs --config")
    return load_config(args.config)


def cmd_solve(args) -> int:
    cfg = _need_config(args)
    cfg.require("t", "x")
    data = cfg.data()
    samples = evaluate_u_grid(data, cfg.t, cfg.x, _spec(cfg, args.tol), args.threads)
    base = os.path.join(args.out, cfg.name)
    _write_csv(base + ".csv", ["t", "x", "re_piu", "im_piu", "u", "cond", "flag"],
               [[s.t, s.x, s.Piu.real, s.Piu.imag, s.u, float(s.cond_estimate), int(s.err_flag)] for s in samples])
    if args.svg:
        plt = _figure()
        fig, ax = plt.subplots(figsize=(7, 4))
        for t in sorted(set(s.t for s in samples)):
            row = [s for s in samples if s.t == t]
            ax.plot([s.x for s in row], [s.u for s in row], label=f"t = {t:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("u(t, x)")
        ax.legend()
        _save_svg(fig, base + ".svg")
        plt.close(fig)
    flagged = sum(s.err_flag for s in samples)
    print(f"wrote {base}.csv ({len(samples)} samples, {flagged} flagged)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _need_config(args)
    if cfg.mode != "profile":
        raise ConfigError("sweep needs mode = profile")
    cfg.require("t", "y")
    if any(not y < 0 for y in cfg.y):
        raise ConfigError("profile mode needs every y < 0")
    data = cfg.data()
    spec = _spec(cfg, args.tol)
    records = []
    for t in sorted(cfg.t):
        records.extend(renormalized_profile(t, sorted(cfg.y), spec, args.threads, data))
    base = os.path.join(args.out, cfg.name)
    _write_csv(base + ".csv", ["t", "y", "re_phi", "im_phi", "re_target", "im_target", "deviation", "flag"],
               [[r.t, r.y, r.phi.real, r.phi.imag, r.target.real, r.target.imag, r.deviation, int(r.err_flag)]
                for r in records])
    if args.svg:
        plt = _figure()
        fig, (ax_re, ax_im) = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
        ys = sorted(cfg.y)
        for t in sorted(cfg.t):
            row = [r for r in records if r.t == t]
            ax_re.plot([r.y for r in row], [r.phi.real for r in row], label=f"t = {t:g}")
            ax_im.plot([r.y for r in row], [r.phi.imag for r in row], label=f"t = {t:g}")
        target = [alpha_lambda(-y) for y in ys]
        ax_re.plot(ys, [v.real for v in target], color="red", label="alpha(-y)")
        ax_im.plot(ys, [v.imag for v in target], color="red", label="alpha(-y)")
        ax_re.set_title("Re phi(t, y)")
        ax_im.set_title("Im phi(t, y)")
        for ax in (ax_re, ax_im):
            ax.set_xlabel("y")
            ax.legend()
        _save_svg(fig, base + ".svg")
        plt.close(fig)
    worst = {t: max(r.deviation for r in records if r.t == t) for t in sorted(cfg.t)}
    for t, d in worst.items():
        print(f"t={t:g}: sup deviation {d:.6g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = args.suite
    if suite not in SUITES and suite != "all":
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(list(SUITES) + ['all'])}")
    checks = run_suite(suite, args.threads, _spec(None, args.tol) if args.tol else None)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def cmd_oracle(args) -> int:
    cfg = load_config(args.config) if args.config else RunConfig(M=2, t=[0.5, 1.0, 2.0], x=[-2.0, 0.5, 3.0],
                                                                 name="oracle")
    if cfg.M is None:
        raise ConfigError("missing field: M")
    cfg.require("t", "x")
    if cfg.M < 1 or any(not t > 0 for t in cfg.t):
        raise ConfigError("oracle needs M >= 1 and t > 0")
    rows = []
    for t in cfg.t:
        for x in cfg.x:
            v = m_soliton_oracle(cfg.M, t, x)
            rows.append([float(t), float(x), cfg.M, v.u])
    base = os.path.join(args.out, cfg.name)
    _write_csv(base + ".csv", ["t", "x", "M", "u"], rows)
    if args.svg:
        plt = _figure()
        fig, ax = plt.subplots(figsize=(7, 4))
        for t in cfg.t:
            sel = [r for r in rows if r[0] == t]
            ax.plot([r[1] for r in sel], [r[3] for r in sel], label=f"t = {t:g}")
        ax.set_xlabel("x")
        ax.set_ylabel(f"u, M = {cfg.M}")
        ax.legend()
        _save_svg(fig, base + ".svg")
        plt.close(fig)
    print(f"wrote {base}.csv ({len(rows)} rows)")
    return EXIT_OK


def cmd_spectral(args) -> int:
    cfg = load_config(args.config) if args.config else RunConfig(name="spectral")
    lams = cfg.lam or [float(v) for v in np.round(0.05 * np.arange(1, 101), 12)]
    if any(not v > 0 for v in lams):
        raise ConfigError("lambda values must be positive")
    rows = []
    for lam in lams:
        a, b = alpha_lambda(lam), beta_lambda(lam)
        rows.append([float(lam), a.real, a.imag, b.real, b.imag, expint_Ei(2.0 * lam)])
    base = os.path.join(args.out, cfg.name)
    _write_csv(base + ".csv", ["lambda", "re_alpha", "im_alpha", "re_beta", "im_beta", "ei_2lambda"], rows)
    if args.svg:
        plt = _figure()
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(lams, [r[1] for r in rows], label="Re alpha")
        ax.plot(lams, [r[2] for r in rows], label="Im alpha")
        ax.plot(lams, [math.hypot(r[1], r[2]) for r in rows], label="|alpha|")
        ax.set_xlabel("lambda")
        ax.legend()
        _save_svg(fig, base + ".svg")
        plt.close(fig)
    print(f"wrote {base}.csv ({len(rows)} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bo-rational", description="Exact Benjamin-Ono solutions for rational data.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, config_required=False):
        p.add_argument("--config", help="key-value config file", required=config_required)
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--tol", type=float, default=None, help="quadrature relative tolerance")
        p.add_argument("--threads", type=int, default=1, help="worker processes")
        p.add_argument("--svg", action="store_true", help="also write an SVG figure")

    common(sub.add_parser("solve", help="u and Pi u on a (t, x) grid"), True)
    common(sub.add_parser("sweep", help="rescaled profile phi(t, y) against alpha(-y)"), True)
    v = sub.add_parser("verify", help="run a self-check suite")
    v.add_argument("suite", help="soliton, msoliton, formulas, spectral, scattering or all")
    common(v)
    common(sub.add_parser("oracle", help="M-soliton reference table"))
    common(sub.add_parser("spectral", help="alpha, beta and Ei tables"))
    return parser


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "verify": cmd_verify,
            "oracle": cmd_oracle, "spectral": cmd_spectral}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        if args.tol is not None and not args.tol > 0:
            raise UsageError("--tol must be positive")
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BORationalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
