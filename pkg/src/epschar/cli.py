"""Command-line entry point: ``epschar <subcommand> [flags]``.

Exit status is 0 when every check of every suite run passes, 1 when any
check fails, 2 for configuration or usage errors and 3 when an enumeration
budget refuses to run without ``--force``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bch, cache, grgroup, report, suites
from .config import Config, from_dict, load_config
from .scalars import ConfigurationError, is_prime

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser, config_required: bool = True):
    p.add_argument("--config", required=config_required, help="JSON config file")
    p.add_argument("--out", help="write the JSON report here (figures go alongside)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--force", action="store_true", help="ignore enumeration budgets")
    p.add_argument("--cache-dir", help=f"cache directory (default ${cache.ENV_VAR} or ~/.cache/epschar)")
    p.add_argument("--no-cache", action="store_true", help="neither read nor write the table cache")
    p.add_argument("--no-plots", action="store_true", help="skip the PNG figures")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="epschar", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bch", help="BCH tables and golden comparison")
    _common(p, config_required=False)
    p.add_argument("--r", type=int, help="truncation level (default: config r, else 4)")
    p.add_argument("--emit", help="dump z_i, u_i, u'_i as JSON to this file")

    p = sub.add_parser("group", help="group-law checks")
    _common(p, config_required=False)
    p.add_argument("action", nargs="?", default="selftest", choices=["selftest"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--r", type=int)

    p = sub.add_parser("induce", help="induced character table and norms")
    _common(p)
    p.add_argument("--report", help="JSON report path (with --out naming the binary table)")

    for name, text in (("ladder", "ladder equality and triangle additivity"),
                       ("lemmas", "vanishing exponential sums"),
                       ("compare-lk", "t_L against t_K")):
        _common(sub.add_parser(name, help=text))

    p = sub.add_parser("fourier", help="fiberwise Fourier transform against the predicted support")
    _common(p)
    p.add_argument("--r", type=int, choices=[2, 3, 4], help="must match the config (default: config r)")
    p.add_argument("--bases", default=None, help="all | T | sample:K (r = 2, 3)")

    _common(sub.add_parser("all", help="every suite that applies to the config"))
    return ap


def _config(args) -> Config:
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.force:
        changes["force"] = True
    return cfg.replace(**changes) if changes else cfg


def _adhoc_config(n: int, p: int, r: int, args) -> Config:
    d = {"n": n, "p": p, "r": r, "group_only": True}
    if args.seed is not None:
        d["seed"] = args.seed
    if args.force:
        d["force"] = True
    return from_dict(d)


def _finish(reports: list, args) -> int:
    for rep in reports:
        print(rep.summary_line())
        for c in rep.failures():
            rec = {"suite": rep.suite, "check": c.name, "expected": c.expected, "computed": c.computed,
                   "config_hash": rep.config_hash, "seed": rep.seed}
            if c.repro:
                rec["repro"] = c.repro
            print("  repro: " + json.dumps(rec, default=str, sort_keys=True), file=sys.stderr)
    out = getattr(args, "report", None) or (args.out if args.command != "induce" else None)
    if out:
        for path in report.write(reports, out, plots=not args.no_plots):
            print(f"wrote {path}")
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def _run(args) -> int:
    opts = suites.Options(args.jobs, args.cache_dir, not args.no_cache)
    cmd = args.command
    if cmd == "bch":
        base = _config(args) if args.config else None
        r = args.r or (base.r if base else 4)
        p = next(q for q in range(max(r, 3), 100) if is_prime(q))
        cfg = _adhoc_config(base.n if base else 2, p, r, args)
        if args.emit:
            Path(args.emit).write_text(json.dumps(bch.tables_json(max(r, 2)), indent=2) + "\n")
            print(f"wrote {args.emit}")
        return _finish([suites.run_suite("bch", cfg, opts)], args)
    if cmd == "group":
        if args.config:
            cfg = _config(args)
        elif None in (args.n, args.p, args.r):
            raise ConfigurationError("group selftest needs --config or all of --n, --p, --r")
        else:
            cfg = _adhoc_config(args.n, args.p, args.r, args)
        return _finish([suites.run_suite("group", cfg, opts)], args)

    cfg = _config(args)
    if cmd == "induce":
        rep = suites.run_suite("characters", cfg, opts)
        if args.out:
            tl, _ = suites._t_L_full(cfg, opts)
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            Path(args.out).write_bytes(cache.encode(cfg.n, cfg.p, cfg.r, grgroup.index_to_u64(tl.indices),
                                                    tl.coeffs))
            print(f"wrote {args.out}")
        return _finish([rep], args)
    if cmd == "fourier":
        r = args.r or cfg.r
        if r != cfg.r:
            raise ConfigurationError(f"--r {r} does not match the config (r={cfg.r})")
        name = {2: "fourier2", 3: "fourier3", 4: "fourier4-sampled"}[r]
        kw = {"bases": args.bases} if args.bases and r in (2, 3) else {}
        return _finish([suites.run_suite(name, cfg, opts, **kw)], args)
    if cmd == "all":
        return _finish([suites.run_suite(s, cfg, opts) for s in suites.applicable(cfg)], args)
    return _finish([suites.run_suite(cmd, cfg, opts)], args)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except grgroup.BudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
