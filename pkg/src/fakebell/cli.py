"""Command line: ``fakebell run|sweep|analyze``.

Exit codes: 0 success, 2 configuration error, 3 analysis error.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import load_config
from .errors import ConfigError, StreamFormatError, UndefinedCorrelatorError
from .runner import analyze, run, sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ANALYSIS = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fakebell", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    for name, help_ in (("run", "simulate one scenario"), ("sweep", "one run per q in q_sweep")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="JSON run configuration")
        s.add_argument("--seed", type=int, default=None, help="override the config seed")
        s.add_argument("--out", default=".", help="output directory")
        if name == "run":
            s.add_argument("--emit-events", action="store_true", help="also write <party>_events.csv")

    a = sub.add_parser("analyze", help="CHSH analysis of two exported event files")
    a.add_argument("alice_events")
    a.add_argument("bob_events")
    a.add_argument("--window-ns", type=int, default=5)
    a.add_argument("--out", default=".", help="output directory")
    return p


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        try:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "run":
            report = run(_load(args))
            report.write(args.out, emit_events=args.emit_events)
            c = report.chsh
            print(f"S = {c.S:.4f} +/- {c.dS:.4f} ({c.classification.value}), "
                  f"efficiency {c.efficiency[0]:.4f}/{c.efficiency[1]:.4f}, alarm={report.alarm}")
        elif args.cmd == "sweep":
            cfg = _load(args)
            if not cfg.q_sweep:
                raise ConfigError("config has no q_sweep list")
            rep = sweep(cfg)
            rep.write(args.out)
            for r in rep.rows:
                print(f"q={r['q']:+.4f}  S_p={r['S_programmed']:+.4f}  S={r['S_observed']:+.4f} +/- {r['dS']:.4f}")
        else:
            if args.window_ns < 0:
                raise ConfigError("--window-ns must be non-negative")
            rep = analyze(args.alice_events, args.bob_events, args.window_ns)
            rep.write(args.out)
            print(f"S = {rep.chsh.S:.4f} +/- {rep.chsh.dS:.4f} ({rep.chsh.classification.value})")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StreamFormatError, UndefinedCorrelatorError, OSError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
