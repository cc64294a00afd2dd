"""``stap-sim`` command line: simulate, sweep, verify, pulses."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import dynamics, invariant, tables, verify
from .config import ConfigError, RunConfig, SweepSpec, load_json, preset, run_sweep

log = logging.getLogger("stap_sim")

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_CHECK = 1

DEFAULT_OUT = {"simulate": "trajectory.csv", "sweep": "sweep.csv", "pulses": "pulses.csv"}


def _document(args) -> dict:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.preset:
        command, doc = preset(args.preset)
        if command != args.command:
            raise ConfigError(f"preset {args.preset!r} is a {command!r} preset, "
                              f"not {args.command!r}")
        return doc
    if args.config:
        return load_json(args.config)
    raise ConfigError("a --config file or --preset name is required")


def _run_config(args) -> RunConfig:
    cfg = RunConfig.from_dict(_document(args))
    if args.steps is not None:
        if args.steps <= 0:
            raise ConfigError(f"'--steps' must be positive, got {args.steps}")
        cfg = replace(cfg, steps=args.steps)
    return cfg


def _out_path(args, configured: str | None) -> Path:
    return Path(args.out or configured or DEFAULT_OUT[args.command])


def _write(path: Path, header, rows) -> None:
    tables.write(path, header, rows)
    log.info("wrote %s", path)


def cmd_simulate(args) -> int:
    cfg = _run_config(args)
    result = dynamics.run(cfg.spec, cfg.protocol, open_system=cfg.open_system, steps=cfg.steps,
                          samples=cfg.samples, hcf_sign=args.hcf_sign)
    _write(_out_path(args, cfg.output), *tables.trajectory_table(result))
    print(f"final_fidelity={tables.fmt(result.final_fidelity)}")
    return 0


def cmd_sweep(args) -> int:
    doc = _document(args)
    if args.steps is not None:
        doc["steps"] = args.steps
    sweep = SweepSpec.from_dict(doc)
    workers = args.workers if args.workers is not None else dynamics.default_workers()
    if workers < 1:
        raise ConfigError(f"'--workers' must be at least 1, got {workers}")
    rows = run_sweep(sweep, workers)
    _write(_out_path(args, sweep.output), sweep.header(), rows)
    if len(rows) == 1 and "final_fidelity" in sweep.observables:
        col = len(sweep.axes) + sweep.observables.index("final_fidelity")
        print(f"final_fidelity={tables.fmt(rows[0][col])}")
    print(f"cells={len(rows)}")
    return 0


def cmd_pulses(args) -> int:
    cfg = _run_config(args)
    table = invariant.pulse_table(cfg.protocol, samples=cfg.samples)
    _write(_out_path(args, cfg.output), *tables.pulse_rows(table))
    print(f"omega0={tables.fmt(table[:, 1:].max())}")
    return 0


def cmd_verify(args) -> int:
    results = verify.run_checks(hcf_sign=args.hcf_sign)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_CHECK if failed else 0


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "pulses": cmd_pulses,
            "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stap-sim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name != "verify":
            p.add_argument("--config", help="JSON config file")
            p.add_argument("--preset", help="named figure preset, e.g. fig7a")
            p.add_argument("--out", help="output CSV path")
            p.add_argument("--steps", type=int, help="RK4 steps over [0, t_f]")
        if name == "sweep":
            p.add_argument("--workers", type=int,
                           help="parallel processes (default $STAP_SIM_WORKERS or 1)")
        # test hook: flip the c2-side cavity-fiber coupling
        p.add_argument("--perturb-hcf", dest="hcf_sign", action="store_const", const=-1.0,
                       default=1.0, help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
