"""Command-line entry point: ``qmh --scenario NAME [options]``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from . import report as report_io
from .config import FORMATS, SCENARIOS, ConfigError, build_config, load_config_file
from .scenarios import run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("qmontyhall")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2 anyway; keep the message format
        self.print_usage(sys.stderr)
        raise ConfigError(message, "command line")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qmh", description="Quantum Monty Hall discard protocol: exact values, simulations, reports.")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--trials", dest="n_trials", type=int)
    p.add_argument("--seed", type=int, help="64-bit seed (default: $QMH_SEED, else 0)")
    p.add_argument("--stream", type=int, help="RNG stream id")
    p.add_argument("--epsilon", type=float, help="white-noise weight in [0, 1]")
    p.add_argument("--eta", type=float, help="per-stage detector efficiency in [0, 1]")
    p.add_argument("--confidence", type=float, help="Wilson interval confidence in (0.5, 1)")
    p.add_argument("--target-q", dest="target_q", type=float, help="adversarial_mc: Q the detector bias should fake")
    p.add_argument("--z", type=float, help="power_plan: number of standard errors of separation")
    p.add_argument("--experiments", type=int, help="power_plan: simulated experiments for the check")
    p.add_argument("--sweep-points", dest="sweep_points", type=int, help="noise_sweep: grid size on [0, 1]")
    p.add_argument("--circuit", help="photonic: discard circuit, e.g. 'bs(1,3,1); loss(0,4,0.5); loss(2,5,0.5)'")
    p.add_argument("--ancilla-modes", dest="ancilla_modes", type=int, help="photonic: ancilla modes of --circuit")
    p.add_argument("--format", dest="output_format", choices=FORMATS)
    p.add_argument("--out", dest="output_path", help="write the report here instead of stdout")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        flags = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
        file_values = load_config_file(args.config) if args.config else {}
        cfg = build_config(file_values, flags)
    except ConfigError as exc:
        print(f"qmh: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    log.info("running scenario %s", cfg.scenario)
    try:
        rep = run_scenario(cfg)
        text = report_io.dumps(rep, cfg.output_format)
        if cfg.output_path:
            with open(cfg.output_path, "w", encoding="utf-8") as fh:
                fh.write(text)
            log.info("wrote %s", cfg.output_path)
        else:
            sys.stdout.write(text)
    except Exception as exc:  # noqa: BLE001 - any failure past validation is a runtime error
        print(f"qmh: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
