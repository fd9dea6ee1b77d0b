"""Command line entry point: ``sdioph <kind> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, SdiophError
from .harness import EXIT_USAGE, KINDS, ExperimentConfig, read_config_file, run_campaign

log = logging.getLogger("sdioph")

# flag dest -> config key
_FLAG_KEYS = {
    "primes": "primes",
    "d": "d",
    "n_min": "n_min",
    "n_max": "n_max",
    "n0": "n0",
    "psi": "psi",
    "alpha": "alpha",
    "measure": "measure",
    "samples": "samples",
    "seed": "seed",
    "precision": "precision",
    "format": "format",
    "out": "out",
    "T": "T",
    "min_height": "min_height",
    "points": "points",
    "threads": "threads",
    "dirichlet_exponent": "dirichlet_exponent",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdioph", description="S-arithmetic Diophantine approximation experiments.")
    p.add_argument("kind", choices=KINDS, help="campaign to run")
    p.add_argument("--config", help="key = value config file; flags override its keys")
    p.add_argument("--primes", help='finite places, e.g. "2,3" (may include "inf")')
    p.add_argument("--infty", action="store_true", default=None, help="add the real place")
    p.add_argument("--d", help="dimension")
    p.add_argument("--n-min", dest="n_min", help="first level (k for simplex1d)")
    p.add_argument("--n-max", dest="n_max", help="last level (N for bcsum)")
    p.add_argument("--n0", help="levels below n0 are flagged in survey rows")
    p.add_argument("--psi", help="pow:c,tau | powlog:c,tau,kappa | table:h=v,...")
    p.add_argument("--alpha", help='"auto" or a rational decay exponent')
    p.add_argument("--measure", help='e.g. "p:3 digits:0,2 d:1"')
    p.add_argument("--samples", help="sampled points for the survey")
    p.add_argument("--seed")
    p.add_argument("--precision", help="initial sampled digits per coordinate")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="output path, - for stdout")
    p.add_argument("--T", dest="T", help="Dirichlet bound")
    p.add_argument("--min-height", dest="min_height", help="smallest Dirichlet witness height")
    p.add_argument("--points", help="random points for the dirichlet campaign")
    p.add_argument("--threads")
    p.add_argument("--dirichlet-exponent", dest="dirichlet_exponent", choices=("inverse-d", "classical"))
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            log.setLevel(logging.INFO)
        values = read_config_file(args.config) if args.config else {}
        if args.infty:
            values["infty"] = "true"
        for dest, key in _FLAG_KEYS.items():
            raw = getattr(args, dest)
            if raw is not None:
                values[key] = raw
        config = ExperimentConfig().with_values(values)
        report = run_campaign(args.kind, config)
    except (SdiophError, OSError) as exc:
        print(f"sdioph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = report.render(config.format)
    if config.out == "-":
        sys.stdout.write(text)
    else:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if report.exit_code:
        print(f"sdioph: {args.kind} reported a violation", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
