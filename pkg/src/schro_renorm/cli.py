"""Command line entry point: ``schro-renorm <experiment> [--config ...]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import experiments
from .config import load_config
from .errors import ConfigError, ResolutionError
from .results import all_passed, emit_results

log = logging.getLogger("schro_renorm")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML or JSON file with dotted keys")
    p.add_argument("--seed", type=int, help="override rng.seed")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-q", "--quiet", action="store_true", help="print only the final verdict line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schro-renorm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(experiments.EXPERIMENTS) + ["run-all"]:
        _common(sub.add_parser(name, help=f"run the {name} experiment"))
    return parser


def _constants_json(cfg) -> dict:
    rc = experiments.compute_constants(cfg)
    A = rc.A
    return {
        "z1": [rc.z1.real, rc.z1.imag],
        "cross_section": rc.cross_section,
        "identity_residual": rc.identity_residual,
        "A": A.as_array().tolist(),
        "A_stderr": A.stderr.tolist(),
        "A_samples": A.n_samples,
        "z2": [rc.z2.value.real, rc.z2.value.imag],
        "z2_stderr": [rc.z2.stderr_re, rc.z2.stderr_im],
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = load_config(args.config, rng_seed=args.seed, output_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    fn = experiments.run_all if args.command == "run-all" else experiments.EXPERIMENTS[args.command]
    try:
        records = fn(cfg)
    except (ConfigError, ResolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stem = args.command.replace("-", "_")
    paths = emit_results(records, cfg.output_dir, args.format, cfg, stem=stem)
    if not args.quiet:
        for r in records:
            print(r.summary())
        if args.command == "constants":
            print(json.dumps(_constants_json(cfg), indent=1))
        for p in paths:
            log.info("wrote %s", p)
    ok = all_passed(records)
    n_fail = sum(1 for r in records if r.is_verdict and not r.passed)
    print(f"{args.command}: {'all verdicts pass' if ok else f'{n_fail} verdict(s) failed'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
