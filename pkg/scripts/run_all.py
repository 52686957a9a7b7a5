"""Run every experiment on one config and write CSV plus manifest.

    python3 scripts/run_all.py [config.yaml] [--out DIR]
"""
import sys

from schro_renorm.cli import main

if __name__ == "__main__":
    argv = sys.argv[1:]
    if argv and not argv[0].startswith("-"):
        argv = ["--config", argv[0]] + argv[1:]
    sys.exit(main(["run-all"] + argv))
