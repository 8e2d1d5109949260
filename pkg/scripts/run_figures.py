"""Regenerate every figure dataset and print the anchor verdicts.

    python scripts/run_figures.py --outdir out/figures
"""
import argparse
import sys

from magsense.cli import main as cli_main
from magsense.figures import FIGURE_IDS


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", default="out/figures")
    parser.add_argument("--figures", nargs="*", default=list(FIGURE_IDS), choices=FIGURE_IDS)
    args = parser.parse_args(argv)
    status = 0
    for fig in args.figures:
        print(f"== {fig}")
        status |= cli_main(["reproduce", "--figure", fig, "--outdir", args.outdir])
    return status


if __name__ == "__main__":
    sys.exit(main())
