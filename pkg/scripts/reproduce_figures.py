"""Regenerate the data behind every reference figure as CSV/JSON.

Usage: python scripts/reproduce_figures.py [OUTDIR] [--only NAME ...]

Each figure is one CLI invocation; the mapping is kept in FIGURES so the
README and the integration tests share it.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from hematodyn.cli import main as cli_main

# name -> CLI argv, with {out} replaced by the figure's output path
FIGURES = {
    "zk_profiles": ["chart", "--n", "12", "--tau-max", "14", "--out", "{out}/chart.json",
                    "--zk-csv", "{out}"],
    "stable_3p5": ["simulate", "--tau", "3.5", "--history", "1,1", "--out", "{out}"],
    "onset_4p53": ["simulate", "--tau", "4.53", "--history", "1,1", "--out", "{out}"],
    "oscillation_7": ["simulate", "--tau", "7", "--history", "1,1", "--out", "{out}"],
    "stable_9": ["simulate", "--tau", "9", "--history", "1,1", "--out", "{out}"],
    "extinction_14": ["simulate", "--tau", "14", "--history", "1,1", "--out", "{out}"],
}


def reproduce(name: str, root: Path) -> int:
    out = root / name
    out.mkdir(parents=True, exist_ok=True)
    argv = [a.replace("{out}", str(out)) for a in FIGURES[name]]
    return cli_main(argv)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", nargs="?", default="figures")
    ap.add_argument("--only", nargs="*", choices=sorted(FIGURES))
    args = ap.parse_args(argv)
    root = Path(args.outdir)
    status = 0
    for name in args.only or FIGURES:
        print(f"== {name}", file=sys.stderr)
        status = max(status, reproduce(name, root))
    return status


if __name__ == "__main__":
    sys.exit(main())
