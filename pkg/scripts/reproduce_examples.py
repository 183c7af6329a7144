"""Run the bundled example models and print their responsibility values.

    python scripts/reproduce_examples.py
"""

from __future__ import annotations

import sys
from pathlib import Path

from respo.cli import main

MODELS = Path(__file__).resolve().parent.parent / "models"

RUNS = [
    ("train station, forward", [MODELS / "train_station.ts"]),
    ("train station, backward", [MODELS / "train_station.ts", "--mode", "backward"]),
    ("window, module actors, backward",
     [MODELS / "window.rml", "--mode", "backward", "--counterexample", MODELS / "window.cex"]),
    ("drive to Vasteras, value actors on t", [MODELS / "sweden.rml", "--actors", "value:t"]),
    ("puzzle box, action actors", [MODELS / "puzzlebox.rml", "--actors", "action", "--clamp"]),
]


def run_all() -> int:
    worst = 0
    for title, args in RUNS:
        print(f"== {title}")
        worst = max(worst, main(["analyze", *map(str, args)]))
        print()
    return worst


if __name__ == "__main__":
    sys.exit(run_all())
