"""Runtime scaling of exact responsibility on the synthetic families.

Two sweeps: wall time against the number of actors at fixed size, and wall
time against the number of states at a fixed actor count. Each point is the
best of ``--repeats`` runs with a fresh coalition oracle.

    python scripts/scaling.py --family linear --out results/scaling.json
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

import numpy as np

from respo.benchgen import BenchSpec
from respo.games import set_threads
from respo.responsibility import CoalitionOracle, shapley_exact


def time_exact(ts, sig, repeats: int = 1) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        shapley_exact(CoalitionOracle(ts, sig))
        best = min(best, time.perf_counter() - start)
    return best


def warm_up() -> None:
    ts, sig = BenchSpec("linear", 10, 2).generate()
    shapley_exact(CoalitionOracle(ts, sig))


def actor_sweep(family="linear", n=100_000, ms=range(2, 17), seed=0, repeats=3, log=print):
    rows = []
    for m in ms:
        ts, sig = BenchSpec(family, n, m, seed).generate()
        t = time_exact(ts, sig, repeats if m < 12 else 1)
        rows.append((m, t))
        log(f"  m={m:2d}  n={n}  {t:9.3f} s")
    return rows


def size_sweep(family="linear", m=7, ns=range(50_000, 500_001, 50_000), seed=0, repeats=3, log=print):
    rows = []
    for n in ns:
        ts, sig = BenchSpec(family, n, m, seed).generate()
        t = time_exact(ts, sig, repeats)
        rows.append((n, t))
        log(f"  n={n:7d}  m={m}  {t:9.3f} s")
    return rows


def r_squared(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    return 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="linear", choices=("linear", "random", "tree"))
    ap.add_argument("--n", type=int, default=100_000, help="size for the actor sweep")
    ap.add_argument("--max-m", type=int, default=16)
    ap.add_argument("--m", type=int, default=7, help="actor count for the size sweep")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args(argv)
    set_threads(args.threads)
    warm_up()
    print(f"actor sweep ({args.family}, n={args.n})")
    by_m = actor_sweep(args.family, args.n, range(2, args.max_m + 1), repeats=args.repeats)
    r2_m = r_squared([m for m, _ in by_m], [np.log(t) for _, t in by_m])
    print(f"  R^2 of log(time) vs m: {r2_m:.4f}")
    print(f"size sweep ({args.family}, m={args.m})")
    by_n = size_sweep(args.family, args.m, repeats=args.repeats)
    r2_n = r_squared([n for n, _ in by_n], [t for _, t in by_n])
    print(f"  R^2 of time vs n: {r2_n:.4f}")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(json.dumps({
            "family": args.family,
            "actor_sweep": {"n": args.n, "points": by_m, "r2_log_time": r2_m},
            "size_sweep": {"m": args.m, "points": by_n, "r2_time": r2_n},
        }, indent=2) + "\n")


if __name__ == "__main__":
    main()
