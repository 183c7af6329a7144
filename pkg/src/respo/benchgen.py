"""Synthetic model families for scaling experiments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .responsibility import ResponsibilitySignature
from .semantics import TransitionSystem, reachable

FAMILIES = ("linear", "random", "tree")


def _actor_names(m: int) -> list[str]:
    return [f"a{j}" for j in range(m)]


def _check(n: int, m: int) -> None:
    if m < 1 or n < m:
        raise ValidationError(f"need n >= m >= 1, got n={n}, m={m}")


def gen_linear(n: int, m: int, steps: Sequence[int] = (1, 2, 3)):
    """States ``0..n``; ``i -> min(i+k, n)`` for each step ``k``; ``n`` is bad.

    Actor ``j`` owns the states congruent to ``j`` modulo ``m``.
    """
    _check(n, m)
    steps = sorted(set(int(k) for k in steps))
    if not steps or steps[0] < 1:
        raise ValidationError("step sizes must be positive")
    size = n + 1
    base = np.arange(n, dtype=np.int64)
    src = np.concatenate([base] * len(steps))
    dst = np.concatenate([np.minimum(base + k, n) for k in steps])
    lab = np.repeat(np.arange(len(steps)), n)
    ts = TransitionSystem.from_arrays(size, 0, [n], src, dst, lab, [f"inc{k}" for k in steps])
    owner = np.arange(size, dtype=np.int64) % m
    return ts, ResponsibilitySignature.from_owner(_actor_names(m), owner)


def gen_random(n: int, m: int, seed: int = 0, bad_fraction: float = 0.01, degree: int = 6):
    """Every state gets ``degree`` distinct random successors other than itself.

    About ``bad_fraction`` of the states (at least one, never the initial
    state 0) are bad. If no bad state is reachable, one edge from a reachable
    state to a bad state is added. States are shuffled into ``m``
    actors whose sizes differ by at most one.
    """
    _check(n, m)
    if n < degree + 1:
        raise ValidationError(f"random family needs n >= {degree + 1}")
    rng = np.random.default_rng(seed)
    # distinct non-self successors, as offsets in 1..n-1; redraw rows with repeats
    offs = rng.integers(1, n, size=(n, degree))
    while True:
        srt = np.sort(offs, axis=1)
        dup = (srt[:, 1:] == srt[:, :-1]).any(axis=1)
        if not dup.any():
            break
        offs[dup] = rng.integers(1, n, size=(int(dup.sum()), degree))
    src = np.repeat(np.arange(n, dtype=np.int64), degree)
    dst = ((np.arange(n)[:, None] + offs) % n).ravel()
    lab = np.tile(np.arange(degree), n)
    num_bad = max(1, int(round(bad_fraction * n)))
    bad = rng.choice(np.arange(1, n), size=num_bad, replace=False)
    actions = [f"e{k}" for k in range(degree)]
    ts = TransitionSystem.from_arrays(n, 0, bad, src, dst, lab, actions)
    reach = reachable(ts)
    if not reach[ts.bad].any():
        s = int(rng.choice(np.flatnonzero(reach & ~ts.bad)))
        src = np.append(src, s)
        dst = np.append(dst, int(rng.choice(bad)))
        lab = np.append(lab, degree)
        ts = TransitionSystem.from_arrays(n, 0, bad, src, dst, lab, actions + ["fix"])
    perm = rng.permutation(n)
    owner = np.empty(n, dtype=np.int64)
    for j, chunk in enumerate(np.array_split(perm, m)):
        owner[chunk] = j
    return ts, ResponsibilitySignature.from_owner(_actor_names(m), owner)


def tree_leaves(n: int) -> list[int]:
    """Leaves of the heap-shaped tree on ``n`` nodes, left to right."""
    out, stack = [], [0]
    while stack:
        v = stack.pop()
        kids = [c for c in (2 * v + 1, 2 * v + 2) if c < n]
        if not kids:
            out.append(v)
        stack.extend(reversed(kids))
    return out


def gen_tree(n: int, m: int):
    """Complete binary tree on ``n`` nodes in heap order, rooted at 0.

    Leaves carry a self-loop; every tenth leaf counted from the left
    (positions 9, 19, ...) is bad. Actors are contiguous index blocks.
    """
    if n < 2:
        raise ValidationError("tree family needs n >= 2")
    _check(n, m)
    parents = np.arange(n, dtype=np.int64)
    src, dst, lab = [], [], []
    for side, off in ((0, 1), (1, 2)):
        kid = 2 * parents + off
        ok = kid < n
        src.append(parents[ok])
        dst.append(kid[ok])
        lab.append(np.full(ok.sum(), side))
    leaves = np.array(tree_leaves(n), dtype=np.int64)
    src.append(leaves)
    dst.append(leaves)
    lab.append(np.full(leaves.size, 2))
    bad = leaves[9::10]
    ts = TransitionSystem.from_arrays(
        n, 0, bad, np.concatenate(src), np.concatenate(dst), np.concatenate(lab),
        ["left", "right", "stay"],
    )
    owner = np.empty(n, dtype=np.int64)
    for j, chunk in enumerate(np.array_split(np.arange(n), m)):
        owner[chunk] = j
    return ts, ResponsibilitySignature.from_owner(_actor_names(m), owner)


@dataclass(frozen=True)
class BenchSpec:
    family: str
    n: int
    m: int
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}")
        _check(self.n, self.m)

    def generate(self):
        if self.family == "linear":
            return gen_linear(self.n, self.m)
        if self.family == "random":
            return gen_random(self.n, self.m, self.seed)
        return gen_tree(self.n, self.m)
