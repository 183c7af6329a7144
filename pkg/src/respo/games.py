"""Two-player safety games solved by a linear-time attractor computation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numba
import numpy as np
from numba import njit, prange

from .errors import ValidationError

# the TBB layer in this environment is too old and only produces warnings
if not numba.config.THREADING_LAYER or numba.config.THREADING_LAYER == "default":
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

ALWAYS_SAFE = -1
ALWAYS_REACH = -2


@njit(cache=True, nogil=True)
def _attractor(pred_off, preds, outdeg, owner, mask, bad, engraved, init, stop_early):
    """Reach-attractor of ``bad``.

    ``owner[s]`` is an actor bit (Safe iff set in ``mask``), ALWAYS_SAFE or
    ALWAYS_REACH. ``engraved[s] >= 0`` restricts a Reach-owned ``s`` to the
    single successor ``engraved[s]``. With ``stop_early`` the search returns as
    soon as ``init`` is attracted, leaving the region incomplete.
    """
    n = outdeg.shape[0]
    attracted = np.zeros(n, np.uint8)
    count = outdeg.copy()
    queue = np.empty(n, np.int64)
    tail = 0
    for s in range(n):
        if bad[s]:
            attracted[s] = 1
            queue[tail] = s
            tail += 1
    if stop_early and attracted[init] == 1:
        return attracted
    head = 0
    while head < tail:
        t = queue[head]
        head += 1
        for k in range(pred_off[t], pred_off[t + 1]):
            p = preds[k]
            if attracted[p] == 1:
                continue
            o = owner[p]
            if o == -1 or (o >= 0 and (mask >> o) & 1 == 1):
                count[p] -= 1
                if count[p] > 0:
                    continue
            elif engraved[p] >= 0 and engraved[p] != t:
                continue
            attracted[p] = 1
            queue[tail] = p
            tail += 1
            if stop_early and p == init:
                return attracted
    return attracted


@njit(cache=True, parallel=True)
def _values_batch(masks, pred_off, preds, outdeg, owner, bad, engraved, init):
    out = np.empty(masks.shape[0], np.uint8)
    for k in prange(masks.shape[0]):
        att = _attractor(pred_off, preds, outdeg, owner, masks[k], bad, engraved, init, True)
        out[k] = 1 - att[init]
    return out


def coalition_values(masks, pred_off, preds, outdeg, owner, bad, engraved, init) -> np.ndarray:
    """Game value for each coalition bitmask in ``masks`` (parallel over masks)."""
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    if masks.size == 0:
        return np.zeros(0, dtype=np.uint8)
    return _values_batch(masks, pred_off, preds, outdeg, owner, bad, engraved, np.int64(init))


def set_threads(threads: int | None) -> None:
    if threads:
        numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))


def reverse_csr(num_states: int, offsets: np.ndarray, targets: np.ndarray):
    sources = np.repeat(np.arange(num_states, dtype=np.int64), np.diff(offsets))
    order = np.argsort(targets, kind="stable")
    pred_off = np.zeros(num_states + 1, dtype=np.int64)
    np.cumsum(np.bincount(targets, minlength=num_states), out=pred_off[1:])
    return pred_off, sources[order]


@dataclass(eq=False)
class SafetyGame:
    """Safety game over states ``0..num_states-1``.

    ``safe[s]`` tells whether Safe owns ``s``; everything else belongs to
    Reach, so the two ownership sets are disjoint by construction. Successor
    lists are CSR arrays without duplicates.
    """

    num_states: int
    offsets: np.ndarray
    targets: np.ndarray
    safe: np.ndarray
    initial: int
    bad: np.ndarray

    @classmethod
    def from_edges(
        cls,
        num_states: int,
        edges: Iterable[tuple[int, int]],
        safe_states: Iterable[int],
        initial: int,
        bad: Iterable[int],
        reach_states: Iterable[int] | None = None,
    ) -> "SafetyGame":
        n = num_states
        safe = np.zeros(n, dtype=bool)
        safe[list(safe_states)] = True
        if reach_states is not None:
            reach = np.zeros(n, dtype=bool)
            reach[list(reach_states)] = True
            if (safe & reach).any():
                raise ValidationError("Safe and Reach states overlap")
            if not (safe | reach).all():
                raise ValidationError("some states are owned by neither player")
        pairs = sorted(set((int(s), int(t)) for s, t in edges))
        # totality repair: dead ends get a self-loop
        has = {s for s, _ in pairs}
        pairs = sorted(pairs + [(s, s) for s in range(n) if s not in has])
        src = np.array([p[0] for p in pairs], dtype=np.int64)
        dst = np.array([p[1] for p in pairs], dtype=np.int64)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
        bad_mask = np.zeros(n, dtype=bool)
        bad_mask[list(bad)] = True
        return cls(n, offsets, dst, safe, int(initial), bad_mask)

    @property
    def safe_states(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.safe).tolist())

    @property
    def reach_states(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(~self.safe).tolist())

    def successors(self, s: int) -> np.ndarray:
        return self.targets[self.offsets[s]:self.offsets[s + 1]]

    def edges(self) -> list[tuple[int, int]]:
        src = np.repeat(np.arange(self.num_states), np.diff(self.offsets))
        return list(zip(src.tolist(), self.targets.tolist()))

    def _arrays(self):
        pred_off, preds = reverse_csr(self.num_states, self.offsets, self.targets)
        owner = np.where(self.safe, ALWAYS_SAFE, ALWAYS_REACH).astype(np.int64)
        outdeg = np.diff(self.offsets).astype(np.int64)
        no_engraving = np.full(self.num_states, -1, dtype=np.int64)
        return pred_off, preds, outdeg, owner, self.bad.astype(np.uint8), no_engraving


@dataclass(frozen=True, eq=False)
class WinningRegion:
    mask: np.ndarray

    @property
    def safe_wins(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.mask).tolist())

    def __contains__(self, s: int) -> bool:
        return bool(self.mask[s])


def reach_attractor(g: SafetyGame) -> np.ndarray:
    pred_off, preds, outdeg, owner, bad, eng = g._arrays()
    att = _attractor(pred_off, preds, outdeg, owner, np.int64(0), bad, eng, np.int64(g.initial), False)
    return att.astype(bool)


def solve(g: SafetyGame) -> WinningRegion:
    """Winning region of Safe: the complement of Reach's attractor to the bad set."""
    return WinningRegion(~reach_attractor(g))


def value(g: SafetyGame) -> int:
    pred_off, preds, outdeg, owner, bad, eng = g._arrays()
    att = _attractor(pred_off, preds, outdeg, owner, np.int64(0), bad, eng, np.int64(g.initial), True)
    return int(att[g.initial] == 0)


def extract_strategy(g: SafetyGame, w: WinningRegion) -> dict[int, int]:
    """Positional winning strategy: smallest successor staying in the region."""
    strategy = {}
    for s in np.flatnonzero(g.safe & w.mask).tolist():
        for t in g.successors(s).tolist():
            if w.mask[t]:
                strategy[s] = t
                break
    return strategy
