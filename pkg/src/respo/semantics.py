"""Explicit labeled transition systems and the operational semantics of programs."""

from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DoesNotEndInBad,
    FormatError,
    NotARun,
    NotLoopFree,
    StateSpaceExceeded,
    UnknownState,
    UpdateOutOfRange,
    ValidationError,
)
from .rml import BoolConst, BoolExpr, Program, compile_expr

IDLE = "__idle"
DEFAULT_MAX_STATES = 10**7


def default_max_states() -> int:
    env = os.environ.get("RESPO_MAX_STATES")
    return int(env) if env else DEFAULT_MAX_STATES


@dataclass(eq=False)
class TransitionSystem:
    """Transitions are stored as CSR arrays sorted by (source, target).

    There is at most one edge per (source, target) pair; ``labels`` holds an
    index into ``actions``. Bad states are absorbing and every state has a
    successor (see :meth:`from_arrays`).
    """

    num_states: int
    initial: int
    bad: np.ndarray
    offsets: np.ndarray
    targets: np.ndarray
    labels: np.ndarray
    actions: tuple[str, ...]
    variables: tuple[str, ...] = ()
    valuations: list[tuple[int, ...]] | None = None
    completed: tuple[int, ...] = field(default=())

    @classmethod
    def from_arrays(
        cls,
        num_states: int,
        initial: int,
        bad,
        src,
        dst,
        labels,
        actions: Sequence[str],
        variables: Sequence[str] = (),
        valuations: list[tuple[int, ...]] | None = None,
    ) -> "TransitionSystem":
        """Normalise raw edges into a system.

        Outgoing edges of bad states are replaced by an ``__idle`` self-loop,
        states without successors get the same self-loop, and parallel edges
        keep the lexicographically smallest action name.
        """
        n = int(num_states)
        if not 0 <= initial < n:
            raise ValidationError(f"initial state {initial} out of range")
        bad_mask = np.zeros(n, dtype=bool)
        bad_arr = np.asarray(bad)
        if bad_arr.dtype == bool and bad_arr.shape == (n,):
            bad_mask |= bad_arr
        elif bad_arr.size:
            bad_mask[bad_arr.astype(np.int64)] = True
        actions = list(actions)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        lab = np.asarray(labels, dtype=np.int64)
        if src.size and (src.min() < 0 or src.max() >= n or dst.min() < 0 or dst.max() >= n):
            raise ValidationError("edge endpoint out of range")
        keep = ~bad_mask[src]
        src, dst, lab = src[keep], dst[keep], lab[keep]
        has_out = np.zeros(n, dtype=bool)
        has_out[src] = True
        loops = np.flatnonzero(~has_out)
        completed = tuple(int(s) for s in loops if not bad_mask[s])
        if loops.size:
            if IDLE not in actions:
                actions.append(IDLE)
            idle = actions.index(IDLE)
            src = np.concatenate([src, loops])
            dst = np.concatenate([dst, loops])
            lab = np.concatenate([lab, np.full(loops.size, idle)])
        rank = np.empty(len(actions), dtype=np.int64)
        rank[np.argsort(np.array(actions, dtype=object), kind="stable")] = np.arange(len(actions))
        order = np.lexsort((rank[lab] if lab.size else lab, dst, src))
        src, dst, lab = src[order], dst[order], lab[order]
        if src.size:
            first = np.ones(src.size, dtype=bool)
            first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
            src, dst, lab = src[first], dst[first], lab[first]
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
        return cls(
            num_states=n,
            initial=int(initial),
            bad=bad_mask,
            offsets=offsets,
            targets=dst.astype(np.int32),
            labels=lab.astype(np.int32),
            actions=tuple(actions),
            variables=tuple(variables),
            valuations=valuations,
            completed=completed,
        )

    @classmethod
    def from_edges(
        cls,
        num_states: int,
        initial: int,
        bad: Iterable[int],
        edges: Iterable[tuple[int, int, str]],
        **kw,
    ) -> "TransitionSystem":
        edges = list(edges)
        actions: dict[str, int] = {}
        for _, _, a in edges:
            actions.setdefault(a, len(actions))
        return cls.from_arrays(
            num_states,
            initial,
            np.fromiter(bad, dtype=np.int64),
            [e[0] for e in edges],
            [e[1] for e in edges],
            [actions[e[2]] for e in edges],
            list(actions),
            **kw,
        )

    # -- queries

    @property
    def num_transitions(self) -> int:
        return int(self.targets.size)

    @property
    def sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.num_states, dtype=np.int32), np.diff(self.offsets))

    def successors(self, s: int) -> np.ndarray:
        return self.targets[self.offsets[s]:self.offsets[s + 1]]

    def out_edges(self, s: int) -> Iterator[tuple[int, str]]:
        lo, hi = self.offsets[s], self.offsets[s + 1]
        for t, a in zip(self.targets[lo:hi], self.labels[lo:hi]):
            yield int(t), self.actions[a]

    def edges(self) -> Iterator[tuple[int, int, str]]:
        for s, t, a in zip(self.sources.tolist(), self.targets.tolist(), self.labels.tolist()):
            yield s, t, self.actions[a]

    def bad_states(self) -> list[int]:
        return np.flatnonzero(self.bad).tolist()

    @cached_property
    def predecessors(self) -> tuple[np.ndarray, np.ndarray]:
        """Reverse CSR: ``(offsets, sources)``."""
        order = np.argsort(self.targets, kind="stable")
        preds = self.sources[order].astype(np.int32)
        offsets = np.zeros(self.num_states + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.targets, minlength=self.num_states), out=offsets[1:])
        return offsets, preds

    @cached_property
    def state_index(self) -> dict[tuple[int, ...], int]:
        if self.valuations is None:
            raise ValidationError("transition system has no variable valuations")
        return {v: i for i, v in enumerate(self.valuations)}

    def valuation(self, s: int) -> dict[str, int]:
        if self.valuations is None:
            raise ValidationError("transition system has no variable valuations")
        return dict(zip(self.variables, self.valuations[s]))

    def describe(self, s: int) -> str:
        if self.valuations is None:
            return f"s{s}"
        return " & ".join(f"{v}={x}" for v, x in zip(self.variables, self.valuations[s]))

    def same_as(self, other: "TransitionSystem") -> bool:
        return (
            self.num_states == other.num_states
            and self.initial == other.initial
            and np.array_equal(self.bad, other.bad)
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.targets, other.targets)
            and [self.actions[a] for a in self.labels] == [other.actions[a] for a in other.labels]
            and self.variables == other.variables
            and self.valuations == other.valuations
        )


# --------------------------------------------------------------------------
# program semantics

class _Compiled:
    def __init__(self, prog: Program, invariant: BoolExpr | None):
        self.prog = prog
        decls = prog.decls
        self.names = tuple(d.name for d in decls)
        self.index = {d.name: i for i, d in enumerate(decls)}
        self.lower = [d.lower for d in decls]
        self.upper = [d.upper for d in decls]
        self.init = tuple(d.init for d in decls)
        inv = invariant if invariant is not None else prog.safety_invariant
        if inv is None:
            raise ValidationError("no safety invariant given")
        self.invariant = compile_expr(inv, self.index)
        self.actions = prog.actions()
        # action -> [(module index, [(command index, guard, [(var index, update)])])]
        self.by_action: dict[str, list] = {}
        for a in self.actions:
            parts = []
            for mi in prog.modules_with(a):
                cmds = []
                for ci, c in enumerate(prog.modules[mi].commands):
                    if prog.action_of(mi, ci) != a:
                        continue
                    ups = [(self.index[v], compile_expr(r, self.index)) for v, r in c.updates]
                    cmds.append((ci, compile_expr(c.guard, self.index), ups))
                parts.append((mi, cmds))
            self.by_action[a] = parts

    def selections(self, s: tuple[int, ...]):
        for a in self.actions:
            enabled = []
            for mi, cmds in self.by_action[a]:
                here = [(mi, ci, ups) for ci, g, ups in cmds if g(s)]
                if not here:
                    break
                enabled.append(here)
            else:
                yield from ((a, combo) for combo in itertools.product(*enabled))

    def apply(self, s: tuple[int, ...], combo, clamp: bool) -> tuple[int, ...]:
        out = list(s)
        for _, _, ups in combo:
            for vi, f in ups:
                v = f(s)
                if not self.lower[vi] <= v <= self.upper[vi]:
                    if not clamp:
                        raise UpdateOutOfRange(
                            f"update sets {self.names[vi]}={v} outside "
                            f"[{self.lower[vi]}..{self.upper[vi]}] in state "
                            + " & ".join(f"{n}={x}" for n, x in zip(self.names, s))
                        )
                    v = min(max(v, self.lower[vi]), self.upper[vi])
                out[vi] = v
        return tuple(out)


def _as_tuple(prog: Program, s) -> tuple[int, ...]:
    if isinstance(s, Mapping):
        return tuple(s[v] for v in prog.variables)
    return tuple(s)


def enabled_selections(prog: Program, s) -> set[tuple[str, frozenset[tuple[int, int]]]]:
    """All (action, command set) pairs executable in ``s``.

    Commands are identified by (module index, command index).
    """
    comp = _Compiled(prog, prog.safety_invariant or _FALSE)
    return {
        (a, frozenset((mi, ci) for mi, ci, _ in combo))
        for a, combo in comp.selections(_as_tuple(prog, s))
    }


def successors(prog: Program, s, *, clamp: bool = False) -> set[tuple[str, tuple[int, ...]]]:
    comp = _Compiled(prog, prog.safety_invariant or _FALSE)
    st = _as_tuple(prog, s)
    return {(a, comp.apply(st, combo, clamp)) for a, combo in comp.selections(st)}


def build_ts(
    prog: Program,
    invariant: BoolExpr | None = None,
    *,
    clamp: bool = False,
    max_states: int | None = None,
) -> TransitionSystem:
    """Reachable fragment of the semantics of ``prog`` under ``invariant``.

    States are numbered by lexicographic order of their valuations (variables
    in declaration order).
    """
    cap = default_max_states() if max_states is None else max_states
    comp = _Compiled(prog, invariant)
    act_id = {a: i for i, a in enumerate(comp.actions)}
    seen = {comp.init: 0}
    order = [comp.init]
    src, dst, lab = [], [], []
    queue = deque([comp.init])
    while queue:
        s = queue.popleft()
        i = seen[s]
        if comp.invariant(s):
            continue
        for a, combo in comp.selections(s):
            t = comp.apply(s, combo, clamp)
            j = seen.get(t)
            if j is None:
                j = seen[t] = len(order)
                if j >= cap:
                    raise StateSpaceExceeded(f"more than {cap} reachable states")
                order.append(t)
                queue.append(t)
            src.append(i)
            dst.append(j)
            lab.append(act_id[a])
    perm = sorted(range(len(order)), key=order.__getitem__)
    new_id = np.empty(len(order), dtype=np.int64)
    new_id[perm] = np.arange(len(order))
    vals = [order[p] for p in perm]
    bad = np.array([bool(comp.invariant(v)) for v in vals], dtype=bool)
    return TransitionSystem.from_arrays(
        len(vals),
        int(new_id[0]),
        bad,
        new_id[np.asarray(src, dtype=np.int64)] if src else [],
        new_id[np.asarray(dst, dtype=np.int64)] if dst else [],
        lab,
        comp.actions,
        variables=comp.names,
        valuations=vals,
    )


_FALSE = BoolConst(False)


# --------------------------------------------------------------------------
# counterexamples

@dataclass(frozen=True)
class Counterexample:
    path: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.path)


def find_counterexample(ts: TransitionSystem) -> Counterexample | None:
    """Shortest path from the initial state into the bad set.

    Among shortest paths the lexicographically smallest index sequence wins:
    BFS with sorted successor lists discovers states in exactly that order.
    """
    if ts.bad[ts.initial]:
        return Counterexample((ts.initial,))
    parent = np.full(ts.num_states, -1, dtype=np.int64)
    parent[ts.initial] = ts.initial
    queue = deque([ts.initial])
    while queue:
        s = queue.popleft()
        for t in ts.successors(s).tolist():
            if parent[t] >= 0:
                continue
            parent[t] = s
            if ts.bad[t]:
                path = [t]
                while path[-1] != ts.initial:
                    path.append(int(parent[path[-1]]))
                return Counterexample(tuple(reversed(path)))
            queue.append(t)
    return None


def validate_counterexample(ts: TransitionSystem, path: Sequence[int]) -> Counterexample:
    path = [int(s) for s in path]
    if not path:
        raise NotARun("empty counterexample")
    for s in path:
        if not 0 <= s < ts.num_states:
            raise UnknownState(f"state {s} does not exist")
    if path[0] != ts.initial:
        raise NotARun("counterexample does not start in the initial state")
    for i, (s, t) in enumerate(zip(path, path[1:])):
        if t not in set(ts.successors(s).tolist()):
            raise NotARun(f"no transition from step {i} ({ts.describe(s)}) to {ts.describe(t)}")
    if len(set(path)) != len(path):
        raise NotLoopFree("counterexample visits a state twice")
    if not ts.bad[path[-1]]:
        raise DoesNotEndInBad("counterexample does not end in a bad state")
    return Counterexample(tuple(path))


def parse_counterexample(text: str) -> list[dict[str, int]]:
    """Read the ``var=value & var=value`` per line format."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        row = {}
        for part in line.split("&"):
            name, eq, value = part.partition("=")
            name = name.strip()
            try:
                if not eq or not name:
                    raise ValueError
                row[name] = int(value)
            except ValueError:
                raise FormatError(f"malformed assignment {part.strip()!r}", lineno) from None
        out.append(row)
    return out


def resolve_counterexample(ts: TransitionSystem, rows: list[dict[str, int]]) -> list[int]:
    path = []
    for row in rows:
        if set(row) != set(ts.variables):
            missing = sorted(set(ts.variables) - set(row))
            extra = sorted(set(row) - set(ts.variables))
            raise UnknownState(f"state must assign exactly the model variables (missing {missing}, unknown {extra})")
        key = tuple(row[v] for v in ts.variables)
        if key not in ts.state_index:
            raise UnknownState(f"state {row} is not reachable")
        path.append(ts.state_index[key])
    return path


def format_counterexample(ts: TransitionSystem, cex: Counterexample | Sequence[int]) -> str:
    path = cex.path if isinstance(cex, Counterexample) else cex
    return "".join(ts.describe(s) + "\n" for s in path)


def reachable(ts: TransitionSystem, start: Iterable[int] | None = None) -> np.ndarray:
    """Boolean mask of states reachable from ``start`` (default: initial)."""
    seen = np.zeros(ts.num_states, dtype=bool)
    stack = [ts.initial] if start is None else list(start)
    for s in stack:
        seen[s] = True
    while stack:
        s = stack.pop()
        for t in ts.successors(s).tolist():
            if not seen[t]:
                seen[t] = True
                stack.append(t)
    return seen
