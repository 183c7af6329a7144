"""Forward and backward Shapley responsibility of actors in a transition system."""

from __future__ import annotations

import itertools
import math
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import SignatureError, TooManyActors
from .games import ALWAYS_REACH, ALWAYS_SAFE, SafetyGame, coalition_values
from .semantics import Counterexample, TransitionSystem, validate_counterexample

DEFAULT_MAX_ACTORS = 30

AUX = ALWAYS_SAFE
ADV = ALWAYS_REACH


# --------------------------------------------------------------------------
# signatures

@dataclass(frozen=True, eq=False)
class ResponsibilitySignature:
    """Actors, auxiliary and adversarial states, stored as one owner array.

    ``owner[s]`` is the index of the actor containing ``s``, ``AUX`` or ``ADV``.
    """

    names: tuple[str, ...]
    owner: np.ndarray
    dropped: tuple[str, ...] = ()

    @classmethod
    def from_sets(
        cls,
        num_states: int,
        actors: Mapping[str, Iterable[int]] | Sequence[tuple[str, Iterable[int]]],
        aux: Iterable[int] = (),
        adv: Iterable[int] = (),
        *,
        drop_empty: bool = False,
    ) -> "ResponsibilitySignature":
        items = list(actors.items()) if isinstance(actors, Mapping) else list(actors)
        owner = np.full(num_states, -3, dtype=np.int64)
        names, dropped = [], []

        def claim(states, tag, what):
            idx = np.asarray(sorted(set(int(s) for s in states)), dtype=np.int64)
            if idx.size and (idx[0] < 0 or idx[-1] >= num_states):
                raise SignatureError(f"{what} refers to a state outside 0..{num_states - 1}")
            if (owner[idx] != -3).any():
                s = int(idx[owner[idx] != -3][0])
                raise SignatureError(f"state {s} assigned twice ({what})")
            owner[idx] = tag
            return idx.size

        claim(aux, AUX, "aux")
        claim(adv, ADV, "adv")
        for name, states in items:
            if name in names:
                raise SignatureError(f"duplicate actor name {name!r}")
            states = list(states)
            if not states:
                if drop_empty:
                    dropped.append(name)
                    continue
                raise SignatureError(f"actor {name!r} is empty")
            claim(states, len(names), f"actor {name!r}")
            names.append(name)
        if (owner == -3).any():
            s = int(np.flatnonzero(owner == -3)[0])
            raise SignatureError(f"state {s} belongs to no actor, aux or adv")
        return cls(tuple(names), owner, tuple(dropped))

    @classmethod
    def from_owner(cls, names: Sequence[str], owner) -> "ResponsibilitySignature":
        owner = np.asarray(owner, dtype=np.int64)
        if ((owner < ADV) | (owner >= len(names))).any():
            raise SignatureError("owner array refers to unknown actors")
        counts = np.bincount(owner[owner >= 0], minlength=len(names))
        if (counts == 0).any():
            raise SignatureError(f"actor {names[int(np.flatnonzero(counts == 0)[0])]!r} is empty")
        return cls(tuple(names), owner)

    @property
    def num_states(self) -> int:
        return int(self.owner.size)

    def index(self, actor: str | int) -> int:
        return actor if isinstance(actor, (int, np.integer)) else self.names.index(actor)

    def actor_states(self, actor: str | int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.owner == self.index(actor)).tolist())

    @property
    def aux(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.owner == AUX).tolist())

    @property
    def adv(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.owner == ADV).tolist())

    def as_sets(self) -> dict[str, frozenset[int]]:
        return {n: self.actor_states(i) for i, n in enumerate(self.names)}


def coalition_mask(sig_names: Sequence[str], coalition) -> int:
    if isinstance(coalition, (int, np.integer)):
        return int(coalition)
    mask = 0
    for a in coalition:
        mask |= 1 << (a if isinstance(a, (int, np.integer)) else sig_names.index(a))
    return mask


def mask_members(names: Sequence[str], mask: int) -> tuple[str, ...]:
    return tuple(n for i, n in enumerate(names) if mask >> i & 1)


def flatten(sig: ResponsibilitySignature, coalition) -> frozenset[int]:
    """Union of the state sets of the actors in ``coalition``."""
    mask = coalition_mask(sig.names, coalition)
    own = sig.owner
    sel = (own >= 0) & ((mask >> np.maximum(own, 0)) & 1 == 1)
    return frozenset(np.flatnonzero(sel).tolist())


# --------------------------------------------------------------------------
# coalition games

def _safe_mask(sig: ResponsibilitySignature, coalition) -> np.ndarray:
    safe = sig.owner == AUX
    safe[list(flatten(sig, coalition))] = True
    return safe


def build_forward_game(ts: TransitionSystem, sig: ResponsibilitySignature, coalition) -> SafetyGame:
    safe = _safe_mask(sig, coalition)
    return SafetyGame(ts.num_states, ts.offsets, ts.targets.astype(np.int64), safe, ts.initial, ts.bad)


def build_backward_game(
    ts: TransitionSystem,
    sig: ResponsibilitySignature,
    cex: Counterexample | Sequence[int],
    coalition,
) -> SafetyGame:
    """Forward game with the counterexample engraved.

    Every counterexample state outside the coalition and the auxiliary states
    keeps only its edge to the next counterexample state.
    """
    path = validate_counterexample(ts, cex.path if isinstance(cex, Counterexample) else cex).path
    safe = _safe_mask(sig, coalition)
    forced = {s: t for s, t in zip(path, path[1:]) if not safe[s]}
    edges = [(s, t) for s, t, _ in ts.edges() if s not in forced or forced[s] == t]
    return SafetyGame.from_edges(ts.num_states, edges, np.flatnonzero(safe).tolist(), ts.initial,
                                 ts.bad_states())


class CoalitionOracle:
    """Memoised cooperative game ``C -> val(Game(C))`` over a signature's actors.

    Coalitions are bitmasks over ``sig.names``. Safe for concurrent use; the
    memo is guarded by a lock and values are pure functions of the mask.
    """

    def __init__(
        self,
        ts: TransitionSystem,
        sig: ResponsibilitySignature,
        mode: str = "forward",
        counterexample: Counterexample | Sequence[int] | None = None,
        *,
        max_actors: int = DEFAULT_MAX_ACTORS,
    ):
        if sig.num_states != ts.num_states:
            raise SignatureError(
                f"signature covers {sig.num_states} states, system has {ts.num_states}"
            )
        if len(sig.names) > max_actors:
            raise TooManyActors(f"{len(sig.names)} actors exceed the cap of {max_actors}")
        if mode not in ("forward", "backward"):
            raise ValueError(f"unknown mode {mode!r}")
        self.ts, self.sig, self.mode = ts, sig, mode
        self.names = sig.names
        self.engraved = np.full(ts.num_states, -1, dtype=np.int64)
        self.counterexample = None
        if mode == "backward":
            if counterexample is None:
                raise SignatureError("backward mode needs a counterexample")
            path = counterexample.path if isinstance(counterexample, Counterexample) else counterexample
            self.counterexample = validate_counterexample(ts, path)
            p = self.counterexample.path
            self.engraved[list(p[:-1])] = list(p[1:])
        pred_off, preds = ts.predecessors
        self._arrays = (
            pred_off,
            preds.astype(np.int64),
            np.diff(ts.offsets).astype(np.int64),
            sig.owner,
            ts.bad.astype(np.uint8),
            self.engraved,
            ts.initial,
        )
        self._memo: dict[int, int] = {}
        self._lock = threading.Lock()
        self.evaluations = 0

    @property
    def n(self) -> int:
        return len(self.names)

    def mask(self, coalition) -> int:
        return coalition_mask(self.names, coalition)

    def gamma(self, coalition) -> int:
        return int(self.gamma_many([self.mask(coalition)])[0])

    def gamma_many(self, masks) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        with self._lock:
            todo = np.unique([m for m in masks.tolist() if m not in self._memo]).astype(np.int64)
        if todo.size:
            vals = coalition_values(todo, *self._arrays)
            with self._lock:
                for m, v in zip(todo.tolist(), vals.tolist()):
                    if m not in self._memo:
                        self._memo[m] = v
                        self.evaluations += 1
        with self._lock:
            return np.array([self._memo[m] for m in masks.tolist()], dtype=np.uint8)

    def all_values(self) -> np.ndarray:
        """Values of all ``2**n`` coalitions, indexed by mask.

        Coalitions are submitted in Gray-code order so consecutive games
        differ by one actor.
        """
        i = np.arange(1 << self.n, dtype=np.int64)
        gray = i ^ (i >> 1)
        out = np.empty(1 << self.n, dtype=np.uint8)
        out[gray] = self.gamma_many(gray)
        return out

    def game(self, coalition) -> SafetyGame:
        if self.mode == "forward":
            return build_forward_game(self.ts, self.sig, coalition)
        return build_backward_game(self.ts, self.sig, self.counterexample, coalition)


class TabularGame:
    """A simple cooperative game given by a Python predicate on coalitions."""

    def __init__(self, names: Sequence[str], fn: Callable[[frozenset[str]], int]):
        self.names = tuple(names)
        self.fn = fn
        self.evaluations = 0
        self._memo: dict[int, int] = {}
        self.mode = "custom"

    @property
    def n(self) -> int:
        return len(self.names)

    def mask(self, coalition) -> int:
        return coalition_mask(self.names, coalition)

    def gamma(self, coalition) -> int:
        return int(self.gamma_many([self.mask(coalition)])[0])

    def gamma_many(self, masks) -> np.ndarray:
        out = []
        for m in np.asarray(masks, dtype=np.int64).tolist():
            if m not in self._memo:
                self._memo[m] = int(self.fn(frozenset(mask_members(self.names, m))))
                self.evaluations += 1
            out.append(self._memo[m])
        return np.array(out, dtype=np.uint8)

    def all_values(self) -> np.ndarray:
        return self.gamma_many(np.arange(1 << self.n))


def gamma(oracle, coalition) -> int:
    return oracle.gamma(coalition)


# --------------------------------------------------------------------------
# reports

@dataclass
class ActorResult:
    name: str
    value: Fraction | None = None
    mean: float | None = None
    half_width: float | None = None
    samples: int | None = None
    witness: tuple[str, ...] | None = None


@dataclass
class ResponsibilityReport:
    mode: str
    algorithm: str
    actors: list[ActorResult]
    gamma_empty: int
    gamma_full: int
    coalitions_evaluated: int
    wall_ms: float
    warnings: list[str] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def values(self) -> dict[str, Fraction | float]:
        return {a.name: a.value if a.value is not None else a.mean for a in self.actors}

    def __getitem__(self, name: str) -> Fraction | float:
        return self.values()[name]

    def positive(self) -> list[str]:
        return [n for n, v in self.values().items() if v > 0]

    def to_json_dict(self, *, timing: bool = True, witnesses: bool = False) -> dict:
        actors = {}
        for a in self.actors:
            if a.value is not None:
                actors[a.name] = {
                    "value": str(a.value),
                    "value_num": a.value.numerator,
                    "value_den": a.value.denominator,
                }
            else:
                actors[a.name] = {"mean": a.mean, "half_width": a.half_width, "samples": a.samples}
        out = {
            "actors": actors,
            "mode": self.mode,
            "algorithm": self.algorithm,
            "gamma_empty": self.gamma_empty,
            "gamma_full": self.gamma_full,
            "coalitions_evaluated": self.coalitions_evaluated,
            "wall_ms": round(self.wall_ms, 3) if timing else None,
            "warnings": list(self.warnings),
        }
        out.update(self.info)
        if witnesses:
            out["witnesses"] = {
                a.name: list(a.witness) if a.witness is not None else None for a in self.actors
            }
        return out

    def to_table(self, *, timing: bool = True, witnesses: bool = False) -> str:
        width = max([len(a.name) for a in self.actors] + [5])
        head = (
            f"mode: {self.mode}  algorithm: {self.algorithm}  actors: {len(self.actors)}  "
            f"gamma(empty)={self.gamma_empty}  gamma(all)={self.gamma_full}  "
            f"coalitions evaluated: {self.coalitions_evaluated}"
        )
        if timing:
            head += f"  time: {self.wall_ms:.1f} ms"
        lines = [head, ""]
        for a in self.actors:
            if a.value is not None:
                lines.append(f"{a.name:<{width}}  {str(a.value):>8}  ({float(a.value):.4f})")
            else:
                hw = "n/a" if a.half_width is None else f"{a.half_width:.4f}"
                lines.append(f"{a.name:<{width}}  {a.mean:.4f} +/- {hw}  (n={a.samples})")
            if witnesses and a.witness is not None:
                lines[-1] += "  switches with {" + ", ".join(a.witness) + "}"
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Shapley values

def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.int64)
    c = np.zeros_like(x)
    while x.any():
        c += x & 1
        x = x >> 1
    return c


def _shapley_weights(n: int) -> list[Fraction]:
    return [Fraction(math.factorial(k) * math.factorial(n - k - 1), math.factorial(n)) for k in range(n)]


def shapley_from_values(values: np.ndarray, n: int) -> tuple[list[Fraction], list[int | None]]:
    """Exact Shapley values from a table of all coalition values.

    Switching pairs are counted per coalition size and weighted once per size.
    Also returns, per actor, the mask of its first switching coalition in
    (size, lexicographic) order, or None.
    """
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = _popcount(masks)
    weights = _shapley_weights(n)
    vals = values.astype(np.int64)
    shap, firsts = [], []
    for a in range(n):
        without = masks[(masks >> a) & 1 == 0]
        diff = vals[without | (1 << a)] - vals[without]
        pos = np.bincount(sizes[without][diff > 0], minlength=n)
        neg = np.bincount(sizes[without][diff < 0], minlength=n)
        shap.append(sum(((int(pos[k]) - int(neg[k])) * weights[k] for k in range(n)), Fraction(0)))
        switching = without[diff > 0]
        if switching.size:
            k = sizes[switching].min()
            cands = switching[sizes[switching] == k].tolist()
            firsts.append(min(cands, key=lambda m: [i for i in range(n) if m >> i & 1]))
        else:
            firsts.append(None)
    return shap, firsts


def _selected(oracle, actors) -> list[int]:
    if actors is None:
        return list(range(oracle.n))
    return [a if isinstance(a, int) else oracle.names.index(a) for a in actors]


def shapley_exact(oracle, actors=None, *, max_actors: int = DEFAULT_MAX_ACTORS) -> ResponsibilityReport:
    """Exact responsibility of every actor (or of ``actors``) as fractions."""
    n = oracle.n
    if n > max_actors:
        raise TooManyActors(f"{n} actors exceed the cap of {max_actors}")
    start = time.perf_counter()
    before = oracle.evaluations
    values = oracle.all_values()
    shap, firsts = shapley_from_values(values, n)
    results = [
        ActorResult(
            oracle.names[a],
            value=shap[a],
            witness=None if firsts[a] is None else mask_members(oracle.names, firsts[a]),
        )
        for a in _selected(oracle, actors)
    ]
    return ResponsibilityReport(
        mode=oracle.mode,
        algorithm="exact",
        actors=results,
        gamma_empty=int(values[0]),
        gamma_full=int(values[-1]),
        coalitions_evaluated=oracle.evaluations - before,
        wall_ms=(time.perf_counter() - start) * 1000,
    )


def switching_pairs(oracle) -> set[tuple[str, frozenset[str]]]:
    values = oracle.all_values()
    pairs = set()
    for m in range(1 << oracle.n):
        for a in range(oracle.n):
            if not m >> a & 1 and values[m] == 0 and values[m | 1 << a] == 1:
                pairs.add((oracle.names[a], frozenset(mask_members(oracle.names, m))))
    return pairs


def shapley_sampled(oracle, samples: int, seed: int = 0, actors=None) -> ResponsibilityReport:
    """Permutation-sampling estimate of every actor's Shapley value.

    All orderings are drawn up front from one seeded generator, so the
    estimate depends only on ``seed`` and ``samples``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    n = oracle.n
    start = time.perf_counter()
    before = oracle.evaluations
    rng = np.random.default_rng(seed)
    perms = np.argsort(rng.random((samples, n)), axis=1)
    bits = np.left_shift(np.int64(1), perms.astype(np.int64))
    after = np.cumsum(bits, axis=1)
    prior = after - bits
    needed = np.unique(np.concatenate([after.ravel(), prior.ravel(), [0, (1 << n) - 1]]))
    vals = oracle.gamma_many(needed).astype(np.int64)
    lookup = lambda m: vals[np.searchsorted(needed, m)]  # noqa: E731
    marginal = lookup(after) - lookup(prior)
    contrib = np.empty((samples, n), dtype=np.int64)
    contrib[np.arange(samples)[:, None], perms] = marginal
    mean = contrib.mean(axis=0)
    if samples > 1:
        hw = 1.96 * contrib.std(axis=0, ddof=1) / math.sqrt(samples)
    else:
        hw = [None] * n
    results = [
        ActorResult(
            oracle.names[a],
            mean=float(mean[a]),
            half_width=None if hw[a] is None else float(hw[a]),
            samples=samples,
        )
        for a in _selected(oracle, actors)
    ]
    return ResponsibilityReport(
        mode=oracle.mode,
        algorithm="sample",
        actors=results,
        gamma_empty=int(lookup(0)),
        gamma_full=int(lookup((1 << n) - 1)),
        coalitions_evaluated=oracle.evaluations - before,
        wall_ms=(time.perf_counter() - start) * 1000,
        info={"seed": seed},
    )


def positivity(oracle, actor, *, max_actors: int = DEFAULT_MAX_ACTORS) -> tuple[bool, tuple[str, ...] | None]:
    """Whether ``actor`` has a switching pair; returns the first one found.

    Coalitions are tried by ascending size, lexicographically within a size.
    """
    if oracle.n > max_actors:
        raise TooManyActors(f"{oracle.n} actors exceed the cap of {max_actors}")
    a = actor if isinstance(actor, int) else oracle.names.index(actor)
    others = [i for i in range(oracle.n) if i != a]
    for k in range(len(others) + 1):
        for combo in itertools.combinations(others, k):
            m = sum(1 << i for i in combo)
            if oracle.gamma(m) == 0 and oracle.gamma(m | 1 << a) == 1:
                return True, tuple(oracle.names[i] for i in combo)
    return False, None


def threshold(oracle, actor, q, *, max_actors: int = DEFAULT_MAX_ACTORS) -> bool:
    """Whether the exact responsibility of ``actor`` is at least ``q``."""
    q = Fraction(q)
    if not 0 <= q <= 1:
        raise ValueError("threshold must lie in [0, 1]")
    name = actor if isinstance(actor, str) else oracle.names[actor]
    return shapley_exact(oracle, [name], max_actors=max_actors).actors[0].value >= q
