"""Deriving responsibility signatures from program structure.

Three schemes:

* module-based: add a scheduler module that serialises the choice of which
  module (or synchronising action) moves next, then group states by the
  scheduler's ``active`` variable;
* value-based: group states by the values of selected variables;
* action-based: split every state into per-action "enable?" and "take"
  states plus one adversarial fallback, and let each action own its
  "enable?" states.

Manually written signatures (one Boolean expression per actor) are read by
:func:`parse_manual_signature`.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import NameClash, NotARun, SignatureError, UnknownVariable, ValidationError
from .responsibility import ResponsibilitySignature
from .rml import (
    BinOp, BoolExpr, Cmp, Command, Decl, Logic, Module, Num, Program, Var,
    compile_expr, conjunction, disjunction, parse_bool, validate,
)
from .semantics import IDLE, TransitionSystem, resolve_counterexample

ACTIVE = "active"
SCHEDULER = "scheduler"


# --------------------------------------------------------------------------
# module-based actors

def _module_index(p: Program, module) -> int:
    if isinstance(module, int):
        return module
    for i, m in enumerate(p.modules):
        if m.name == module:
            return i
    raise KeyError(module)


def module_guard(p: Program, module) -> BoolExpr:
    """Disjunction of the guards of the module's non-synchronising commands."""
    mi = _module_index(p, module)
    sync = set(p.synchronising_actions())
    cmds = p.modules[mi].commands
    return disjunction([c.guard for ci, c in enumerate(cmds) if p.action_of(mi, ci) not in sync])


def action_guard(p: Program, action: str) -> BoolExpr:
    """Conjunction, over modules using ``action``, of that module's guards for it."""
    parts = []
    for mi in p.modules_with(action):
        cmds = p.modules[mi].commands
        parts.append(disjunction([c.guard for ci, c in enumerate(cmds) if p.action_of(mi, ci) == action]))
    return conjunction(parts)


@dataclass(frozen=True)
class SchedulerProgram:
    program: Program
    original: Program
    module_active: dict[str, int]
    sync_active: dict[str, int]
    actor_names: tuple[str, ...]  # indexed by the value of ``active``


def choose_name(x: str) -> str:
    return f"__choose_{x}"


def act_name(module: str) -> str:
    return f"__act_{module}"


def with_scheduler(p: Program) -> SchedulerProgram:
    """Add a scheduler module that picks which module or shared action moves."""
    if ACTIVE in p.variables:
        raise NameClash(f"variable {ACTIVE!r} already declared")
    if any(m.name == SCHEDULER for m in p.modules):
        raise NameClash(f"module name {SCHEDULER!r} already used")
    n = len(p.modules)
    sync = p.synchronising_actions()
    sync_set = set(sync)
    generated = [choose_name(m.name) for m in p.modules] + [act_name(m.name) for m in p.modules]
    generated += [choose_name(a) for a in sync]
    user_actions = {c.action for m in p.modules for c in m.commands if c.action}
    clash = (set(generated) & user_actions) or {g for g in generated if generated.count(g) > 1}
    if clash:
        raise NameClash(f"generated action name(s) {sorted(clash)} collide")

    modules = []
    for mi, m in enumerate(p.modules):
        cmds = tuple(
            Command(
                c.action if p.action_of(mi, ci) in sync_set else act_name(m.name),
                c.guard, c.updates, c.pos,
            )
            for ci, c in enumerate(m.commands)
        )
        modules.append(Module(m.name, m.decls, cmds))

    active = Var(ACTIVE)
    sched = []
    for i, m in enumerate(p.modules, 1):
        sched.append(Command(choose_name(m.name),
                             Logic("and", Cmp("=", active, Num(0)), module_guard(p, m.name)),
                             ((ACTIVE, Num(i)),)))
        sched.append(Command(act_name(m.name), Cmp("=", active, Num(i)), ((ACTIVE, Num(0)),)))
    for j, a in enumerate(sync, 1):
        sched.append(Command(choose_name(a),
                             Logic("and", Cmp("=", active, Num(0)), action_guard(p, a)),
                             ((ACTIVE, Num(n + j)),)))
        sched.append(Command(a, Cmp("=", active, Num(n + j)), ((ACTIVE, Num(0)),)))
    modules.append(Module(SCHEDULER, (Decl(ACTIVE, 0, n + len(sync), 0),), tuple(sched)))
    prog = Program(p.safety_invariant, tuple(modules))
    validate(prog)

    names = [SCHEDULER] + [m.name for m in p.modules]
    for a in sync:
        names.append(a if a not in names else f"action:{a}")
    return SchedulerProgram(
        program=prog,
        original=p,
        module_active={m.name: i for i, m in enumerate(p.modules, 1)},
        sync_active={a: n + j for j, a in enumerate(sync, 1)},
        actor_names=tuple(names),
    )


def _group_by(ts: TransitionSystem, variables: Sequence[str]):
    if ts.valuations is None:
        raise ValidationError("value-based actors need a system with variable valuations")
    for v in variables:
        if v not in ts.variables:
            raise UnknownVariable(f"unknown variable {v!r}")
    idx = [ts.variables.index(v) for v in variables]
    groups: dict[tuple[int, ...], list[int]] = defaultdict(list)
    for s, val in enumerate(ts.valuations):
        groups[tuple(val[i] for i in idx)].append(s)
    return groups


def module_signature(sp: SchedulerProgram, ts: TransitionSystem) -> ResponsibilitySignature:
    """One actor per value of ``active``; values never reached are dropped."""
    groups = _group_by(ts, [ACTIVE])
    actors = [(name, groups.get((i,), [])) for i, name in enumerate(sp.actor_names)]
    return ResponsibilitySignature.from_sets(ts.num_states, actors, drop_empty=True)


def value_signature(ts: TransitionSystem, variables: Sequence[str]) -> ResponsibilitySignature:
    """One actor per combination of values of ``variables`` seen in ``ts``."""
    if not variables:
        raise UnknownVariable("value-based actors need at least one variable")
    groups = _group_by(ts, variables)
    actors = [
        (",".join(f"{v}={x}" for v, x in zip(variables, key)), groups[key])
        for key in sorted(groups)
    ]
    return ResponsibilitySignature.from_sets(ts.num_states, actors)


def project_run(sp: SchedulerProgram, ts: TransitionSystem, path: Sequence[int]) -> list[tuple[int, ...]]:
    """Valuations of the original program visited by a run of the scheduled system.

    Keeps the states where the scheduler is idle (``active = 0``) and drops
    the ``active`` component.
    """
    k = ts.variables.index(ACTIVE)
    return [
        ts.valuations[s][:k] + ts.valuations[s][k + 1:]
        for s in path
        if ts.valuations[s][k] == 0
    ]


def lift_scheduler_path(ts: TransitionSystem, rows: list[dict[str, int]]) -> list[int]:
    """Turn a run of the original program into one of the scheduled system.

    Each original step ``s -> t`` becomes ``s[active=0] -> s[active=i] ->
    t[active=0]`` where ``i`` is the smallest scheduler choice producing it.
    """
    full = [dict(r, **{ACTIVE: 0}) for r in rows]
    idle = resolve_counterexample(ts, full)
    path = [idle[0]]
    for s, t in zip(idle, idle[1:]):
        mid = [u for u in ts.successors(s).tolist() if t in set(ts.successors(u).tolist()) and u != s]
        if not mid:
            raise NotARun(f"no scheduled step from {ts.describe(s)} to {ts.describe(t)}")
        path += [mid[0], t]
    return path


# --------------------------------------------------------------------------
# action-based actors

Q, BANG, X = 0, 1, 2


@dataclass(eq=False)
class SeparatedSystem:
    ts: TransitionSystem
    original: TransitionSystem
    first: np.ndarray  # original state -> its first ?-state
    x_state: np.ndarray  # original state -> its fallback state
    q_state: dict[tuple[int, str], int]
    bang_state: dict[tuple[int, str], int]
    kind: np.ndarray  # Q, BANG or X per new state
    origin: np.ndarray  # original state per new state
    action: list[str | None]  # action per new state (None for fallback states)
    order: tuple[str, ...] = field(default=())

    def describe(self, s: int) -> str:
        base = self.original.describe(int(self.origin[s]))
        if self.kind[s] == X:
            return f"[{base}]X"
        mark = "?" if self.kind[s] == Q else "!"
        return f"[{base}]{mark}{self.action[s]}"


def action_order(actions: Sequence[str], order: str = "lex") -> list[str]:
    if order == "lex":
        return sorted(actions)
    if order == "declared":
        return list(actions)
    raise ValueError(f"unknown action order {order!r}")


def action_separate(ts: TransitionSystem, order: str = "lex") -> SeparatedSystem:
    """Split every state into enable/take states per action plus a fallback.

    For state ``s`` with actions ``a1 < ... < ak`` (in the chosen order):
    ``s?ai -> s!ai``, ``s?ai -> next``, ``s!ai -> First(t)`` for each
    ``ai``-successor ``t``, ``s!ai -> next``, and ``sX -> First(t)`` for every
    successor ``t``; ``next`` is ``s?a(i+1)`` or ``sX`` after the last action.
    """
    ranked = action_order(ts.actions, order)
    rank = {a: i for i, a in enumerate(ranked)}
    n = ts.num_states
    acts_of = []
    for s in range(n):
        acts = sorted({a for _, a in ts.out_edges(s)}, key=rank.__getitem__)
        acts_of.append(acts)
    first = np.empty(n, dtype=np.int64)
    x_state = np.empty(n, dtype=np.int64)
    q_state, bang_state = {}, {}
    kind, origin, action = [], [], []
    for s in range(n):
        for a in acts_of[s]:
            q_state[(s, a)] = len(kind)
            kind.append(Q), origin.append(s), action.append(a)
        for a in acts_of[s]:
            bang_state[(s, a)] = len(kind)
            kind.append(BANG), origin.append(s), action.append(a)
        x_state[s] = len(kind)
        kind.append(X), origin.append(s), action.append(None)
        first[s] = q_state[(s, acts_of[s][0])] if acts_of[s] else x_state[s]

    labels = {a: i for i, a in enumerate(ts.actions)}
    enable = len(labels)
    skip = enable + 1
    src, dst, lab = [], [], []
    for s in range(n):
        acts = acts_of[s]
        nxt = [q_state[(s, a)] for a in acts[1:]] + [int(x_state[s])]
        for a, after in zip(acts, nxt):
            q, b = q_state[(s, a)], bang_state[(s, a)]
            src += [q, q, b]
            dst += [b, after, after]
            lab += [enable, skip, skip]
        for t, a in ts.out_edges(s):
            src += [bang_state[(s, a)], int(x_state[s])]
            dst += [int(first[t]), int(first[t])]
            lab += [labels[a], labels[a]]
    new = TransitionSystem.from_arrays(
        len(kind),
        int(first[ts.initial]),
        first[ts.bad],
        src, dst, lab,
        list(ts.actions) + ["__enable", "__skip"],
    )
    return SeparatedSystem(
        ts=new,
        original=ts,
        first=first,
        x_state=x_state,
        q_state=q_state,
        bang_state=bang_state,
        kind=np.array(kind, dtype=np.int8),
        origin=np.array(origin, dtype=np.int64),
        action=action,
        order=tuple(ranked),
    )


def action_signature(
    sep: SeparatedSystem,
    actions: Sequence[str] | None = None,
    display: Mapping[str, str] | None = None,
) -> ResponsibilitySignature:
    """Each action owns its ?-states; take-states cooperate, fallbacks oppose.

    ?-states of the synthetic ``__idle`` self-loop action carry no choice and
    are counted as auxiliary.
    """
    display = display or {}
    if actions is None:
        actions = [a for a in sep.original.actions if a != IDLE]
    owned: dict[str, list[int]] = {a: [] for a in actions}
    aux = [i for i, k in enumerate(sep.kind) if k == BANG]
    adv = [i for i, k in enumerate(sep.kind) if k == X]
    for (s, a), q in sep.q_state.items():
        if a in owned:
            owned[a].append(q)
        else:
            aux.append(q)
    return ResponsibilitySignature.from_sets(
        sep.ts.num_states,
        [(display.get(a, a), owned[a]) for a in actions],
        aux,
        adv,
        drop_empty=True,
    )


def action_display_names(p: Program) -> dict[str, str]:
    """Readable names for the synthetic actions of ``[]`` commands."""
    out = {}
    for mi, m in enumerate(p.modules):
        for ci, c in enumerate(m.commands):
            if c.action is None:
                out[p.action_of(mi, ci)] = f"{m.name}#{ci}"
    return out


def lift_separated_path(sep: SeparatedSystem, path: Sequence[int]) -> list[int]:
    """Map a run of the original system to a run of the separated one."""
    out = []
    ts = sep.original
    for s, t in zip(path, path[1:]):
        label = dict(ts.out_edges(s)).get(t)
        if label is None:
            raise NotARun(f"no transition from {ts.describe(s)} to {ts.describe(t)}")
        cur = int(sep.first[s])
        while sep.action[cur] != label:
            out.append(cur)
            cur = cur + 1
        out += [cur, sep.bang_state[(s, label)]]
    out.append(int(sep.first[path[-1]]))
    return out


def project_separated_path(sep: SeparatedSystem, path: Sequence[int]) -> list[int]:
    """Original states whose first ?-state (or fallback if action-less) is visited."""
    firsts = {int(f): s for s, f in enumerate(sep.first)}
    return [firsts[p] for p in path if p in firsts]


# --------------------------------------------------------------------------
# manual signatures

def parse_manual_signature(text: str, ts: TransitionSystem) -> ResponsibilitySignature:
    """Signature from ``name: <bexp>`` lines plus optional ``aux:``/``adv:`` lines."""
    if ts.valuations is None:
        raise ValidationError("manual signatures need a system with variable valuations")
    index = {v: i for i, v in enumerate(ts.variables)}
    actors, aux, adv = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        name, colon, expr = line.partition(":")
        name = name.strip()
        if not colon or not name or " " in name:
            raise SignatureError(f"line {lineno}: expected '<name>: <expression>'")
        try:
            pred = compile_expr(parse_bool(expr), index)
        except KeyError as e:
            raise UnknownVariable(f"line {lineno}: unknown variable {e.args[0]!r}") from None
        states = [s for s, v in enumerate(ts.valuations) if pred(v)]
        if name == "aux":
            aux += states
        elif name == "adv":
            adv += states
        else:
            actors.append((name, states))
    return ResponsibilitySignature.from_sets(ts.num_states, actors, aux, adv, drop_empty=True)
