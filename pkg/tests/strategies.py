"""Hypothesis strategies for systems, signatures and programs."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from respo.responsibility import ResponsibilitySignature
from respo.rml import BinOp, Cmp, Command, Decl, Logic, Module, Num, Program, Var
from respo.semantics import TransitionSystem


@st.composite
def systems(draw, max_states=60, max_out=3, actions=("a", "b", "c")):
    n = draw(st.integers(2, max_states))
    src, dst, lab = [], [], []
    for s in range(n):
        for t in draw(st.lists(st.integers(0, n - 1), max_size=max_out, unique=True)):
            src.append(s)
            dst.append(t)
            lab.append(draw(st.integers(0, len(actions) - 1)))
    bad = draw(st.lists(st.integers(1, n - 1), max_size=max(1, n // 5), unique=True))
    return TransitionSystem.from_arrays(n, 0, bad, src, dst, lab, list(actions))


@st.composite
def signatures(draw, ts, max_actors=6, special=True):
    k = draw(st.integers(1, max_actors))
    lo = -2 if special else 0
    owner = draw(st.lists(st.integers(lo, k - 1), min_size=ts.num_states, max_size=ts.num_states))
    used = sorted({o for o in owner if o >= 0})
    if not used:
        owner[0] = 0
        used = [0]
    remap = {o: i for i, o in enumerate(used)}
    owner = [remap.get(o, o) for o in owner]
    return ResponsibilitySignature.from_owner([f"p{i}" for i in range(len(used))], np.array(owner))


@st.composite
def system_and_signature(draw, max_states=60, max_actors=6, special=True):
    ts = draw(systems(max_states))
    return ts, draw(signatures(ts, max_actors, special))


def _atom(draw, variables):
    v = draw(st.sampled_from(variables))
    op = draw(st.sampled_from(["=", "!=", "<", ">="]))
    return Cmp(op, Var(v), Num(draw(st.integers(0, 3))))


def _guard(draw, variables):
    g = _atom(draw, variables)
    if draw(st.booleans()):
        g = Logic(draw(st.sampled_from(["and", "or"])), g, _atom(draw, variables))
    return g


@st.composite
def programs(draw, max_modules=3, sync_actions=("a", "b")):
    n = draw(st.integers(1, max_modules))
    decls = []
    for i in range(n):
        hi = draw(st.integers(1, 3))
        decls.append(Decl(f"v{i}", 0, hi, draw(st.integers(0, hi)), None))
    variables = [d.name for d in decls]
    modules = []
    for i, d in enumerate(decls):
        cmds = []
        for _ in range(draw(st.integers(1, 3))):
            action = draw(st.sampled_from([None, *sync_actions]))
            kind = draw(st.sampled_from(["const", "inc", "dec", "none"]))
            if kind == "const":
                ups = ((d.name, Num(draw(st.integers(0, d.upper)))),)
            elif kind == "inc":
                ups = ((d.name, BinOp("+", Var(d.name), Num(1))),)
            elif kind == "dec":
                ups = ((d.name, BinOp("-", Var(d.name), Num(1))),)
            else:
                ups = ()
            cmds.append(Command(action, _guard(draw, variables), ups, None))
        modules.append(Module(f"M{i}", (d,), tuple(cmds)))
    inv = _guard(draw, variables)
    return Program(inv, tuple(modules))
