"""Line-oriented text exchange format for transition systems and signatures.

::

    ts v1 states=<n> init=<i>
    vars <name>...            (optional, followed by one 'state' line per state)
    state <i> <value>...
    bad <i>...
    edge <src> <dst> <action>
    actor <name> <i>...
    aux <i>...
    adv <i>...
    end

Lines starting with ``#`` are comments. The closing ``end`` line guards
against truncated files.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import FormatError
from .responsibility import ADV, AUX, ResponsibilitySignature
from .semantics import TransitionSystem

_HEADER = re.compile(r"ts v1 states=(\d+) init=(\d+)$")


def dumps_ts(ts: TransitionSystem, sig: ResponsibilitySignature | None = None) -> str:
    out = [f"ts v1 states={ts.num_states} init={ts.initial}"]
    if ts.valuations is not None and ts.variables:
        out.append("vars " + " ".join(ts.variables))
        out.extend(f"state {i} " + " ".join(map(str, v)) for i, v in enumerate(ts.valuations))
    out.append(" ".join(["bad", *map(str, ts.bad_states())]))
    acts = ts.actions
    out.extend(f"edge {s} {t} {acts[a]}" for s, t, a in
               zip(ts.sources.tolist(), ts.targets.tolist(), ts.labels.tolist()))
    if sig is not None:
        for i, name in enumerate(sig.names):
            out.append(" ".join(["actor", name, *map(str, np.flatnonzero(sig.owner == i).tolist())]))
        out.append(" ".join(["aux", *map(str, np.flatnonzero(sig.owner == AUX).tolist())]))
        out.append(" ".join(["adv", *map(str, np.flatnonzero(sig.owner == ADV).tolist())]))
    out.append("end")
    return "\n".join(out) + "\n"


def export_ts(ts: TransitionSystem, sig: ResponsibilitySignature | None, path) -> None:
    Path(path).write_text(dumps_ts(ts, sig))


def _ints(fields: list[str], lineno: int) -> list[int]:
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise FormatError("expected integers", lineno) from None


def loads_ts(text: str) -> tuple[TransitionSystem, ResponsibilitySignature | None]:
    lines = text.splitlines()
    body = [(i, ln.strip()) for i, ln in enumerate(lines, 1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not body:
        raise FormatError("empty file", 1)
    lineno, first = body[0]
    m = _HEADER.match(first)
    if not m:
        raise FormatError("expected header 'ts v1 states=<n> init=<i>'", lineno)
    n, init = int(m.group(1)), int(m.group(2))
    if init >= n:
        raise FormatError("initial state out of range", lineno)
    variables: list[str] = []
    valuations: dict[int, tuple[int, ...]] = {}
    bad: list[int] = []
    src, dst, lab = [], [], []
    actions: dict[str, int] = {}
    actors: list[tuple[str, list[int]]] = []
    aux: list[int] = []
    adv: list[int] = []
    has_sig = False
    ended = False
    for lineno, line in body[1:]:
        if ended:
            raise FormatError("content after 'end'", lineno)
        kind, *rest = line.split()
        if kind == "edge":
            if len(rest) != 3:
                raise FormatError("expected 'edge <src> <dst> <action>'", lineno)
            s, t = _ints(rest[:2], lineno)
            if not (0 <= s < n and 0 <= t < n):
                raise FormatError("edge endpoint out of range", lineno)
            src.append(s)
            dst.append(t)
            lab.append(actions.setdefault(rest[2], len(actions)))
        elif kind == "state":
            if not variables:
                raise FormatError("'state' before 'vars'", lineno)
            vals = _ints(rest, lineno)
            if len(vals) != len(variables) + 1 or not 0 <= vals[0] < n:
                raise FormatError("malformed state line", lineno)
            valuations[vals[0]] = tuple(vals[1:])
        elif kind == "vars":
            variables = rest
        elif kind == "bad":
            bad.extend(_ints(rest, lineno))
        elif kind == "actor":
            if not rest:
                raise FormatError("actor needs a name", lineno)
            actors.append((rest[0], _ints(rest[1:], lineno)))
            has_sig = True
        elif kind in ("aux", "adv"):
            (aux if kind == "aux" else adv).extend(_ints(rest, lineno))
            has_sig = True
        elif kind == "end":
            ended = True
        else:
            raise FormatError(f"unknown record {kind!r}", lineno)
    if not ended:
        raise FormatError("file is truncated (missing 'end')", len(lines))
    if any(not 0 <= b < n for b in bad):
        raise FormatError("bad state out of range")
    vals = None
    if variables:
        if len(valuations) != n:
            raise FormatError(f"expected {n} state lines, found {len(valuations)}")
        vals = [valuations[i] for i in range(n)]
    ts = TransitionSystem.from_arrays(
        n, init, np.array(bad, dtype=np.int64), src, dst, lab, list(actions),
        variables=variables, valuations=vals,
    )
    sig = ResponsibilitySignature.from_sets(n, actors, aux, adv) if has_sig else None
    return ts, sig


def import_ts(path) -> tuple[TransitionSystem, ResponsibilitySignature | None]:
    return loads_ts(Path(path).read_text())
