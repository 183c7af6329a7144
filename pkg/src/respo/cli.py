"""Command-line interface: ``respo analyze | transform | gen | check``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import actors as ax
from .benchgen import FAMILIES, gen_linear, gen_random, gen_tree
from .errors import CapExceeded, StateSpaceExceeded, ValidationError
from .games import set_threads
from .responsibility import (
    DEFAULT_MAX_ACTORS, CoalitionOracle, ResponsibilityReport, shapley_exact, shapley_sampled,
)
from .rml import Program, format_program, parse_bool, parse_program
from .semantics import (
    TransitionSystem, build_ts, default_max_states, find_counterexample, parse_counterexample,
    resolve_counterexample, validate_counterexample,
)
from .tsio import dumps_ts, import_ts

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3


@dataclass
class AnalysisConfig:
    model: Path
    property: str | None = None
    mode: str = "forward"
    counterexample: str = "auto"
    actors: str | None = None
    algorithm: str = "exact"
    samples: int = 10_000
    seed: int = 0
    max_states: int | None = None
    max_actors: int = DEFAULT_MAX_ACTORS
    clamp: bool = False
    action_order: str = "lex"


@dataclass
class Prepared:
    """A system ready for analysis plus what is needed to read counterexamples."""

    ts: TransitionSystem
    sig: object
    scheme: str
    warnings: list[str] = field(default_factory=list)
    base: TransitionSystem | None = None  # system counterexample files refer to
    lift: object = None  # maps a counterexample in ``base`` terms to one in ``ts``


def _load_program(cfg: AnalysisConfig, warnings: list[str]) -> Program:
    text = cfg.model.read_text(encoding="utf-8")
    prog = parse_program(text)
    if cfg.property is not None:
        inv = parse_bool(cfg.property)
        if prog.safety_invariant is not None:
            warnings.append("--property overrides the invariant given in the model file")
        prog = prog.with_invariant(inv)
    if prog.safety_invariant is None:
        raise ValidationError("no safety invariant: add 'lightning = <bexp>;' or pass --property")
    return prog


def _value_vars(scheme: str) -> list[str]:
    names = [v.strip() for v in scheme.partition(":")[2].split(",") if v.strip()]
    if not names:
        raise ValidationError("value scheme needs at least one variable, e.g. value:t")
    return names


def prepare(cfg: AnalysisConfig) -> Prepared:
    warnings: list[str] = []
    scheme = cfg.actors
    if cfg.model.suffix == ".ts":
        ts, sig = import_ts(cfg.model)
        cap = default_max_states() if cfg.max_states is None else cfg.max_states
        if ts.num_states > cap:
            raise StateSpaceExceeded(f"{ts.num_states} states exceed the cap of {cap}")
        if cfg.property is not None:
            raise ValidationError("--property needs a program with variables, not a .ts file")
        scheme = scheme or "file"
        if scheme == "file":
            if sig is None:
                raise ValidationError("the .ts file carries no signature; pick --actors")
            return Prepared(ts, sig, scheme, warnings, ts, None)
        if scheme == "module":
            raise ValidationError("module actors need an .rml program")
        prog = None
    else:
        prog = _load_program(cfg, warnings)
        scheme = scheme or "module"
        if scheme == "file":
            raise ValidationError("'file' actors are only available for .ts input")
        if scheme == "module":
            sp = ax.with_scheduler(prog)
            ts = build_ts(sp.program, clamp=cfg.clamp, max_states=cfg.max_states)
            sig = ax.module_signature(sp, ts)
            warnings += [f"actor {d!r} owns no reachable state and was dropped" for d in sig.dropped]

            def lift(rows):
                if rows and ax.ACTIVE in rows[0]:
                    return resolve_counterexample(ts, rows)
                return ax.lift_scheduler_path(ts, rows)

            return Prepared(ts, sig, scheme, warnings, None, lift)
        ts = build_ts(prog, clamp=cfg.clamp, max_states=cfg.max_states)

    if scheme == "action":
        sep = ax.action_separate(ts, cfg.action_order)
        display = ax.action_display_names(prog) if prog is not None else {}
        sig = ax.action_signature(sep, display=display)
        warnings += [f"actor {d!r} owns no reachable state and was dropped" for d in sig.dropped]
        warnings.append(f"action order '{cfg.action_order}' may influence action-based values")

        def lift(path):
            return ax.lift_separated_path(sep, path)

        return Prepared(sep.ts, sig, scheme, warnings, ts, lift)
    if scheme.startswith("value:"):
        return Prepared(ts, ax.value_signature(ts, _value_vars(scheme)), "value", warnings, ts, None)
    if scheme.startswith("manual:"):
        path = Path(scheme.partition(":")[2])
        sig = ax.parse_manual_signature(path.read_text(encoding="utf-8"), ts)
        warnings += [f"actor {d!r} owns no reachable state and was dropped" for d in sig.dropped]
        return Prepared(ts, sig, "manual", warnings, ts, None)
    raise ValidationError(f"unknown actor scheme {scheme!r}")


def _read_counterexample(prep: Prepared, path: Path) -> list[int]:
    text = path.read_text(encoding="utf-8")
    lines = [ln.split("//", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if lines and all(ln.isdigit() for ln in lines):
        states = [int(ln) for ln in lines]
        return prep.lift(states) if prep.scheme == "action" else states
    rows = parse_counterexample(text)
    if prep.scheme == "module":
        return prep.lift(rows)
    states = resolve_counterexample(prep.base, rows)
    return prep.lift(states) if prep.lift else states


def run(cfg: AnalysisConfig) -> ResponsibilityReport:
    prep = prepare(cfg)
    cex = None
    info = {"actor_scheme": prep.scheme, "states": prep.ts.num_states,
            "transitions": prep.ts.num_transitions}
    if cfg.mode == "backward":
        if cfg.counterexample == "auto":
            cex = find_counterexample(prep.ts)
            if cex is None:
                raise ValidationError("no bad state is reachable, so there is no counterexample")
            info["counterexample"] = "derived"
        else:
            cex = validate_counterexample(prep.ts, _read_counterexample(prep, Path(cfg.counterexample)))
            info["counterexample"] = "supplied"
        info["counterexample_length"] = len(cex.path)
    elif cfg.mode != "forward":
        raise ValidationError(f"unknown mode {cfg.mode!r}")
    oracle = CoalitionOracle(prep.ts, prep.sig, cfg.mode, cex, max_actors=cfg.max_actors)
    if cfg.algorithm == "exact":
        report = shapley_exact(oracle, max_actors=cfg.max_actors)
    elif cfg.algorithm == "sample":
        report = shapley_sampled(oracle, cfg.samples, cfg.seed)
    else:
        raise ValidationError(f"unknown algorithm {cfg.algorithm!r}")
    report.warnings = prep.warnings + report.warnings
    report.info = {**info, **report.info}
    return report


# --------------------------------------------------------------------------
# argument handling

def _add_model_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("model", type=Path, help=".rml program or .ts exchange file")
    p.add_argument("--property", help="safety invariant (bad states), overrides the model's")
    p.add_argument("--max-states", type=int, default=None,
                   help="state cap (default: $RESPO_MAX_STATES or 10^7)")
    p.add_argument("--clamp", action="store_true",
                   help="clamp out-of-range updates to the variable bounds instead of failing")
    p.add_argument("--action-order", choices=("lex", "declared"), default="lex")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="respo", description="Shapley-value responsibility for safety violations.")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="compute responsibility values")
    _add_model_options(a)
    a.add_argument("--mode", choices=("forward", "backward"), default="forward")
    a.add_argument("--counterexample", default="auto", metavar="auto|PATH")
    a.add_argument("--actors", default=None, metavar="SCHEME",
                   help="module | value:v1,v2 | action | manual:PATH | file (.ts only)")
    a.add_argument("--algorithm", choices=("exact", "sample"), default="exact")
    a.add_argument("--samples", type=int, default=10_000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--output", choices=("table", "json"), default="table")
    a.add_argument("--max-actors", type=int, default=DEFAULT_MAX_ACTORS)
    a.add_argument("--threads", type=int, default=None)
    a.add_argument("--no-timing", action="store_true", help="omit wall-clock time from the report")
    a.add_argument("--witnesses", action="store_true", help="include one switching coalition per actor")

    t = sub.add_parser("transform", help="emit the scheduled or action-separated model")
    _add_model_options(t)
    t.add_argument("--to", choices=("sched", "action"), required=True)
    t.add_argument("--format", choices=("rml", "ts"), default=None)
    t.add_argument("-o", "--out", type=Path, default=None)

    g = sub.add_parser("gen", help="generate a synthetic benchmark model")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--steps", default="1,2,3", help="linear family step sizes")
    g.add_argument("--bad-fraction", type=float, default=0.01, help="random family")
    g.add_argument("-o", "--out", type=Path, default=None)

    c = sub.add_parser("check", help="parse and validate a model")
    _add_model_options(c)
    c.add_argument("--build", action="store_true", help="also build the transition system")
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _cmd_analyze(args) -> None:
    set_threads(args.threads)
    cfg = AnalysisConfig(
        model=args.model, property=args.property, mode=args.mode,
        counterexample=args.counterexample, actors=args.actors, algorithm=args.algorithm,
        samples=args.samples, seed=args.seed, max_states=args.max_states,
        max_actors=args.max_actors, clamp=args.clamp, action_order=args.action_order,
    )
    report = run(cfg)
    timing = not args.no_timing
    if args.output == "json":
        sys.stdout.write(json.dumps(report.to_json_dict(timing=timing, witnesses=args.witnesses), indent=2) + "\n")
    else:
        sys.stdout.write(report.to_table(timing=timing, witnesses=args.witnesses))


def _cmd_transform(args) -> None:
    warnings: list[str] = []
    cfg = AnalysisConfig(model=args.model, property=args.property, max_states=args.max_states,
                         clamp=args.clamp, action_order=args.action_order)
    if args.to == "sched":
        if args.model.suffix == ".ts":
            raise ValidationError("the scheduler construction needs an .rml program")
        prog = _load_program(cfg, warnings)
        sp = ax.with_scheduler(prog)
        if args.format == "ts":
            ts = build_ts(sp.program, clamp=args.clamp, max_states=args.max_states)
            text = dumps_ts(ts, ax.module_signature(sp, ts))
        else:
            text = format_program(sp.program)
    else:
        if args.format == "rml":
            raise ValidationError("action separation is emitted as a .ts file only")
        prep = prepare(AnalysisConfig(**{**cfg.__dict__, "actors": "action"}))
        warnings += prep.warnings
        text = dumps_ts(prep.ts, prep.sig)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(text, args.out)


def _cmd_gen(args) -> None:
    if args.family == "linear":
        steps = [int(k) for k in args.steps.split(",") if k.strip()]
        ts, sig = gen_linear(args.n, args.m, steps)
    elif args.family == "random":
        ts, sig = gen_random(args.n, args.m, args.seed, args.bad_fraction)
    else:
        ts, sig = gen_tree(args.n, args.m)
    _emit(dumps_ts(ts, sig), args.out)


def _cmd_check(args) -> None:
    if args.model.suffix == ".ts":
        ts, sig = import_ts(args.model)
        actors = "none" if sig is None else ", ".join(sig.names)
        print(f"ok: {ts.num_states} states, {ts.num_transitions} transitions, actors: {actors}")
        return
    prog = parse_program(args.model.read_text(encoding="utf-8"))
    if args.property is not None:
        prog = prog.with_invariant(parse_bool(args.property))
    print(f"ok: {len(prog.modules)} modules, {len(prog.variables)} variables, "
          f"{len(prog.synchronising_actions())} synchronising actions")
    if prog.safety_invariant is None:
        print("note: no safety invariant given")
    if args.build:
        ts = build_ts(prog, clamp=args.clamp, max_states=args.max_states)
        print(f"{ts.num_states} states, {ts.num_transitions} transitions, "
              f"{len(ts.bad_states())} bad, {len(ts.completed)} deadlocks completed")


COMMANDS = {"analyze": _cmd_analyze, "transform": _cmd_transform, "gen": _cmd_gen, "check": _cmd_check}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except CapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, OSError, UnicodeDecodeError) as e:
        where = f"{args.model}: " if getattr(args, "model", None) else ""
        print(f"error: {where}{e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
