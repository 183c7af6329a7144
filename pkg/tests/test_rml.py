from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from respo.errors import (
    CrossModuleAssignment, DivisionByZero, DuplicateAssignment, DuplicateVariable,
    InitOutOfRange, ParseError, UndeclaredVariable,
)
from respo.rml import (
    BinOp, BoolConst, Cmp, Logic, Neg, Not, Num, Var, compile_expr, eval_arith, eval_bool,
    format_expr, format_program, int_div, int_mod, parse_arith, parse_bool, parse_program,
)

MODELS = Path(__file__).resolve().parent.parent / "models"
VARS = ["x", "y", "z"]


def arith(depth=3):
    leaf = st.one_of(st.integers(0, 9).map(Num), st.sampled_from(VARS).map(Var))
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.builds(BinOp, st.sampled_from(["+", "-", "*"]), sub, sub),
            st.builds(Neg, sub),
        ),
        max_leaves=8,
    )


def boolean():
    atom = st.one_of(
        st.booleans().map(BoolConst),
        st.builds(Cmp, st.sampled_from(["=", "!=", "<", "<=", ">=", ">"]), arith(), arith()),
    )
    return st.recursive(
        atom,
        lambda sub: st.one_of(
            st.builds(Logic, st.sampled_from(["and", "or", "iff"]), sub, sub),
            st.builds(Not, sub),
        ),
        max_leaves=6,
    )


states = st.fixed_dictionaries({v: st.integers(-5, 5) for v in VARS})


def test_counter_program_parses():
    prog = parse_program((MODELS / "counters.rml").read_text())
    assert [m.name for m in prog.modules] == ["A", "B"]
    assert prog.variables == ["x", "y"]
    assert prog.synchronising_actions() == ["reset"]
    assert prog.actions() == ["__m0_c0", "reset", "__m1_c0"]


def test_counter_program_round_trips():
    prog = parse_program((MODELS / "counters.rml").read_text())
    assert parse_program(format_program(prog)) == prog


@pytest.mark.parametrize("name", ["window.rml", "sweden.rml", "puzzlebox.rml", "counters.rml"])
def test_model_files_round_trip(name):
    prog = parse_program((MODELS / name).read_text())
    again = parse_program(format_program(prog))
    assert again == prog
    assert format_program(again) == format_program(prog)


def test_alternative_spellings():
    src = """
    ⚡ = x ≥ 2 ∧ ¬(y ≠ 0);
    module M
        x: [0..3] init 0;
        y: [0..1] init 0;
        [] x ≤ 2 -> x'=x+1;
        [go] x=3 -> (∅);
        [go] x=2 -> true;
        [] y=0 -> (y:=1) & (x:=0);
    endmodule
    """
    prog = parse_program(src)
    cmds = prog.modules[0].commands
    assert cmds[0].updates[0][0] == "x"
    assert cmds[1].updates == () and cmds[2].updates == ()
    assert [v for v, _ in cmds[3].updates] == ["y", "x"]
    assert eval_bool(prog.safety_invariant, {"x": 2, "y": 0})
    assert not eval_bool(prog.safety_invariant, {"x": 2, "y": 1})


def test_precedence():
    assert eval_arith(parse_arith("2 + 3 * 4"), {}) == 14
    assert eval_arith(parse_arith("(2 + 3) * 4"), {}) == 20
    assert eval_arith(parse_arith("10 - 3 - 2"), {}) == 5
    assert eval_arith(parse_arith("-2 * 3"), {}) == -6
    assert eval_bool(parse_bool("true | false & false"), {})
    assert not eval_bool(parse_bool("!true | false"), {})
    assert eval_bool(parse_bool("1 < 2 <=> 3 > 2"), {})


def test_integer_division_truncates_toward_zero():
    assert int_div(7, 2) == 3
    assert int_div(-7, 2) == -3
    assert int_div(7, -2) == -3
    assert int_mod(-7, 2) == -1
    assert int_mod(7, -2) == 1
    assert eval_arith(parse_arith("-7 / 2"), {}) == -3
    assert eval_arith(parse_arith("-7 mod 2"), {}) == -1
    assert eval_arith(parse_arith("7 % 3"), {}) == 1


def test_division_by_zero_is_reported():
    with pytest.raises(DivisionByZero):
        eval_arith(parse_arith("x / y"), {"x": 1, "y": 0})
    with pytest.raises(DivisionByZero):
        compile_expr(parse_arith("x mod y"), {"x": 0, "y": 1})((3, 0))


@pytest.mark.parametrize(
    "src, exc, line",
    [
        ("module M x: [0..1] init 0; [] q=1 -> x:=0; endmodule", UndeclaredVariable, 1),
        ("module M\n x: [0..1] init 0;\nendmodule\nmodule N\n y: [0..1] init 0;\n [] true -> x:=1;\nendmodule",
         CrossModuleAssignment, 6),
        ("module M\n x: [0..1] init 0;\n x: [0..2] init 0;\nendmodule", DuplicateVariable, 3),
        ("module M\n x: [0..1] init 0;\n [] true -> x:=1 & x:=0;\nendmodule", DuplicateAssignment, 3),
        ("module M\n x: [0..1] init 4;\nendmodule", InitOutOfRange, 2),
        ("module M\n x: [0..1] init 0;\n [] x+1 -> x:=1;\nendmodule", ParseError, 3),
        ("module M\n x: [0..1] init 0;\n [] x=1 -> x:=x=1;\nendmodule", ParseError, 3),
        ("module M\n x: [0..1] init 0;\n [] x=1 -> x:=1\nendmodule", ParseError, 4),
    ],
)
def test_errors_carry_locations(src, exc, line):
    with pytest.raises(exc) as info:
        parse_program(src)
    assert info.value.line == line
    assert info.value.col is not None


def test_invariant_can_be_required():
    with pytest.raises(ParseError):
        parse_program("module M x: [0..1] init 0; endmodule", require_invariant=True)
    assert parse_program("module M x: [0..1] init 0; endmodule").safety_invariant is None


@settings(max_examples=300, deadline=None)
@given(boolean(), states)
def test_printing_preserves_meaning(e, s):
    text = format_expr(e)
    again = parse_bool(text)
    assert eval_bool(again, s) == eval_bool(e, s)
    assert format_expr(again) == text


@settings(max_examples=300, deadline=None)
@given(arith(), states)
def test_compiled_arithmetic_matches_interpreter(e, s):
    index = {v: i for i, v in enumerate(VARS)}
    assert compile_expr(e, index)(tuple(s[v] for v in VARS)) == eval_arith(e, s)


@settings(max_examples=300, deadline=None)
@given(boolean(), boolean(), states)
def test_de_morgan(a, b, s):
    lhs = Not(Logic("and", a, b))
    rhs = Logic("or", Not(a), Not(b))
    assert eval_bool(lhs, s) == eval_bool(rhs, s)
    index = {v: i for i, v in enumerate(VARS)}
    val = tuple(s[v] for v in VARS)
    assert compile_expr(lhs, index)(val) == compile_expr(rhs, index)(val) == eval_bool(lhs, s)
