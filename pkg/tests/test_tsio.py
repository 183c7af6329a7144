import time
from pathlib import Path

import pytest
from hypothesis import given, settings

from strategies import system_and_signature
from respo.actors import module_signature, with_scheduler
from respo.benchgen import gen_linear
from respo.errors import FormatError
from respo.rml import parse_program
from respo.semantics import build_ts
from respo.tsio import dumps_ts, export_ts, import_ts, loads_ts

MODELS = Path(__file__).resolve().parent.parent / "models"


def _same(a, b):
    (ts1, sig1), (ts2, sig2) = a, b
    assert ts1.same_as(ts2)
    assert ts1.variables == ts2.variables
    assert ts1.valuations == ts2.valuations
    if sig1 is None:
        assert sig2 is None
    else:
        assert sig1.names == sig2.names
        assert (sig1.owner == sig2.owner).all()


def test_station_round_trip(tmp_path):
    ts, sig = import_ts(MODELS / "train_station.ts")
    export_ts(ts, sig, tmp_path / "x.ts")
    _same((ts, sig), import_ts(tmp_path / "x.ts"))


def test_program_round_trip_keeps_valuations():
    sp = with_scheduler(parse_program((MODELS / "window.rml").read_text()))
    ts = build_ts(sp.program)
    sig = module_signature(sp, ts)
    _same((ts, sig), loads_ts(dumps_ts(ts, sig)))
    _same((ts, None), loads_ts(dumps_ts(ts)))


def test_large_round_trip(tmp_path):
    ts, sig = gen_linear(100_000, 7)
    start = time.perf_counter()
    export_ts(ts, sig, tmp_path / "big.ts")
    back = import_ts(tmp_path / "big.ts")
    elapsed = time.perf_counter() - start
    _same((ts, sig), back)
    assert elapsed < 30


@settings(max_examples=200, deadline=None)
@given(system_and_signature())
def test_random_round_trip(data):
    ts, sig = data
    _same((ts, sig), loads_ts(dumps_ts(ts, sig)))


@pytest.mark.parametrize(
    "text, line",
    [
        ("ts v1 states=2 init=0\nbad 1\nedge 0 1 a\n", 3),
        ("", 1),
        ("ts v2 states=2 init=0\nend\n", 1),
        ("ts v1 states=2 init=5\nend\n", 1),
        ("ts v1 states=2 init=0\nedge 0 9 a\nend\n", 2),
        ("ts v1 states=2 init=0\nedge 0 x a\nend\n", 2),
        ("ts v1 states=2 init=0\nfrob 1\nend\n", 2),
        ("ts v1 states=2 init=0\nend\nbad 1\n", 3),
        ("ts v1 states=2 init=0\nstate 0 1\nend\n", 2),
    ],
)
def test_malformed_files(text, line):
    with pytest.raises(FormatError) as info:
        loads_ts(text)
    assert info.value.line == line


def test_comments_are_ignored():
    ts, sig = loads_ts("# generated\nts v1 states=2 init=0\n# note\nbad 1\nedge 0 1 a\nend\n")
    assert ts.bad_states() == [1] and sig is None
