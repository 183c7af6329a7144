import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from respo.benchgen import BenchSpec, gen_linear, gen_random, gen_tree, tree_leaves
from respo.errors import ValidationError
from respo.responsibility import CoalitionOracle
from respo.semantics import IDLE, find_counterexample, reachable


def _check_system(ts, sig):
    assert sig.num_states == ts.num_states
    assert not sig.aux and not sig.adv
    for b in ts.bad_states():
        assert list(ts.out_edges(b)) == [(b, IDLE)]
    assert (np.diff(ts.offsets) > 0).all()


def test_linear_small():
    ts, sig = gen_linear(3, 1)
    _check_system(ts, sig)
    assert ts.num_states == 4 and ts.bad_states() == [3]
    assert CoalitionOracle(ts, sig).gamma([]) == 0
    assert CoalitionOracle(ts, sig).gamma(["a0"]) == 0


def test_linear_actors_by_residue():
    ts, sig = gen_linear(10, 2)
    assert sig.actor_states("a0") == {0, 2, 4, 6, 8, 10}
    assert sorted(ts.successors(9).tolist()) == [10]
    assert sorted(ts.successors(4).tolist()) == [5, 6, 7]


def test_linear_custom_steps():
    ts, _ = gen_linear(10, 1, steps=(2, 5))
    assert sorted(ts.successors(0).tolist()) == [2, 5]
    with pytest.raises(ValidationError):
        gen_linear(10, 1, steps=(0,))


def test_random_is_reproducible():
    a, sa = gen_random(300, 4, seed=3)
    b, sb = gen_random(300, 4, seed=3)
    assert a.same_as(b)
    assert (sa.owner == sb.owner).all()
    c, _ = gen_random(300, 4, seed=4)
    assert not a.same_as(c)


def test_random_actor_sizes_are_even():
    ts, sig = gen_random(1000, 5, seed=1)
    sizes = [len(s) for s in sig.as_sets().values()]
    assert max(sizes) - min(sizes) <= 1


@settings(max_examples=60, deadline=None)
@given(st.integers(7, 400), st.integers(1, 6), st.integers(0, 10_000))
def test_random_always_has_a_counterexample(n, m, seed):
    ts, sig = gen_random(n, max(1, min(m, n)), seed)
    _check_system(ts, sig)
    assert find_counterexample(ts) is not None
    for s in range(n):
        if not ts.bad[s]:
            succ = ts.successors(s).tolist()
            assert s not in succ and len(succ) >= 6


def test_tree_shapes():
    ts, _ = gen_tree(7, 1)
    assert ts.bad_states() == []
    ts, _ = gen_tree(63, 2)
    assert len(ts.bad_states()) == 3
    leaves = tree_leaves(63)
    assert ts.bad_states() == [leaves[9], leaves[19], leaves[29]]


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 300), st.integers(1, 5))
def test_tree_leaves_loop(n, m):
    ts, sig = gen_tree(n, min(m, n))
    _check_system(ts, sig)
    leaves = tree_leaves(n)
    assert len(leaves) == (n + 1) // 2
    assert sorted(leaves) == list(range(n // 2, n))
    for leaf in leaves:
        assert ts.successors(leaf).tolist() == [leaf]
    assert reachable(ts).all()


def test_bench_spec():
    ts, sig = BenchSpec("tree", 31, 3).generate()
    assert ts.num_states == 31 and len(sig.names) == 3
    with pytest.raises(ValidationError):
        BenchSpec("star", 10, 2)
    with pytest.raises(ValidationError):
        BenchSpec("linear", 2, 5)
