"""The transition-counter kernel, exercised through the pure backend and —
when the compiled twin is importable — checked for exact behavioral equality
against it."""

import random

import pytest

from pbmin import _kernels_py

try:
    from pbmin import _speedups
    BACKENDS = [_kernels_py, _speedups]
except ImportError:
    _speedups = None
    BACKENDS = [_kernels_py]

TRIPLES = [(0, 0, 1), (0, 0, 2), (1, 1, 2), (2, 0, 0), (2, 0, 1), (2, 1, 2)]


@pytest.mark.parametrize("mod", BACKENDS)
def test_initial_counts(mod):
    t = mod.TransitionTable(3, TRIPLES)
    assert t.count(0, 0, 0) == 2
    assert t.count(1, 1, 0) == 1
    assert t.count(1, 0, 0) == 0
    assert t.out_labels(2) == [0, 1]
    assert t.out_labels(1) == [1]
    assert t.state_keys(0) == [(0, 0, 2)]
    assert t.state_keys(2) == [(0, 0, 2), (1, 0, 1)]


@pytest.mark.parametrize("mod", BACKENDS)
def test_retarget_reports_key_changes(mod):
    t = mod.TransitionTable(3, TRIPLES)
    touched, lost = t.retarget([2], 0, 1)
    # edges into 2: (0,0,2), (1,1,2), (2,1,2)
    assert touched == [(0, 0), (1, 1), (2, 1)]
    # 0 still has an a-edge into parent 0 (to state 1); 1 and 2 lost theirs
    assert lost == [(1, 1), (2, 1)]
    assert t.count(0, 0, 0) == 1
    assert t.count(0, 0, 1) == 1
    assert t.count(1, 1, 1) == 1
    assert t.count(1, 1, 0) == 0


@pytest.mark.parametrize("mod", BACKENDS)
def test_retarget_same_parent_is_noop(mod):
    t = mod.TransitionTable(3, TRIPLES)
    assert t.retarget([0, 1, 2], 0, 0) == ([], [])
    assert t.count(0, 0, 0) == 2


@pytest.mark.parametrize("mod", BACKENDS)
def test_covered(mod):
    t = mod.TransitionTable(3, TRIPLES)
    t.retarget([2], 0, 1)
    assert t.covered([0, 1, 2], 0, [0]) == [0, 2]      # a-edge into parent 0
    assert t.covered([2, 1, 0], 1, [1]) == [2, 1]      # order preserved
    assert t.covered([0, 1, 2], 1, [0, 1]) == [1, 2]
    assert t.covered([0, 1, 2], 1, []) == []


@pytest.mark.parametrize("mod", BACKENDS)
def test_aggregate_keys(mod):
    t = mod.TransitionTable(3, TRIPLES)
    assert t.aggregate_keys([0, 1, 2]) == {(0, 0): 2, (1, 0): 2}
    t.retarget([2], 0, 1)
    assert t.aggregate_keys([0, 2]) == {(0, 0): 2, (0, 1): 1, (1, 1): 1}
    assert t.aggregate_keys([]) == {}


def _random_script(seed):
    """A reproducible instance plus a random retarget/query script."""
    rng = random.Random(seed)
    n = rng.randint(2, 30)
    nlab = rng.randint(1, 4)
    m = rng.randint(0, min(4 * n, n * n * nlab))
    space = [(s, a, d) for s in range(n) for a in range(nlab)
             for d in range(n)]
    triples = rng.sample(space, m)
    parent_of = {s: 0 for s in range(n)}
    next_parent = 1
    script = []
    for _ in range(12):
        src_parent = rng.choice(sorted(set(parent_of.values())))
        members = [s for s, p in parent_of.items() if p == src_parent]
        if len(members) < 2:
            continue
        moved = rng.sample(members, rng.randint(1, len(members) - 1))
        script.append(("retarget", sorted(moved), src_parent, next_parent))
        for s in moved:
            parent_of[s] = next_parent
        next_parent += 1
        parents = sorted(set(parent_of.values()))
        script.append(("covered", list(range(n)), rng.randrange(nlab),
                       rng.sample(parents, rng.randint(0, len(parents)))))
        script.append(("aggregate", sorted(rng.sample(range(n),
                                                      rng.randint(0, n)))))
    return n, triples, script


def _run_script(mod, n, triples, script):
    t = mod.TransitionTable(n, triples)
    out = []
    for step in script:
        if step[0] == "retarget":
            out.append(t.retarget(step[1], step[2], step[3]))
        elif step[0] == "covered":
            out.append(t.covered(step[1], step[2], step[3]))
        else:
            out.append(sorted(t.aggregate_keys(step[1]).items()))
    out.append([t.state_keys(s) for s in range(n)])
    return out


def test_pure_kernel_against_brute_force():
    """Counters recomputed from scratch must match after every operation."""
    for seed in range(20):
        n, triples, script = _random_script(seed)
        t = _kernels_py.TransitionTable(n, triples)
        parent_of = {s: 0 for s in range(n)}
        for step in script:
            if step[0] != "retarget":
                continue
            _, moved, old, new = step
            t.retarget(moved, old, new)
            for s in moved:
                parent_of[s] = new
            expect = [{} for _ in range(n)]
            for src, lab, dst in triples:
                key = (lab, parent_of[dst])
                expect[src][key] = expect[src].get(key, 0) + 1
            for s in range(n):
                assert t.state_keys(s) == sorted(
                    (l, p, c) for (l, p), c in expect[s].items())


@pytest.mark.skipif(_speedups is None, reason="compiled kernel not built")
def test_backends_agree():
    for seed in range(30):
        n, triples, script = _random_script(seed)
        assert (_run_script(_kernels_py, n, triples, script)
                == _run_script(_speedups, n, triples, script))
