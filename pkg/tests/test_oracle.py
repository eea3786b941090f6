"""Reference semantics: the naive preorder, cross-check fixpoints and the
stability verifier."""

import numpy as np
import pytest

from conftest import make_f, make_g
from pbmin import oracle
from pbmin.lts import Lts


# ---------------------------------------------------------------------------
# the comparison pair: every bisimulation-action choice, both directions


@pytest.mark.parametrize("actions, f_le_g, g_le_f", [
    ((), True, True),
    (("b",), True, True),
    (("c",), True, False),
    (("a",), False, True),
    (("a", "b", "c"), False, False),
])
def test_pair_verdicts(actions, f_le_g, g_le_f):
    f, g = make_f(), make_g()
    assert oracle.compare(f, g, actions) == (f_le_g, g_le_f)
    assert oracle.preorder_holds(f, g, actions) is f_le_g
    assert oracle.preorder_holds(g, f, actions) is g_le_f


def test_compare_is_reflexive():
    f = make_f()
    assert oracle.compare(f, make_f(), ("a", "b", "c")) == (True, True)


# ---------------------------------------------------------------------------
# the preorder matrix


def test_preorder_is_reflexive_and_transitive():
    for seed in range(12):
        lts = oracle.random_lts(9, 16, 3, termination_density=0.3, seed=seed)
        r = oracle.naive_partial_bisim(lts, frozenset({0}))
        assert r.diagonal().all()
        closed = (r.astype(np.uint16) @ r.astype(np.uint16)) > 0
        assert not (closed & ~r).any()


def test_termination_is_respected():
    lts = Lts(2, [], [], terminating={0})
    r = oracle.naive_partial_bisim(lts, frozenset())
    # the terminating deadlock is not below the non-terminating one...
    assert not r[0, 1]
    # ...but the other way round holds: 1 has no moves and no obligation.
    assert r[1, 0]


def test_deadlock_is_below_everything_without_bisim_actions():
    g = make_g()
    r = oracle.naive_partial_bisim(g, frozenset())
    for q in range(g.num_states):
        assert r[3, q]


def test_empty_action_set_matches_plain_similarity():
    for seed in range(10):
        lts = oracle.random_lts(8, 14, 3, termination_density=0.25, seed=seed)
        r = oracle.naive_partial_bisim(lts, frozenset())
        pairs = {(p, q) for p in range(8) for q in range(8) if r[p, q]}
        assert pairs == oracle.naive_similarity(lts)


def test_full_action_set_matches_plain_bisimilarity():
    # with a uniform termination predicate (no state, or every state) the
    # one-directional termination condition can never order two states
    # strictly, and the mutual kernel collapses to textbook bisimilarity
    for seed in range(10):
        for density in (0.0, 1.0):
            lts = oracle.random_lts(10, 20, 3, termination_density=density,
                                    seed=100 + seed)
            r = oracle.naive_partial_bisim(lts, frozenset(range(3)))
            blocks, _ = oracle.classes_from_relation(r)
            assert blocks == oracle.naive_bisimilarity(lts)


def test_full_action_set_mutual_can_exceed_bisimilarity():
    """With mixed termination the mutual kernel is coarser than bisimilarity.

    A non-terminating deadlock sits strictly below a terminating one, which
    orders x (reaches only the first) below mid (reaches both) below y
    (reaches only the second).  A state branching to {x, y} and one branching
    to {x, y, mid} then answer each other's moves in both directions — the
    middle branch is covered one way by x and the other way by y — yet no
    bisimulation can match the middle branch against x or y alone.
    """
    lts = Lts(7, ["a", "b"],
              [(2, 0, 0), (3, 0, 1), (4, 0, 0), (4, 0, 1),
               (5, 1, 2), (5, 1, 3), (6, 1, 2), (6, 1, 3), (6, 1, 4)],
              terminating={1}, initial=5)
    full = frozenset({0, 1})
    r = oracle.naive_partial_bisim(lts, full)
    assert r[5, 6] and r[6, 5]
    blocks, lb = oracle.classes_from_relation(r)
    assert frozenset({5, 6}) in blocks
    assert frozenset({5}) in oracle.naive_bisimilarity(lts)
    # both engine routes must reproduce the merged class exactly
    from pbmin.refine import Refiner, refine
    assert refine(lts, full).blocks == blocks
    direct = Refiner(lts, full).run()
    assert (direct.blocks, direct.little_brothers) == (blocks, lb)


def test_full_action_set_is_symmetric_without_termination():
    # strict relations under a full action set come only from the
    # one-directional termination condition; without terminating states
    # the preorder is an equivalence
    for seed in range(10):
        lts = oracle.random_lts(10, 20, 3, seed=300 + seed)
        r = oracle.naive_partial_bisim(lts, frozenset(range(3)))
        blocks, lb = oracle.classes_from_relation(r)
        assert blocks == oracle.naive_bisimilarity(lts)
        assert lb == frozenset()


def test_classes_from_relation_orders_by_smallest_member():
    r = np.array([
        [1, 0, 1],
        [0, 1, 1],
        [0, 0, 1],
    ], dtype=bool)
    blocks, lb = oracle.classes_from_relation(r)
    assert blocks == (frozenset({0}), frozenset({1}), frozenset({2}))
    assert lb == frozenset({(0, 2), (1, 2)})


def test_classes_of_g():
    g = make_g()
    r = oracle.naive_partial_bisim(g, frozenset())
    blocks, lb = oracle.classes_from_relation(r)
    assert blocks == (frozenset({0}), frozenset({1}), frozenset({2}),
                      frozenset({3, 4, 5}))
    # 2 below 1, and the deadlock class below everything else
    assert lb == frozenset({(2, 1), (3, 0), (3, 1), (3, 2)})


# ---------------------------------------------------------------------------
# stability checking


def _oracle_pair(lts, actions):
    r = oracle.naive_partial_bisim(lts, actions)
    return oracle.classes_from_relation(r)


def test_stable_check_accepts_oracle_output():
    systems = [make_f(), make_g()]
    for seed in range(8):
        systems.append(oracle.random_lts(9, 18, 3, termination_density=0.3,
                                         seed=200 + seed))
    for lts in systems:
        for actions in [frozenset(), frozenset({1}), frozenset({0, 1, 2})]:
            blocks, lb = _oracle_pair(lts, actions)
            assert oracle.stable_check(lts, blocks, lb, actions) == []


def test_stable_check_rejects_merged_blocks():
    g = make_g()
    blocks = (frozenset({0}), frozenset({1, 2}), frozenset({3, 4, 5}))
    bad = oracle.stable_check(g, blocks, frozenset(), frozenset())
    assert any(v.condition == "forward_coverage" for v in bad)


def test_stable_check_rejects_bogus_little_brother():
    g = make_g()
    blocks, lb = _oracle_pair(g, frozenset())
    # claim 1 is below 2 as well: 2 has no c-move, so coverage must fail
    bad = oracle.stable_check(g, blocks, set(lb) | {(1, 2)}, frozenset())
    assert any(v.condition == "forward_coverage" and v.little == 1
               for v in bad)


def test_stable_check_rejects_mixed_termination():
    lts = Lts(2, ["a"], [], terminating={0})
    bad = oracle.stable_check(lts, [frozenset({0, 1})], set(), frozenset())
    assert [v.condition for v in bad] == ["termination_uniform"]


def test_stable_check_rejects_termination_order():
    lts = Lts(2, ["a"], [], terminating={0})
    blocks = (frozenset({0}), frozenset({1}))
    bad = oracle.stable_check(lts, blocks, {(0, 1)}, frozenset())
    assert [v.condition for v in bad] == ["termination_order"]


def test_stable_check_backward_coverage():
    g = make_g()
    blocks, _ = _oracle_pair(g, frozenset())
    # with b answered both ways, claiming 2 below 1 is fine (both do b),
    # but claiming the deadlock class below 1 breaks the backward condition
    bad = oracle.stable_check(g, blocks, {(3, 1)}, frozenset({1}))
    assert any(v.condition == "backward_coverage" for v in bad)


def test_stable_check_input_validation():
    g = make_g()
    with pytest.raises(ValueError):
        oracle.stable_check(g, [frozenset({0}), frozenset({0})], set(),
                            frozenset())
    with pytest.raises(ValueError):
        oracle.stable_check(g, [frozenset(range(6))], {(0, 0)}, frozenset())
    with pytest.raises(ValueError):
        oracle.stable_check(g, [frozenset(range(5))], set(), frozenset())


# ---------------------------------------------------------------------------
# refinement order between partition pairs


def test_finer_than():
    g = make_g()
    blocks, lb = _oracle_pair(g, frozenset())
    everything = (frozenset(range(6)),)
    assert oracle.finer_than(blocks, lb, everything, frozenset())
    assert not oracle.finer_than(everything, frozenset(), blocks, lb)
    # same blocks but with a little-brother pair the coarser side lacks
    assert oracle.finer_than(blocks, frozenset(), blocks, lb)
    assert not oracle.finer_than(blocks, lb, blocks, frozenset())
    # singletons refine everything that keeps all pairs
    singles = tuple(frozenset({s}) for s in range(6))
    full = frozenset((i, j) for i in range(6) for j in range(6) if i != j)
    assert oracle.finer_than(singles, full, everything, frozenset())


# ---------------------------------------------------------------------------
# the generator and cross-system plumbing


def test_random_lts_is_reproducible():
    a = oracle.random_lts(20, 60, 3, termination_density=0.2, seed=7)
    b = oracle.random_lts(20, 60, 3, termination_density=0.2, seed=7)
    c = oracle.random_lts(20, 60, 3, termination_density=0.2, seed=8)
    assert a == b
    assert a != c
    assert a.num_transitions == 60
    assert len(set(a.transitions)) == 60
    assert all(0 <= s < 20 and 0 <= l < 3 and 0 <= d < 20
               for s, l, d in a.transitions)


def test_random_lts_rejects_overfull_request():
    with pytest.raises(ValueError):
        oracle.random_lts(2, 13, 3)
    with pytest.raises(ValueError):
        oracle.random_lts(0, 0, 1)


def test_disjoint_union_matches_labels_by_name():
    f = Lts(2, ["a", "b"], [(0, 0, 1), (0, 1, 1)], initial=0)
    g = Lts(2, ["b", "a"], [(0, 0, 1)], terminating={1}, initial=0)
    union, offset = oracle.disjoint_union(f, g)
    assert offset == 2
    assert union.label_names == ["a", "b"]
    # g's transition used g-label 0 = "b", which is label 1 in the union
    assert (2, 1, 3) in union.transitions
    assert union.terminating == frozenset({3})


def test_compare_requires_matching_alphabets():
    f = Lts(1, ["a"], [], initial=0)
    g = Lts(1, ["b"], [], initial=0)
    with pytest.raises(ValueError):
        oracle.preorder_holds(f, g, ())


def test_compare_requires_initial_states():
    f = Lts(1, ["a"], [])
    with pytest.raises(ValueError):
        oracle.preorder_holds(f, make_f(), ())
