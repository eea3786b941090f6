"""Brute-force reference semantics and checkers.

Everything in this module is deliberately independent of the refinement
engine: the preorder is computed as a greatest fixpoint over the full
state-pair relation, equivalences come from separate textbook fixpoints, and
the stability verifier re-derives every fact it checks directly from the
transition relation.  These functions are the ground truth the fast engine is
tested against, and the ``verify``/``compare`` CLI commands call into them.

Conventions: a partition is a sequence of disjoint state sets covering all
states, canonically ordered by smallest member; a little-brother relation
over a partition is a set of irreflexive index pairs ``(i, j)`` meaning every
state of block ``i`` is below every state of block ``j``.
"""

from __future__ import annotations

import random
from collections import namedtuple

import numpy as np

from .lts import Lts

Violation = namedtuple(
    "Violation", ["condition", "little", "big", "label", "target", "detail"])
Violation.__doc__ = """One failed stability condition.

condition: 'termination_uniform', 'termination_order', 'forward_coverage'
or 'backward_coverage'; little/big are block indices (equal for per-block
conditions), label a label id or None, target the trigger block or None.
"""


# ---------------------------------------------------------------------------
# the preorder itself


def naive_partial_bisim(lts, bisim_actions):
    """The greatest partial-bisimulation preorder, as a boolean matrix.

    ``R[p, q]`` is true iff p is below q: q can match every move of p, p can
    match every move of q on the bisimulation actions with the order
    preserved, and if p may terminate then so may q.  Computed by iterating
    the defining conditions from the full relation downwards until nothing
    changes; the result is reflexive and transitive by construction of the
    fixpoint, not by enforcement.

    :param lts: the system.
    :param bisim_actions: iterable of label *ids* answered in both directions.
    :returns: ``(n, n)`` boolean array.
    """
    n = lts.num_states
    r = np.ones((n, n), dtype=bool)
    if n == 0:
        return r
    for p in range(n):
        if p in lts.terminating:
            for q in range(n):
                if q not in lts.terminating:
                    r[p, q] = False
    adj = [np.zeros((n, n), dtype=np.uint16) for _ in range(lts.num_labels)]
    for src, lab, dst in lts.transitions:
        adj[lab][src, dst] = 1
    bset = set(bisim_actions)
    while True:
        ok = r.copy()
        ru = r.astype(np.uint16)
        for a, x in enumerate(adj):
            if not x.any():
                continue
            # forward: every a-successor of p must be answered by some
            # a-successor of q that still dominates it.
            t = (ru @ x.T) > 0          # t[p', q]: q has an a-move into ≥ p'
            ok &= (x @ (~t).astype(np.uint16)) == 0
            if a in bset:
                # backward: every a-successor of q must be answered from p,
                # staying below it.
                s = (x @ ru) > 0        # s[p, q']: p has an a-move into ≤ q'
                ok &= ((~s).astype(np.uint16) @ x.T) == 0
        if np.array_equal(ok, r):
            return r
        r = ok


def classes_from_relation(r):
    """Equivalence classes and the projected block preorder of a relation.

    Mutually related states share a class; classes are ordered by smallest
    member.  Returns ``(partition, lb)`` where ``lb`` is the frozenset of
    irreflexive index pairs ``(i, j)`` with class i strictly below class j.
    """
    n = r.shape[0]
    mutual = r & r.T
    class_of = [-1] * n
    blocks = []
    for p in range(n):
        if class_of[p] >= 0:
            continue
        members = [q for q in range(p, n) if mutual[p, q]]
        for q in members:
            class_of[q] = len(blocks)
        blocks.append(frozenset(members))
    reps = [min(b) for b in blocks]
    lb = frozenset((i, j)
                   for i in range(len(blocks)) for j in range(len(blocks))
                   if i != j and r[reps[i], reps[j]])
    return tuple(blocks), lb


# ---------------------------------------------------------------------------
# textbook cross-check fixpoints (independent code paths, small inputs only)


def naive_similarity(lts):
    """Plain pair-deletion similarity fixpoint (no bisimulation actions).

    Returns the set of pairs ``(p, q)`` with p similar-below q.  Quadratic in
    pairs and meant for cross-checking on small systems.
    """
    n = lts.num_states
    succ = [{} for _ in range(n)]
    for src, lab, dst in lts.transitions:
        succ[src].setdefault(lab, set()).add(dst)
    rel = {(p, q) for p in range(n) for q in range(n)
           if p not in lts.terminating or q in lts.terminating}
    changed = True
    while changed:
        changed = False
        for p, q in list(rel):
            if (p, q) not in rel:
                continue
            for lab, targets in succ[p].items():
                qt = succ[q].get(lab, ())
                if any(all((pd, qd) not in rel for qd in qt) for pd in targets):
                    rel.discard((p, q))
                    changed = True
                    break
    return rel


def naive_bisimilarity(lts):
    """Textbook partition refinement by one-step signatures.

    Starts from the termination split and refines each block by the set of
    (label, target block) moves of its members until stable.  Returns the
    partition as produced by :func:`classes_from_relation`'s ordering rules.
    """
    n = lts.num_states
    succ = [[] for _ in range(n)]
    for src, lab, dst in lts.transitions:
        succ[src].append((lab, dst))
    block_of = [1 if p in lts.terminating else 0 for p in range(n)]
    while True:
        sigs = {}
        for p in range(n):
            sig = (block_of[p],
                   frozenset((lab, block_of[d]) for lab, d in succ[p]))
            sigs.setdefault(sig, []).append(p)
        groups = sorted(sigs.values(), key=min)
        new = [0] * n
        for i, g in enumerate(groups):
            for p in g:
                new[p] = i
        if new == block_of:
            return tuple(frozenset(g) for g in groups)
        block_of = new


# ---------------------------------------------------------------------------
# cross-system comparison


def disjoint_union(f, g):
    """Disjoint union of two systems with labels matched by name.

    Both alphabets must contain exactly the same names (ids may differ).
    Returns ``(union, offset)`` where g's state k becomes ``offset + k``.
    """
    if set(f.label_names) != set(g.label_names):
        raise ValueError(
            "alphabets differ by name: "
            f"{sorted(set(f.label_names) ^ set(g.label_names))}")
    remap = [f.label_ids[name] for name in g.label_names]
    offset = f.num_states
    transitions = list(f.transitions)
    transitions += [(offset + s, remap[l], offset + d)
                    for s, l, d in g.transitions]
    terminating = set(f.terminating) | {offset + s for s in g.terminating}
    return (Lts(offset + g.num_states, f.label_names, transitions,
                terminating=terminating),
            offset)


def preorder_holds(f, g, bisim_action_names):
    """Whether f's initial state is below g's initial state.

    The two systems are joined by name-matched disjoint union and the naive
    preorder is computed over the joint state space.  Both systems need an
    initial state and equal alphabets.
    """
    if f.initial is None or g.initial is None:
        raise ValueError("both systems need an initial state to be compared")
    union, offset = disjoint_union(f, g)
    b = frozenset(union.label_ids[name] for name in bisim_action_names)
    r = naive_partial_bisim(union, b)
    return bool(r[f.initial, offset + g.initial])


def compare(f, g, bisim_action_names):
    """Both comparison directions at once: ``(f_below_g, g_below_f)``."""
    if f.initial is None or g.initial is None:
        raise ValueError("both systems need an initial state to be compared")
    union, offset = disjoint_union(f, g)
    b = frozenset(union.label_ids[name] for name in bisim_action_names)
    r = naive_partial_bisim(union, b)
    return (bool(r[f.initial, offset + g.initial]),
            bool(r[offset + g.initial, f.initial]))


# ---------------------------------------------------------------------------
# stability verification


def _closures(num_blocks, lb):
    """Reflexive-transitive closures of a block relation, both directions.

    Returns ``(lbc, bbc)``: for each block, the set of blocks reachable
    downward (little brothers) resp. upward (big brothers), including itself.
    """
    down = [set() for _ in range(num_blocks)]
    up = [set() for _ in range(num_blocks)]
    for i, j in lb:
        up[i].add(j)
        down[j].add(i)

    def reach(start, adj):
        acc = {start}
        frontier = [start]
        while frontier:
            x = frontier.pop()
            for y in adj[x]:
                if y not in acc:
                    acc.add(y)
                    frontier.append(y)
        return acc

    lbc = [reach(b, down) for b in range(num_blocks)]
    bbc = [reach(b, up) for b in range(num_blocks)]
    return lbc, bbc


def stable_check(lts, partition, lb, bisim_actions):
    """Verify the four stability conditions of a converged partition pair.

    Checked directly against the transition relation: (1) termination is
    uniform within each block; (2) related blocks respect termination order;
    (3) whenever some member of a block P can do ``a`` into a block R, every
    member of every block above-or-equal P can do ``a`` into R's big-brother
    closure; (4) for a bisimulation action b, whenever some member of a block
    Q can do ``b`` into R, every member of every block below-or-equal Q can
    do ``b`` into R's little-brother closure.

    :returns: list of :class:`Violation`; empty means stable.
    """
    blocks = [frozenset(b) for b in partition]
    nb = len(blocks)
    block_of = {}
    for i, b in enumerate(blocks):
        for s in b:
            if s in block_of:
                raise ValueError(f"state {s} appears in two blocks")
            block_of[s] = i
    if len(block_of) != lts.num_states:
        raise ValueError("partition does not cover the state space")
    lb = set(lb)
    for i, j in lb:
        if i == j or not (0 <= i < nb and 0 <= j < nb):
            raise ValueError(f"bad little-brother pair: {(i, j)}")

    state_targets = [dict() for _ in range(lts.num_states)]
    for src, lab, dst in lts.transitions:
        state_targets[src].setdefault(lab, set()).add(block_of[dst])
    exists_targets = [dict() for _ in range(nb)]
    for i, b in enumerate(blocks):
        for s in b:
            for lab, tset in state_targets[s].items():
                exists_targets[i].setdefault(lab, set()).update(tset)

    lbc, bbc = _closures(nb, lb)
    bset = set(bisim_actions)
    out = []

    for i, b in enumerate(blocks):
        terms = {s in lts.terminating for s in b}
        if len(terms) > 1:
            out.append(Violation("termination_uniform", i, i, None, None,
                                 f"block {i} mixes terminating and not"))
    term_block = {i: min(blocks[i]) in lts.terminating for i in range(nb)}

    pairs = sorted(lb) + [(i, i) for i in range(nb)]
    for i, j in pairs:
        if i != j and term_block[i] and not term_block[j]:
            out.append(Violation("termination_order", i, j, None, None,
                                 f"block {i} terminates but block {j} cannot"))
        for lab, targets in exists_targets[i].items():
            for r in sorted(targets):
                allowed = bbc[r]
                for q in blocks[j]:
                    hit = state_targets[q].get(lab, ())
                    if not any(t in allowed for t in hit):
                        out.append(Violation(
                            "forward_coverage", i, j, lab, r,
                            f"state {q} has no {lts.label_names[lab]!r}-move "
                            f"into the big-brother closure of block {r}"))
                        break
        for lab, targets in exists_targets[j].items():
            if lab not in bset:
                continue
            for r in sorted(targets):
                allowed = lbc[r]
                for p in blocks[i]:
                    hit = state_targets[p].get(lab, ())
                    if not any(t in allowed for t in hit):
                        out.append(Violation(
                            "backward_coverage", i, j, lab, r,
                            f"state {p} has no {lts.label_names[lab]!r}-move "
                            f"into the little-brother closure of block {r}"))
                        break
    return out


def finer_than(p1, lb1, p2, lb2):
    """Whether pair (p1, lb1) refines pair (p2, lb2).

    True iff every block of p1 is contained in a block of p2 and every
    related (or equal) pair of p1 blocks is covered by a related-or-equal
    pair of p2 blocks.
    """
    parent_of = {}
    owner = {}
    for j, big in enumerate(p2):
        for s in big:
            owner[s] = j
    for i, small in enumerate(p1):
        js = {owner.get(s) for s in small}
        if len(js) != 1 or None in js:
            return False
        parent_of[i] = js.pop()
    lb2 = set(lb2)
    for i, j in lb1:
        pi, pj = parent_of[i], parent_of[j]
        if pi != pj and (pi, pj) not in lb2:
            return False
    return True


# ---------------------------------------------------------------------------
# instance generation


def random_lts(num_states, num_transitions, num_labels,
               termination_density=0.0, seed=0):
    """A reproducible random system.

    Draw order is fixed so a seed pins the instance: termination flags first
    (one uniform draw per state), then ``num_transitions`` distinct
    ``(source, label, target)`` triples sampled without replacement from the
    full space.  Labels are named ``a``, ``b``, ... and state 0 is initial.

    :raises ValueError: if more transitions are requested than the space has.
    """
    if num_states <= 0:
        raise ValueError("need at least one state")
    space = num_states * num_states * num_labels
    if num_transitions > space:
        raise ValueError(
            f"{num_transitions} transitions requested but the space only "
            f"has {space}")
    rng = random.Random(seed)
    terminating = [s for s in range(num_states)
                   if rng.random() < termination_density]
    names = [chr(ord("a") + i) if i < 26 else f"l{i}"
             for i in range(num_labels)]
    transitions = []
    if num_transitions:
        for code in rng.sample(range(space), num_transitions):
            src, rest = divmod(code, num_states * num_labels)
            lab, dst = divmod(rest, num_states)
            transitions.append((src, lab, dst))
    return Lts(num_states, names, transitions,
               terminating=terminating, initial=0)
