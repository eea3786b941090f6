"""Quotient system construction from a converged partition pair.

Given the blocks and the block-level little-brother order produced by
:func:`pbmin.refine.refine`, the quotient keeps one state per class and only
the transitions that carry information:

* mutually related blocks are merged first (a no-op on converged engine
  output, which is strictly ordered, but it makes the construction total);
* for an ordinary action, a class points only at the *maximal* classes it
  fully reaches — an edge to a little brother of another target says
  nothing the bigger target does not already say;
* for a bisimulation action every fully reached target is kept except
  *middle brothers*: targets squeezed strictly between two other fully
  reached targets, whose presence is implied by the outer two.

:func:`prune_unreachable` then drops classes the initial class cannot
reach, and :func:`minimize` chains the whole pipeline.  Classes are
numbered by their smallest member state throughout, so output is canonical.
"""

import logging

from .lts import Lts
from .refine import refine

log = logging.getLogger("pbmin")


class Quotient:
    """A minimized system plus the bookkeeping tying it to the original.

    :ivar lts: the quotient system (full original alphabet).
    :ivar classes: tuple of frozensets of original states, one per quotient
        state, in quotient-state order.
    :ivar class_lb: strict little-brother pairs between quotient states;
        together with the diagonal this is a partial order.
    :ivar state_map: per original state, its quotient state id, or -1 if its
        class was pruned as unreachable.
    :ivar suppressed: number of bisimulation-action transitions dropped by
        the middle-brother rule.
    """

    def __init__(self, lts, classes, class_lb, state_map, suppressed):
        self.lts = lts
        self.classes = classes
        self.class_lb = class_lb
        self.state_map = state_map
        self.suppressed = suppressed

    def __repr__(self):
        return (f"Quotient(states={self.lts.num_states}, "
                f"transitions={self.lts.num_transitions})")


def merge_mutual(blocks, lb):
    """Collapse mutually related blocks.

    Returns ``(classes, order, class_of_block)``: the merged classes, the
    strict order between them as index pairs, and the block-index to
    class-index map.  Classes keep the smallest-member ordering.
    """
    nb = len(blocks)
    succ = [set() for _ in range(nb)]
    for i, j in lb:
        succ[i].add(j)
    # strongly connected components, iteratively (cycles merge)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = [0]
    for root in range(nb):
        if root in index:
            continue
        work = [(root, iter(sorted(succ[root])))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(succ[nxt]))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.append(x)
                    if x == node:
                        break
                comps.append(sorted(comp))
    merged = [frozenset().union(*(blocks[i] for i in comp))
              for comp in comps]
    order_idx = sorted(range(len(merged)), key=lambda k: min(merged[k]))
    rank = {old: new for new, old in enumerate(order_idx)}
    classes = tuple(merged[k] for k in order_idx)
    class_of_block = [-1] * nb
    for ci, comp in enumerate(comps):
        for b in comp:
            class_of_block[b] = rank[ci]
    order = frozenset((class_of_block[i], class_of_block[j])
                      for i, j in lb
                      if class_of_block[i] != class_of_block[j])
    return classes, order, class_of_block


def _strict_up(num, order):
    """Transitive strict-upward reachability per class."""
    succ = [set() for _ in range(num)]
    for i, j in order:
        succ[i].add(j)
    out = []
    for start in range(num):
        acc = set()
        frontier = [start]
        while frontier:
            x = frontier.pop()
            for y in succ[x]:
                if y not in acc:
                    acc.add(y)
                    frontier.append(y)
        acc.discard(start)
        out.append(acc)
    return out


def build_quotient(lts, blocks, lb, bisim_actions):
    """Build the (unpruned) quotient of ``lts`` over a partition pair.

    :param blocks: partition of the states (termination-uniform).
    :param lb: strict little-brother index pairs between blocks.
    :param bisim_actions: label ids answered in both directions.
    :returns: :class:`Quotient` with one state per merged class.
    """
    classes, order, _ = merge_mutual(blocks, lb)
    nc = len(classes)
    class_of = {}
    for i, cls in enumerate(classes):
        for s in cls:
            class_of[s] = i
        terms = {s in lts.terminating for s in cls}
        if len(terms) > 1:
            raise ValueError(f"class {i} mixes terminating and "
                             "non-terminating states")
    up = _strict_up(nc, order)
    bset = frozenset(bisim_actions)

    # full-coverage targets: (label, class) pairs reached from every member
    state_keys = [set() for _ in range(lts.num_states)]
    for src, lab, dst in lts.transitions:
        state_keys[src].add((lab, class_of[dst]))
    kept = []
    suppressed = 0
    for i, cls in enumerate(classes):
        counts = {}
        for s in cls:
            for key in state_keys[s]:
                counts[key] = counts.get(key, 0) + 1
        size = len(cls)
        full = {}
        for (lab, j), cnt in counts.items():
            if cnt == size:
                full.setdefault(lab, set()).add(j)
        for lab, targets in sorted(full.items()):
            if lab in bset:
                for j in sorted(targets):
                    if (up[j] & targets
                            and any(j in up[k] for k in targets if k != j)):
                        suppressed += 1
                    else:
                        kept.append((i, lab, j))
            else:
                for j in sorted(targets):
                    if not (up[j] & targets):
                        kept.append((i, lab, j))

    terminating = [i for i, cls in enumerate(classes)
                   if min(cls) in lts.terminating]
    initial = class_of[lts.initial] if lts.initial is not None else None
    qlts = Lts(nc, lts.label_names, kept, terminating=terminating,
               initial=initial)
    state_map = [-1] * lts.num_states
    for s, c in class_of.items():
        state_map[s] = c
    return Quotient(qlts, classes, order, state_map, suppressed)


def prune_unreachable(quotient):
    """Drop classes the initial class cannot reach.

    Surviving classes are renumbered (smallest-member order is preserved)
    and pruned original states map to -1.  Without an initial state this is
    the identity, with a warning.
    """
    qlts = quotient.lts
    if qlts.initial is None:
        if qlts.num_states:
            log.warning("no initial state; skipping reachability pruning")
        return quotient
    adj = {}
    for i, _lab, j in qlts.transitions:
        adj.setdefault(i, set()).add(j)
    seen = {qlts.initial}
    frontier = [qlts.initial]
    while frontier:
        x = frontier.pop()
        for y in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    if len(seen) == qlts.num_states:
        return quotient
    alive = sorted(seen)
    renum = {old: new for new, old in enumerate(alive)}
    classes = tuple(quotient.classes[old] for old in alive)
    class_lb = frozenset((renum[i], renum[j]) for i, j in quotient.class_lb
                         if i in renum and j in renum)
    transitions = [(renum[i], lab, renum[j])
                   for i, lab, j in qlts.transitions if i in renum]
    terminating = [renum[old] for old in alive
                   if old in qlts.terminating]
    out = Lts(len(alive), qlts.label_names, transitions,
              terminating=terminating, initial=renum[qlts.initial])
    state_map = [renum.get(c, -1) if c >= 0 else -1
                 for c in quotient.state_map]
    return Quotient(out, classes, class_lb, state_map, quotient.suppressed)


def minimize(lts, bisim_actions, keep_unreachable=False):
    """Refine, quotient and prune in one call.

    :returns: ``(quotient, refine_result)`` — the second carries the
        converged blocks, the little-brother pairs and the run statistics.
    """
    result = refine(lts, bisim_actions)
    q = build_quotient(lts, result.blocks, result.little_brothers,
                       bisim_actions)
    if not keep_unreachable:
        q = prune_unreachable(q)
    return q, result
