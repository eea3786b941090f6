"""Pure-Python transition-counter kernel.

This is the reference implementation of the hot inner-loop data structure;
:mod:`pbmin._speedups` is a compiled twin with the same interface and
:mod:`pbmin._kernels` picks one at import time.  Keep the two behaviorally
identical — every result that is a sequence is sorted here so the refinement
loop above makes the same decisions regardless of backend.

The table maintains, for every state ``p``, the multiset of keys
``(label, parent)``: how many outgoing ``label``-transitions of ``p`` end in
the parent block ``parent``.  Parent block ids are assigned by the caller;
everything starts in parent 0.  Only keys with positive count are stored.
"""

BACKEND = "pure"


class TransitionTable:
    """Per-state outgoing-transition counters keyed by (label, target parent).

    :param num_states: size of the state space.
    :param transitions: iterable of ``(source, label, target)`` triples.
    """

    def __init__(self, num_states, transitions):
        self.num_states = num_states
        self._cnt = [{} for _ in range(num_states)]
        self._rev = [[] for _ in range(num_states)]
        for src, lab, dst in transitions:
            key = (lab, 0)
            self._cnt[src][key] = self._cnt[src].get(key, 0) + 1
            self._rev[dst].append((src, lab))

    def out_labels(self, state):
        """Sorted label ids with at least one outgoing transition."""
        return sorted({lab for lab, _ in self._cnt[state]})

    def state_keys(self, state):
        """Sorted ``(label, parent, count)`` triples with positive count."""
        return sorted((lab, par, c)
                      for (lab, par), c in self._cnt[state].items())

    def count(self, state, label, parent):
        """Number of ``label``-transitions from ``state`` into ``parent``."""
        return self._cnt[state].get((label, parent), 0)

    def retarget(self, states, old_parent, new_parent):
        """Move ``states`` from ``old_parent`` to ``new_parent``.

        Rewrites the counters of all predecessors of the moved states and
        reports the key transitions: ``touched`` lists ``(state, label)``
        pairs that gained their first transition into ``new_parent``,
        ``lost`` those whose last transition into ``old_parent`` went away.
        Both lists are sorted and duplicate-free.
        """
        if old_parent == new_parent:
            return [], []
        moved = set(states)
        touched = set()
        lost = set()
        for d in moved:
            for src, lab in self._rev[d]:
                cnt = self._cnt[src]
                old_key = (lab, old_parent)
                new_key = (lab, new_parent)
                left = cnt[old_key] - 1
                if left:
                    cnt[old_key] = left
                else:
                    del cnt[old_key]
                    lost.add((src, lab))
                if cnt.get(new_key):
                    cnt[new_key] += 1
                else:
                    cnt[new_key] = 1
                    touched.add((src, lab))
        return sorted(touched), sorted(lost)

    def covered(self, states, label, parents):
        """The states (in input order) with a ``label``-move into any parent
        of ``parents``."""
        pset = [(label, p) for p in parents]
        out = []
        for s in states:
            cnt = self._cnt[s]
            if any(k in cnt for k in pset):
                out.append(s)
        return out

    def aggregate_keys(self, states):
        """How many of ``states`` have at least one transition per key.

        Returns ``{(label, parent): number_of_states}`` counting each state
        once per key it holds.
        """
        agg = {}
        for s in states:
            for key in self._cnt[s]:
                agg[key] = agg.get(key, 0) + 1
        return agg


def signature_refine(num_states, num_labels, transitions, initial):
    """Coarsest stable refinement of ``initial`` under move signatures.

    ``initial`` holds one hashable key per state; states can only ever share
    a block if their keys were equal.  Blocks are then repeatedly split by
    their members' signatures — the set of (label, target block) moves each
    member has, packed into one integer per move — until no block splits,
    so two states end up together exactly when no sequence of move
    observations separates them.

    A state's signature can only change when some successor's block id
    changed, so after the first pass only blocks holding a predecessor of a
    reassigned state are re-keyed.  A dirty block is redone whole, keeping
    its members' keys mutually comparable; the first signature group keeps
    the block's id, later groups take fresh dense ids in first-seen member
    order, which makes the assignment deterministic and identical across
    backends.

    :param num_states: size of the state space.
    :param num_labels: size of the label alphabet (for move packing).
    :param transitions: iterable of ``(source, label, target)`` triples.
    :param initial: per-state starting keys, any hashables.
    :returns: ``(block ids, block count, rounds)``.
    """
    n = num_states
    adj = [[] for _ in range(n)]
    pred = [[] for _ in range(n)]
    for src, lab, dst in transitions:
        adj[src].append((lab, dst))
        pred[dst].append(src)
    enc = num_labels if num_labels > 0 else 1
    keys = {}
    block = [0] * n
    for s in range(n):
        b = keys.get(initial[s])
        if b is None:
            b = keys[initial[s]] = len(keys)
        block[s] = b
    count = len(keys)
    members = [[] for _ in range(count)]
    for s in range(n):
        members[block[s]].append(s)
    dirty = list(range(count))
    rounds = 0
    while dirty:
        rounds += 1
        carved = []
        for bid in dirty:
            ms = members[bid]
            if len(ms) <= 1:
                continue
            groups = {}
            for s in ms:
                sig = frozenset(lab + enc * block[t] for lab, t in adj[s])
                groups.setdefault(sig, []).append(s)
            if len(groups) == 1:
                continue
            it = iter(groups.values())
            members[bid] = next(it)        # first group keeps the id
            for rest in it:
                nb = count
                count += 1
                members.append(rest)
                for s in rest:
                    block[s] = nb
                carved.extend(rest)
        if not carved:
            break
        hit = set()
        for t in carved:
            for s in pred[t]:
                hit.add(block[s])
        dirty = sorted(hit)
    return block, count, rounds
