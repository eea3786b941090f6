"""The refinable two-level partition with little-brother bookkeeping.

The refinement loop in :mod:`pbmin.refine` works on a pair of partitions of
the state space: a fine one (the *blocks*, called children here) and a coarse
one (the *parents*), where every parent is a union of children.  Next to the
partitions it maintains a little-brother relation between children — block C
is a little brother of D when, as far as refinement has discovered so far,
every state of C is below every state of D.  Only a generating set of pairs
is stored (the relation is their transitive closure); every check runs over
closures, so implied pairs never need materializing until a stored link is
retracted.  Derived bookkeeping lets the refinement conditions be checked
cheaply:

* per-child counters ``ecnt[C][(a, P)]``: how many members of C have at
  least one ``a``-transition into parent P (backed by the per-state counters
  of the kernel :class:`~pbmin._kernels.TransitionTable`);
* *forall tags*: the keys where that count equals ``|C|``, i.e. C moves into
  P under ``a`` from every member;
* parent-level pair counts ``cnt_lb[(P, Q)]``: how many stored child pairs
  (C, D) with C in P and D in Q exist, whose positivity for distinct parents
  induces the parent-level little-brother graph (``plb``);
* ``cnt_al[(C, a, P)]``: among P itself and its direct big brothers in the
  parent graph, how many carry a forall tag of (C, a) — a sound O(1)
  witness that C covers the big-brother closure of P under ``a``.

All mutations flow through small event primitives so the counters stay exact,
and every mutating operation returns the event lists the refinement loop
needs for its worklists.  Iteration orders are sorted everywhere so runs are
deterministic.  ``check_invariants`` recomputes the whole derived state from
scratch and is used heavily by the tests.
"""

import heapq
from collections import deque

from ._kernels import TransitionTable


def _events():
    return {"touched": [], "lost": [], "tag_on": [], "tag_off": [],
            "pedge_on": [], "pedge_off": [], "new_pairs": []}


class PartitionState:
    """Mutable partition pair over the states of one system.

    :param lts: the system being refined.
    :param bisim_actions: frozenset of label ids answered in both directions.
    """

    def __init__(self, lts, bisim_actions):
        self.lts = lts
        self.bisim = frozenset(bisim_actions)
        n = lts.num_states
        self.table = TransitionTable(n, lts.transitions)

        # children (the fine partition)
        self.child_of = [0] * n
        self.child_members = {}
        self.child_parent = {}
        self.child_term = {}
        # parents (the coarse partition)
        self.parent_children = {0: set()}
        self.parent_size = {0: n}
        # stored little-brother pairs between children; the below-order the
        # refinement discovers is the transitive closure of these, so a pair
        # implied through others is never stored twice
        self.lb_succ = {}
        self.lb_pred = {}
        # pairs retracted on a total refutation, which proves every member
        # of the little block incomparable to every member of the big one —
        # a fact about the fixed transitions, so no later sub-block of
        # either side can resurrect the pair
        self.dead_pairs = set()
        # derived bookkeeping
        self.ecnt = {}
        self.forall_tags = {}
        self.ex_rev = {}      # parent -> {(child, label)} with some move in
        self.fa_rev = {}      # parent -> {(child, label)} with a forall tag
        self.cnt_al = {}
        self.cnt_lb = {}
        self.plb_succ = {}
        self.plb_pred = {}
        self._pbbc_memo = {}
        self._plbc_memo = {}
        # statistics
        self.parent_splits = 0
        self.child_splits = 0
        self.lb_deletions = 0
        self.peak_children = 0
        self.fallback_source = 0
        self.fallback_balanced = 0

        self._next_child = 0
        self._next_parent = 1
        self._compound = deque()
        self._queued = set()

        ev = _events()
        groups = {}
        for s in range(n):
            key = (s in lts.terminating, tuple(self.table.out_labels(s)))
            groups.setdefault(key, []).append(s)
        by_key = sorted(groups)
        for key in by_key:
            self._new_child(set(groups[key]), 0, key[0], ev)
        # seed the little-brother relation: C below D when C's moves are a
        # subset of D's, they agree on the bisimulation actions, and C's
        # termination capability does not exceed D's
        cids = sorted(self.child_members)
        outset = {c: frozenset(key[1]) for c, key in zip(cids, by_key)}
        for c in cids:
            for d in cids:
                if c == d:
                    continue
                if (outset[c] <= outset[d]
                        and outset[c] & self.bisim == outset[d] & self.bisim
                        and (not self.child_term[c] or self.child_term[d])):
                    self.lb_succ[c].add(d)
                    self.lb_pred[d].add(c)
                    self._cnt_lb_inc(c, d, ev)
        if len(self.child_members) > 1:
            self._push_compound(0)
        self.initial_events = ev

    # ------------------------------------------------------------------
    # event primitives: keep every derived counter exact

    def _exists_on(self, c, lab, pid):
        self.ex_rev.setdefault(pid, set()).add((c, lab))

    def _exists_off(self, c, lab, pid):
        self.ex_rev[pid].discard((c, lab))

    def _tag_on(self, c, lab, q, ev):
        self.forall_tags[c].add((lab, q))
        self.fa_rev.setdefault(q, set()).add((c, lab))
        for p in (q, *self.plb_pred.get(q, ())):
            key = (c, lab, p)
            self.cnt_al[key] = self.cnt_al.get(key, 0) + 1
        ev["tag_on"].append((c, lab, q))

    def _tag_off(self, c, lab, q, ev):
        self.forall_tags[c].discard((lab, q))
        self.fa_rev[q].discard((c, lab))
        for p in (q, *self.plb_pred.get(q, ())):
            key = (c, lab, p)
            left = self.cnt_al[key] - 1
            if left:
                self.cnt_al[key] = left
            else:
                del self.cnt_al[key]
        ev["tag_off"].append((c, lab, q))

    def _pedge_on(self, p, q, ev):
        self.plb_succ.setdefault(p, set()).add(q)
        self.plb_pred.setdefault(q, set()).add(p)
        for c, lab in self.fa_rev.get(q, ()):
            key = (c, lab, p)
            self.cnt_al[key] = self.cnt_al.get(key, 0) + 1
        self._pbbc_memo.clear()
        self._plbc_memo.clear()
        ev["pedge_on"].append((p, q))

    def _pedge_off(self, p, q, ev):
        self.plb_succ[p].discard(q)
        self.plb_pred[q].discard(p)
        for c, lab in self.fa_rev.get(q, ()):
            key = (c, lab, p)
            left = self.cnt_al[key] - 1
            if left:
                self.cnt_al[key] = left
            else:
                del self.cnt_al[key]
        self._pbbc_memo.clear()
        self._plbc_memo.clear()
        ev["pedge_off"].append((p, q))

    def _cnt_lb_inc(self, c, d, ev):
        p, q = self.child_parent[c], self.child_parent[d]
        key = (p, q)
        old = self.cnt_lb.get(key, 0)
        self.cnt_lb[key] = old + 1
        if old == 0 and p != q:
            self._pedge_on(p, q, ev)

    def _cnt_lb_dec(self, p, q, ev):
        key = (p, q)
        left = self.cnt_lb[key] - 1
        if left:
            self.cnt_lb[key] = left
        else:
            del self.cnt_lb[key]
            if p != q:
                self._pedge_off(p, q, ev)

    def _ecnt_add(self, c, lab, pid, delta, ev):
        cell = (lab, pid)
        counts = self.ecnt[c]
        old = counts.get(cell, 0)
        new = old + delta
        if new:
            counts[cell] = new
        else:
            del counts[cell]
        if old == 0 and new > 0:
            self._exists_on(c, lab, pid)
        elif old > 0 and new == 0:
            self._exists_off(c, lab, pid)
        size = len(self.child_members[c])
        tagged = cell in self.forall_tags[c]
        if new == size and not tagged:
            self._tag_on(c, lab, pid, ev)
        elif new != size and tagged:
            self._tag_off(c, lab, pid, ev)

    # ------------------------------------------------------------------
    # construction helpers

    def _new_child(self, members, pid, term, ev):
        c = self._next_child
        self._next_child += 1
        self.child_members[c] = members
        self.child_parent[c] = pid
        self.child_term[c] = term
        self.parent_children[pid].add(c)
        for s in members:
            self.child_of[s] = c
        self.ecnt[c] = {}
        self.forall_tags[c] = set()
        self.lb_succ[c] = set()
        self.lb_pred[c] = set()
        size = len(members)
        agg = self.table.aggregate_keys(sorted(members))
        for (lab, par), cnt in sorted(agg.items()):
            self.ecnt[c][(lab, par)] = cnt
            self._exists_on(c, lab, par)
            if cnt == size:
                self._tag_on(c, lab, par, ev)
        self.peak_children = max(self.peak_children, len(self.child_members))
        return c

    def _push_compound(self, pid):
        if pid not in self._queued:
            self._queued.add(pid)
            self._compound.append(pid)

    # ------------------------------------------------------------------
    # closures over the parent-level little-brother graph

    def pbbc(self, pid):
        """Parents reachable upward from ``pid`` (inclusive): the union of
        these is where a move below ``pid`` may be answered."""
        got = self._pbbc_memo.get(pid)
        if got is None:
            got = self._reach(pid, self.plb_succ)
            self._pbbc_memo[pid] = got
        return got

    def plbc(self, pid):
        """Parents reachable downward from ``pid`` (inclusive)."""
        got = self._plbc_memo.get(pid)
        if got is None:
            got = self._reach(pid, self.plb_pred)
            self._plbc_memo[pid] = got
        return got

    @staticmethod
    def _reach(start, adj):
        acc = {start}
        frontier = [start]
        while frontier:
            x = frontier.pop()
            for y in adj.get(x, ()):
                if y not in acc:
                    acc.add(y)
                    frontier.append(y)
        return acc

    # ------------------------------------------------------------------
    # the three mutating operations

    def split_child(self, c, subset, pair_mode="mutual"):
        """Split child ``c`` by the given proper nonempty member subset.

        The smaller half (ties: the one with the smaller minimum state)
        becomes a fresh child.  ``pair_mode`` says how the two halves relate
        afterwards, and with it where the original's stored pairs live on:

        * ``"mutual"`` — halves stored as little brothers of each other in
          both directions, so the retained id keeps every old pair and the
          two-way sibling link carries them over to the new half;
        * ``"subset_big"`` — the subset half proved a capability the rest
          lacks: seed rest-below-subset, hand incoming pairs to the rest
          and outgoing pairs to the subset half;
        * ``"subset_little"`` — the subset half took on an obligation the
          rest escapes: seed subset-below-rest and hand pairs over the
          opposite way.

        Storing each old pair on exactly one half keeps the stored relation
        linear in the number of splits — the other half's copy is implied
        through the sibling pair, and the closure-based checks see implied
        pairs for free.  Returns ``(new_child_id, events)``.
        """
        members = self.child_members[c]
        sub = set(subset)
        if not sub or sub == members:
            raise ValueError("subset must be proper and nonempty")
        other = members - sub
        if (len(sub), min(sub)) <= (len(other), min(other)):
            new_side = sub
            sub_is_new = True
        else:
            new_side = other
            sub_is_new = False
        ev = _events()
        pid = self.child_parent[c]
        size2 = len(new_side)
        agg2 = self.table.aggregate_keys(sorted(new_side))

        c2 = self._next_child
        self._next_child += 1
        self.child_members[c] = members - new_side
        self.child_members[c2] = new_side
        for s in new_side:
            self.child_of[s] = c2
        self.child_parent[c2] = pid
        self.child_term[c2] = self.child_term[c]
        self.parent_children[pid].add(c2)
        self.ecnt[c2] = {}
        self.forall_tags[c2] = set()
        self.lb_succ[c2] = set()
        self.lb_pred[c2] = set()
        self.peak_children = max(self.peak_children, len(self.child_members))

        # ecnt of the kept half shrinks by the new half's contribution;
        # a full-coverage tag of the original survives on both halves
        size1 = len(self.child_members[c])
        counts1 = self.ecnt[c]
        for key, cnt in sorted(agg2.items()):
            left = counts1[key] - cnt
            if left:
                counts1[key] = left
            else:
                del counts1[key]
                self._exists_off(c, key[0], key[1])
                if key in self.forall_tags[c]:
                    self._tag_off(c, key[0], key[1], ev)
        for key in sorted(counts1):
            if counts1[key] == size1 and key not in self.forall_tags[c]:
                self._tag_on(c, key[0], key[1], ev)
        counts2 = self.ecnt[c2]
        for key, cnt in sorted(agg2.items()):
            counts2[key] = cnt
            self._exists_on(c2, key[0], key[1])
            if cnt == size2:
                self._tag_on(c2, key[0], key[1], ev)

        # hand the stored pairs to their holder half and seed the sibling
        # link; incoming pairs follow the little half (X below little gives
        # X below big through the sibling), outgoing pairs the big one
        sub_id, rest_id = (c2, c) if sub_is_new else (c, c2)
        if pair_mode == "mutual":
            little_id = big_id = c
            siblings = [(c, c2), (c2, c)]
        elif pair_mode == "subset_big":
            little_id, big_id = rest_id, sub_id
            siblings = [(little_id, big_id)]
        elif pair_mode == "subset_little":
            little_id, big_id = sub_id, rest_id
            siblings = [(little_id, big_id)]
        else:
            raise ValueError(f"unknown pair mode: {pair_mode!r}")
        if little_id == c2 and self.lb_pred[c]:
            # same parent on both halves, so the pair counts do not move
            self.lb_pred[c2] = self.lb_pred[c]
            self.lb_pred[c] = set()
            for e in sorted(self.lb_pred[c2]):
                self.lb_succ[e].discard(c)
                self.lb_succ[e].add(c2)
                ev["new_pairs"].append((e, c2))
        if big_id == c2 and self.lb_succ[c]:
            self.lb_succ[c2] = self.lb_succ[c]
            self.lb_succ[c] = set()
            for d in sorted(self.lb_succ[c2]):
                self.lb_pred[d].discard(c)
                self.lb_pred[d].add(c2)
                ev["new_pairs"].append((c2, d))
        for lo, hi in siblings:
            self.lb_succ[lo].add(hi)
            self.lb_pred[hi].add(lo)
            self._cnt_lb_inc(lo, hi, ev)
            ev["new_pairs"].append((lo, hi))

        self._push_compound(pid)
        self.child_splits += 1
        return c2, ev

    def split_parent(self, pid, moved_children):
        """Split parent ``pid`` along a union of its children.

        Whichever side is smaller by states moves to a fresh parent id (so
        the kernel rescan touches the smaller half); pair counts keyed by
        the old parent are removed and re-added under the new keying, with
        edge events emitted for anything that flips.  Returns
        ``(new_parent_id, events)``.
        """
        kids = self.parent_children[pid]
        moved = set(moved_children)
        if not moved or moved == kids or not moved <= kids:
            raise ValueError("need a proper nonempty subset of the children")
        msize = sum(len(self.child_members[c]) for c in moved)
        if 2 * msize > self.parent_size[pid]:
            moved = kids - moved
            msize = self.parent_size[pid] - msize
        np_ = self._next_parent
        self._next_parent += 1
        ev = _events()

        # pass 1: retract every stored pair touching this parent from the
        # pair counts, under the old keying
        old_kids = sorted(kids)
        for c in old_kids:
            for d in sorted(self.lb_succ[c]):
                self._cnt_lb_dec(pid, self.child_parent[d], ev)
            for e in sorted(self.lb_pred[c]):
                ep = self.child_parent[e]
                if ep != pid:
                    self._cnt_lb_dec(ep, pid, ev)

        for c in sorted(moved):
            self.child_parent[c] = np_
        self.parent_children[pid] = kids - moved
        self.parent_children[np_] = moved
        self.parent_size[np_] = msize
        self.parent_size[pid] -= msize
        self.ex_rev.setdefault(np_, set())
        self.fa_rev.setdefault(np_, set())

        moved_states = sorted(
            s for c in moved for s in self.child_members[c])
        touched, lost = self.table.retarget(moved_states, pid, np_)
        ev["touched"] = touched
        ev["lost"] = lost
        for p, lab in lost:
            self._ecnt_add(self.child_of[p], lab, pid, -1, ev)
        for p, lab in touched:
            self._ecnt_add(self.child_of[p], lab, np_, +1, ev)

        # pass 2: re-add the same pairs under the new keying
        for c in old_kids:
            for d in sorted(self.lb_succ[c]):
                self._cnt_lb_inc(c, d, ev)
            for e in sorted(self.lb_pred[c]):
                ep = self.child_parent[e]
                if ep != pid and ep != np_:
                    self._cnt_lb_inc(e, c, ev)

        if len(self.parent_children[pid]) > 1:
            self._push_compound(pid)
        if len(moved) > 1:
            self._push_compound(np_)
        self.parent_splits += 1
        return np_, ev

    def delete_pair(self, c, d):
        """Retract the stored little-brother pair (c, d).

        Every below-chain that ran through the pair gets an explicit bridge
        first — predecessors of ``c`` may still sit below ``d``, and ``c``
        may still sit below successors of ``d`` — so dropping the link never
        drops an ordering the refutation did not actually cover.  Pairs
        already refuted stay gone.
        """
        ev = _events()
        for e in sorted(self.lb_pred[c]):
            if (e != d and d not in self.lb_succ[e]
                    and (e, d) not in self.dead_pairs):
                self.lb_succ[e].add(d)
                self.lb_pred[d].add(e)
                self._cnt_lb_inc(e, d, ev)
                ev["new_pairs"].append((e, d))
        for f in sorted(self.lb_succ[d]):
            if (f != c and f not in self.lb_succ[c]
                    and (c, f) not in self.dead_pairs):
                self.lb_succ[c].add(f)
                self.lb_pred[f].add(c)
                self._cnt_lb_inc(c, f, ev)
                ev["new_pairs"].append((c, f))
        self.lb_succ[c].discard(d)
        self.lb_pred[d].discard(c)
        self.dead_pairs.add((c, d))
        self._cnt_lb_dec(self.child_parent[c], self.child_parent[d], ev)
        self.lb_deletions += 1
        return ev

    # ------------------------------------------------------------------
    # splitter selection

    def find_splitter(self):
        """The next compound parent and a child subset to split off.

        Preference order: a below-half prefix of the within-parent
        little-brother order (built from the strongly-connected condensation,
        littlest components first); failing that a single source component;
        failing that — everything mutually related — a balanced cut that
        ignores orientation.  Returns ``(parent, children)`` or ``None``.
        """
        while self._compound:
            pid = self._compound.popleft()
            self._queued.discard(pid)
            kids = self.parent_children.get(pid)
            if not kids or len(kids) < 2:
                continue
            return pid, self._choose_cut(pid, sorted(kids))
        return None

    def _choose_cut(self, pid, kids):
        sccs = self._condense(pid, kids)
        total = self.parent_size[pid]
        if len(sccs) > 1:
            scc_of = {}
            for i, (_, comp) in enumerate(sccs):
                for c in comp:
                    scc_of[c] = i
            indeg = [0] * len(sccs)
            succs = [set() for _ in sccs]
            for c in kids:
                for d in self.lb_succ[c]:
                    if d in scc_of and scc_of[c] != scc_of[d]:
                        if scc_of[d] not in succs[scc_of[c]]:
                            succs[scc_of[c]].add(scc_of[d])
                            indeg[scc_of[d]] += 1
            heap = [(sccs[i][0], min(sccs[i][1]), i)
                    for i in range(len(sccs)) if indeg[i] == 0]
            heapq.heapify(heap)
            prefix = []
            acc = 0
            while heap:
                states, _, i = heapq.heappop(heap)
                if prefix and 2 * (acc + states) > total:
                    break
                if not prefix and 2 * states > total:
                    break
                prefix.append(i)
                acc += states
                for j in sorted(succs[i]):
                    indeg[j] -= 1
                    if indeg[j] == 0:
                        heapq.heappush(heap, (sccs[j][0], min(sccs[j][1]), j))
            if not prefix:
                # the littlest source component alone exceeds half; take it
                sources = [(sccs[i][0], min(sccs[i][1]), i)
                           for i in range(len(sccs)) if indeg[i] == 0]
                prefix = [min(sources)[2]]
                self.fallback_source += 1
            out = []
            for i in prefix:
                out.extend(sccs[i][1])
            return sorted(out)
        # one big mutually-related component: orientation gives no cut,
        # so balance sizes instead
        self.fallback_balanced += 1
        order = sorted(kids, key=lambda c: (len(self.child_members[c]), c))
        sel = []
        acc = 0
        for c in order:
            if len(sel) == len(kids) - 1:
                break
            size = len(self.child_members[c])
            if sel and 2 * (acc + size) > total:
                break
            sel.append(c)
            acc += size
        return sorted(sel)

    def _condense(self, pid, kids):
        """Strongly connected components of the within-parent pair graph,
        as ``(state_count, members)`` pairs."""
        kidset = set(kids)
        index = {}
        low = {}
        on_stack = set()
        stack = []
        sccs = []
        counter = [0]

        for root in kids:
            if root in index:
                continue
            work = [(root, iter(sorted(self.lb_succ[root] & kidset)))]
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
                        work.append(
                            (nxt, iter(sorted(self.lb_succ[nxt] & kidset))))
                        advanced = True
                        break
                    if nxt in on_stack:
                        low[node] = min(low[node], index[nxt])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    comp = []
                    while True:
                        x = stack.pop()
                        on_stack.discard(x)
                        comp.append(x)
                        if x == node:
                            break
                    size = sum(len(self.child_members[c]) for c in comp)
                    sccs.append((size, sorted(comp)))
        return sccs

    # ------------------------------------------------------------------
    # queries and export

    def covered_members(self, c, lab, parents):
        """Members of child ``c`` with a ``lab``-move into any of
        ``parents``, in ascending state order."""
        return self.table.covered(sorted(self.child_members[c]), lab,
                                  sorted(parents))

    def is_converged(self):
        """True when every parent holds exactly one child."""
        return all(len(kids) == 1 for kids in self.parent_children.values())

    def snapshot(self):
        """Canonical public view: ``(blocks, little_brothers)`` with blocks
        ordered by smallest member and pairs as index pairs.

        The stored pairs are a generating set of the discovered order, so
        the exported relation is their transitive closure (diagonal
        dropped)."""
        order = sorted(self.child_members, key=lambda c: min(
            self.child_members[c])) if self.child_members else []
        idx = {c: i for i, c in enumerate(order)}
        blocks = tuple(frozenset(self.child_members[c]) for c in order)
        lb = set()
        for c in order:
            for d in self._reach(c, self.lb_succ) - {c}:
                lb.add((idx[c], idx[d]))
        return blocks, frozenset(lb)

    # ------------------------------------------------------------------
    # exhaustive self-check (tests only; quadratic-ish)

    def check_invariants(self):
        """Recompute all derived state from scratch and compare."""
        n = self.lts.num_states
        seen = set()
        for c, members in self.child_members.items():
            assert members, f"empty child {c}"
            assert not members & seen, f"overlapping child {c}"
            seen |= members
            for s in members:
                assert self.child_of[s] == c
            terms = {s in self.lts.terminating for s in members}
            assert terms == {self.child_term[c]}, f"mixed termination in {c}"
            pid = self.child_parent[c]
            assert c in self.parent_children[pid]
        assert len(seen) == n
        for pid, kids in self.parent_children.items():
            for c in kids:
                assert self.child_parent[c] == pid
            assert self.parent_size[pid] == sum(
                len(self.child_members[c]) for c in kids)

        parent_of_state = [self.child_parent[self.child_of[s]]
                           for s in range(n)]
        expect_ecnt = {c: {} for c in self.child_members}
        per_state = [set() for _ in range(n)]
        for src, lab, dst in self.lts.transitions:
            per_state[src].add((lab, parent_of_state[dst]))
        for s in range(n):
            cdict = expect_ecnt[self.child_of[s]]
            for key in per_state[s]:
                cdict[key] = cdict.get(key, 0) + 1
        for c in self.child_members:
            assert self.ecnt[c] == expect_ecnt[c], f"ecnt wrong for {c}"
            size = len(self.child_members[c])
            expect_tags = {k for k, v in expect_ecnt[c].items() if v == size}
            assert self.forall_tags[c] == expect_tags, f"tags wrong for {c}"

        expect_ex = {}
        expect_fa = {}
        for c in self.child_members:
            for lab, pid in self.ecnt[c]:
                expect_ex.setdefault(pid, set()).add((c, lab))
            for lab, pid in self.forall_tags[c]:
                expect_fa.setdefault(pid, set()).add((c, lab))
        assert {p: s for p, s in self.ex_rev.items() if s} == expect_ex
        assert {p: s for p, s in self.fa_rev.items() if s} == expect_fa

        expect_lb = {}
        for c in self.child_members:
            for d in self.lb_succ[c]:
                assert c != d and d in self.child_members
                assert c in self.lb_pred[d]
                key = (self.child_parent[c], self.child_parent[d])
                expect_lb[key] = expect_lb.get(key, 0) + 1
        for d in self.child_members:
            for c in self.lb_pred[d]:
                assert d in self.lb_succ[c]
        assert self.cnt_lb == expect_lb, "pair counts wrong"
        expect_succ = {}
        expect_pred = {}
        for (p, q), v in expect_lb.items():
            if p != q and v > 0:
                expect_succ.setdefault(p, set()).add(q)
                expect_pred.setdefault(q, set()).add(p)
        assert {p: s for p, s in self.plb_succ.items() if s} == expect_succ
        assert {p: s for p, s in self.plb_pred.items() if s} == expect_pred

        expect_al = {}
        for c in self.child_members:
            for lab, q in self.forall_tags[c]:
                for p in (q, *expect_pred.get(q, ())):
                    key = (c, lab, p)
                    expect_al[key] = expect_al.get(key, 0) + 1
        assert self.cnt_al == expect_al, "coverage witness counts wrong"
