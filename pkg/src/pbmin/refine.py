"""Refinement of the partition pair to its coarsest stable point.

The driver alternates two kinds of work on a :class:`~pbmin.partition.PartitionState`:

* **block conditions** (applied to each block against itself): whenever some
  member of block C moves under ``a`` into parent R, *every* member must move
  under ``a`` into the union of R's big-brother closure — and for a
  bisimulation action, into the union of R's little-brother closure as well.
  A violating block is split into its covered and uncovered part.
* **pair conditions** (applied to stored little-brother pairs C below D):
  every move of C under ``a`` into R must be answered by all of D inside
  R's big-brother closure, and every move of D under a bisimulation action
  must be answered by all of C inside the little-brother closure.  A block
  that answers only partially is split; a pair whose answer fails totally
  is retracted — only a total failure proves every member of C
  incomparable to every member of D, which is what retraction asserts.

Between rounds the coarse partition chases the fine one: a compound parent
is split along a union of children (see ``find_splitter``), which rekeys the
transition counters of the smaller side.  Worklists track exactly which
checks an operation can have invalidated — counter rekeys from a parent
split (a rekeyed move is an obligation never judged against its new
parent), retracted parent-graph edges (closures can only shrink then), and
fresh pairs.  Every check passes through an O(1) witness first and only
then falls back to an exact member scan, so the common case stays cheap.

When no compound parent is left the two partitions coincide and a final
polish pass re-checks every condition exhaustively; any residual change
re-opens the loop, so the returned pair is stable by construction, not by
trust in the bookkeeping.

Runs in which *every* label appearing on a transition is a bisimulation
action take a direct route instead (:func:`refine` dispatches): any witness
relation for the order then transfers every move of either side back into
the relation, so related states are forced into one block of the
termination-blind stable partition, and the order between the
termination-aware classes inside one such block follows from a small
fixpoint over quotient move sets.  That path never materialises candidate
pairs between unrelated blocks, which is what dominates the pair engine's
cost on large inputs of this kind.
"""

from collections import deque

from ._kernels import kernel_backend, signature_refine
from .partition import PartitionState

_ABSENT = object()


class RefineResult:
    """Converged output: canonical blocks, block-level little-brother pairs,
    and run statistics.

    :ivar blocks: tuple of frozensets, ordered by smallest member state.
    :ivar little_brothers: frozenset of index pairs ``(i, j)`` — block i is
        strictly below block j.
    :ivar stats: dict with ``iterations`` (parent splits), ``splits`` (block
        splits), ``lb_deletions``, ``peak_blocks`` and some extras.
    """

    def __init__(self, blocks, little_brothers, stats):
        self.blocks = blocks
        self.little_brothers = little_brothers
        self.stats = stats

    def __repr__(self):
        return (f"RefineResult(blocks={len(self.blocks)}, "
                f"pairs={len(self.little_brothers)})")


class Refiner:
    """One refinement run over one system."""

    def __init__(self, lts, bisim_actions, check_every=0):
        self.ps = PartitionState(lts, bisim_actions)
        self.bisim = frozenset(bisim_actions)
        # when positive, recount every counter table from scratch after
        # every check_every-th parent split (slow; for audits only)
        self.check_every = check_every
        self._d1 = deque()
        self._pending1 = {}
        self._d2 = deque()
        self._pending2 = {}
        # parents whose up/down closure shrank since the last sweep; regions
        # are captured when the parent edge dies and swept once per round
        self._dirty_up = set()
        self._dirty_down = set()
        self._consume(self.ps.initial_events)
        for c in sorted(self.ps.child_members):
            for d in sorted(self.ps.lb_succ[c]):
                self._push_pair(c, d)

    # ------------------------------------------------------------------
    # worklists

    def _push_cond(self, c, lab, pid):
        entry = (lab, pid)
        pend = self._pending1.setdefault(c, set())
        if entry not in pend:
            pend.add(entry)
            self._d1.append((c, lab, pid))

    def _push_pair(self, c, d, spec=None):
        """Queue pair (c, d) for re-judgment.

        ``spec`` names one flipped trigger as ``(side, lab, r)`` — side "L"
        re-tests c's obligation (lab, r) against d, side "R" the backward
        obligation — so the re-check is O(1); ``None`` demands a full sweep
        of every trigger (used at pair birth, where nothing is settled)."""
        key = (c, d)
        cur = self._pending2.get(key, _ABSENT)
        if cur is _ABSENT:
            self._pending2[key] = None if spec is None else {spec}
            self._d2.append(key)
        elif cur is not None:
            if spec is None:
                self._pending2[key] = None      # upgrade to a full sweep
            else:
                cur.add(spec)

    def _consume(self, ev):
        """Turn the event lists of one mutation into queued re-checks.

        Closure shrinkage is not swept immediately: the affected regions are
        captured now (closures only ever shrink, so capture cannot miss) and
        merged into one sweep per drain round."""
        ps = self.ps
        for p, q in ev["pedge_off"]:
            self._dirty_up |= ps.plbc(p)
            self._dirty_down |= ps.pbbc(q)
        for c, d in ev["new_pairs"]:
            self._push_pair(c, d)

    def _sweep_dirty(self):
        """Queue every condition and pair a batch of closure shrinkage can
        have invalidated, with O(1) witness pre-filters on the pairs."""
        ps = self.ps
        bisim = self.bisim
        # up-closures of the up-dirty parents have shrunk: re-check forward
        # conditions and pairs whose little half moves there
        up_hit, self._dirty_up = self._dirty_up, set()
        down_hit, self._dirty_down = self._dirty_down, set()
        for r in sorted(up_hit):
            for c, lab in sorted(ps.ex_rev.get(r, ())):
                self._push_cond(c, lab, r)
                for d in sorted(ps.lb_succ.get(c, ())):
                    if ps.cnt_al.get((d, lab, r), 0) == 0:
                        self._push_pair(c, d, ("L", lab, r))
        # down-closures of the down-dirty parents have shrunk: re-check
        # backward conditions and pairs whose big half moves there
        for r in sorted(down_hit):
            for c, lab in sorted(ps.ex_rev.get(r, ())):
                if lab not in bisim:
                    continue
                self._push_cond(c, lab, r)
                for e in sorted(ps.lb_pred.get(c, ())):
                    if (lab, r) not in ps.forall_tags[e]:
                        self._push_pair(e, c, ("R", lab, r))

    # ------------------------------------------------------------------
    # checks

    def _split(self, c, subset, pair_mode):
        c2, ev = self.ps.split_child(c, subset, pair_mode)
        # checks queued against the original apply to both halves
        for lab, pid in sorted(self._pending1.get(c, ())):
            self._push_cond(c2, lab, pid)
        self._consume(ev)

    def _check_block(self, c, lab, pid):
        """Both reflexive conditions for block ``c`` on trigger (lab, pid)."""
        ps = self.ps
        if ps.ecnt[c].get((lab, pid), 0) == 0:
            return
        if ps.cnt_al.get((c, lab, pid), 0) == 0:
            members = list(ps.child_members[c])
            cov = ps.table.covered(members, lab, ps.pbbc(pid))
            if len(cov) < len(members):
                # the covered half proved a move the rest cannot answer
                self._push_cond(c, lab, pid)
                self._split(c, cov, "subset_big")
                return
        if lab in self.bisim and (lab, pid) not in ps.forall_tags[c]:
            members = list(ps.child_members[c])
            cov = ps.table.covered(members, lab, ps.plbc(pid))
            if len(cov) < len(members):
                # the covered half owes answers the rest never promised
                self._push_cond(c, lab, pid)
                self._split(c, cov, "subset_little")

    def _judge_fwd(self, c, d, lab, r):
        """Judge the forward obligation of pair (c, d) on trigger (lab, r):
        c moves under lab into r, so all of d must answer into r's
        big-brother closure.

        A partial answer never refutes the whole pair — it splits the
        non-uniform block instead, and the placement rules plus bridge
        materialization re-attach the surviving half.  Only a total failure
        (every member of d mute, every member of c obliging) proves every
        state of c incomparable to every state of d — a fact about fixed
        transitions, so retracting the pair stays sound forever.  Returns
        "ok", "split" (re-judged later under new ids) or "drop"."""
        ps = self.ps
        if ps.cnt_al.get((d, lab, r), 0) > 0:
            return "ok"
        up = ps.pbbc(r)
        dm = list(ps.child_members[d])
        cov = ps.table.covered(dm, lab, up)
        if len(cov) == len(dm):
            return "ok"
        if cov:
            self._push_cond(d, lab, r)
            self._split(d, cov, "subset_big")
            return "split"
        cm = list(ps.child_members[c])
        cov_c = ps.table.covered(cm, lab, up)
        if len(cov_c) < len(cm):
            self._push_cond(c, lab, r)
            self._split(c, cov_c, "subset_big")
            return "split"
        return "drop"

    def _judge_back(self, c, d, lab, r):
        """Judge the backward obligation of pair (c, d) on trigger (lab, r):
        d moves under bisimulation action lab into r, so all of c must
        answer into r's little-brother closure.  Same contract as
        :meth:`_judge_fwd`."""
        ps = self.ps
        down = ps.plbc(r)
        dm = list(ps.child_members[d])
        cov_d = ps.table.covered(dm, lab, down)
        if len(cov_d) < len(dm):
            if cov_d:
                self._push_cond(d, lab, r)
                self._split(d, cov_d, "subset_little")
            return "split" if cov_d else "ok"
        if (lab, r) in ps.forall_tags[c]:
            return "ok"
        cm = list(ps.child_members[c])
        cov = ps.table.covered(cm, lab, down)
        if len(cov) == len(cm):
            return "ok"
        if cov:
            self._push_cond(c, lab, r)
            self._split(c, cov, "subset_little")
            return "split"
        return "drop"

    def _check_pair(self, c, d, spec):
        """Re-judge pair (c, d) on the queued triggers (``None``: on all)."""
        ps = self.ps
        if d not in ps.lb_succ.get(c, ()):
            return
        if spec is None:
            entries = [("L", lab, r) for lab, r in ps.ecnt[c]]
            entries += [("R", lab, r) for lab, r in ps.ecnt[d]
                        if lab in self.bisim]
        else:
            entries = sorted(spec)
        for side, lab, r in entries:
            # skip triggers rekeyed away since the push
            if side == "L":
                if (lab, r) not in ps.ecnt[c]:
                    continue
                verdict = self._judge_fwd(c, d, lab, r)
            else:
                if lab not in self.bisim or (lab, r) not in ps.ecnt[d]:
                    continue
                verdict = self._judge_back(c, d, lab, r)
            if verdict == "drop":
                self._consume(ps.delete_pair(c, d))
                return
            if verdict == "split":
                # block ids moved under us; the split events re-queued
                # whatever reshaped pair remains
                return

    # ------------------------------------------------------------------
    # driving

    def _drain_conds(self):
        """Process queued block conditions until none are left."""
        while self._d1:
            c, lab, pid = self._d1.popleft()
            self._pending1[c].discard((lab, pid))
            self._check_block(c, lab, pid)

    def _drain(self):
        """Process queued checks until none are left; block conditions have
        priority so pairs are only judged against settled blocks."""
        while True:
            self._drain_conds()
            if self._d2:
                key = self._d2.popleft()
                spec = self._pending2.pop(key)
                self._check_pair(key[0], key[1], spec)
                continue
            if self._dirty_up or self._dirty_down:
                self._sweep_dirty()
                continue
            break

    def _polish(self):
        """Exhaustive final sweep over every trigger of every block and pair.

        The incremental loop already judges with the same trigger keys; this
        pass exists so convergence never rests on the event wiring being
        gapless.  Reports whether anything changed."""
        ps = self.ps
        splits = ps.child_splits
        deletions = ps.lb_deletions
        for c in sorted(ps.child_members):
            for lab, pid in sorted(ps.ecnt[c]):
                self._push_cond(c, lab, pid)
        self._drain()
        for c in sorted(ps.child_members):
            for d in sorted(ps.lb_succ[c]):
                self._check_pair(c, d, None)
                self._drain()
        return ps.child_splits != splits or ps.lb_deletions != deletions

    def run(self):
        ps = self.ps
        while True:
            self._drain()
            found = ps.find_splitter()
            if found is None:
                if self._polish():
                    continue
                break
            pid, moved = found
            np_, ev = ps.split_parent(pid, moved)
            for s, lab in ev["lost"]:
                c = ps.child_of[s]
                self._push_cond(c, lab, pid)
                for e in sorted(ps.lb_pred.get(c, ())):
                    self._push_pair(e, c)
                if lab in self.bisim:
                    for f in sorted(ps.lb_succ.get(c, ())):
                        self._push_pair(c, f)
            for s, lab in ev["touched"]:
                # the move was rekeyed to the carved-out parent: obligations
                # against the new trigger have never been judged
                c = ps.child_of[s]
                self._push_cond(c, lab, np_)
                for f in sorted(ps.lb_succ.get(c, ())):
                    self._push_pair(c, f, ("L", lab, np_))
                if lab in self.bisim:
                    for e in sorted(ps.lb_pred.get(c, ())):
                        self._push_pair(e, c, ("R", lab, np_))
            self._consume(ev)
            if self.check_every and ps.parent_splits % self.check_every == 0:
                ps.check_invariants()
        blocks, lb = ps.snapshot()
        stats = {
            "iterations": ps.parent_splits,
            "splits": ps.child_splits,
            "lb_deletions": ps.lb_deletions,
            "peak_blocks": ps.peak_children,
            "fallback_source": ps.fallback_source,
            "fallback_balanced": ps.fallback_balanced,
            "backend": kernel_backend(),
        }
        return RefineResult(blocks, lb, stats)


def _refine_all_two_way(lts):
    """Direct route for runs where every label used by a transition is a
    bisimulation action.

    Because each side's moves must then be answered by the other with the
    answering targets related in the *same* orientation, any witness
    relation for the order is itself a termination-blind bisimulation.  So:

    * states related by the order share a block of the termination-blind
      stable partition (computed first, from a single starting block);
    * the order is a union of products of classes of the termination-aware
      stable partition (computed second, starting from the terminating /
      non-terminating split), since those classes are order-equivalent;
    * between classes, the order is pinned down by a deletion fixpoint on
      the few candidate pairs — distinct termination-aware classes inside
      one blind block whose termination flags do not forbid the pair —
      judged over quotient move sets.

    Classes that survive the fixpoint in both orientations are merged into
    one output block; pairs surviving one way become the strict pairs.
    """
    n = lts.num_states
    term = lts.terminating
    nlab = lts.num_labels
    blind, _, r1 = signature_refine(n, nlab, lts.transitions, [0] * n)
    fine, fcount, r2 = signature_refine(
        n, nlab, lts.transitions, [1 if s in term else 0 for s in range(n)])

    # canonical class numbering by smallest member
    first = {}
    for s in range(n):
        first.setdefault(fine[s], s)
    rank = {f: i for i, f in enumerate(sorted(first, key=first.get))}
    cls = [rank[f] for f in fine]
    members = [[] for _ in range(fcount)]
    for s in range(n):
        members[cls[s]].append(s)
    cterm = [members[i][0] in term for i in range(fcount)]
    cblind = [blind[members[i][0]] for i in range(fcount)]
    by_lab = [{} for _ in range(fcount)]
    for src, lab, dst in lts.transitions:
        by_lab[cls[src]].setdefault(lab, set()).add(cls[dst])

    # candidate pairs: only inside one blind block, never from a
    # terminating class to a non-terminating one
    groups = {}
    for i in range(fcount):
        groups.setdefault(cblind[i], []).append(i)
    rel = set()
    for grp in groups.values():
        for a in grp:
            for b in grp:
                if a != b and not (cterm[a] and not cterm[b]):
                    rel.add((a, b))

    def holds(a, b):
        da, db = by_lab[a], by_lab[b]
        for lab, tgts in da.items():
            answers = db.get(lab)
            if answers is None:
                return False
            for x in tgts:
                if x not in answers and not any(
                        (x, y) in rel for y in answers):
                    return False
        for lab, tgts in db.items():
            answers = da.get(lab)
            if answers is None:
                return False
            for y in tgts:
                if y not in answers and not any(
                        (x, y) in rel for x in answers):
                    return False
        return True

    removed = 0
    changed = True
    while changed:
        changed = False
        for pair in sorted(rel):
            if pair in rel and not holds(*pair):
                rel.discard(pair)
                removed += 1
                changed = True

    # merge mutual survivors; the one-way survivors become strict pairs
    parent = list(range(fcount))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in rel:
        if (b, a) in rel:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    merged = {}
    for i in range(fcount):
        merged.setdefault(find(i), []).extend(members[i])
    ordered = sorted(merged.items(), key=lambda kv: min(kv[1]))
    pos = {root: bi for bi, (root, _) in enumerate(ordered)}
    blocks = tuple(frozenset(ms) for _, ms in ordered)
    lb = set()
    for a, b in rel:
        ra, rb = find(a), find(b)
        if ra != rb:
            lb.add((pos[ra], pos[rb]))
    stats = {
        "iterations": r1 + r2,
        "splits": fcount - len({s in term for s in range(n)}),
        "lb_deletions": removed,
        "peak_blocks": fcount,
        "fallback_source": 0,
        "fallback_balanced": 0,
        "backend": kernel_backend(),
        "mode": "two-way",
    }
    return RefineResult(blocks, frozenset(lb), stats)


def refine(lts, bisim_actions):
    """Compute the coarsest stable partition pair of ``lts``.

    :param lts: the system.
    :param bisim_actions: iterable of label ids answered in both directions.
    :returns: :class:`RefineResult` — blocks are the equivalence classes of
        mutual reachability in the final preorder, pairs its strict part.

    When every label occurring on a transition is a bisimulation action the
    work is routed to a pairless direct computation (see
    :func:`_refine_all_two_way`); otherwise the general worklist engine
    runs.  Both produce identical canonical output.
    """
    acts = frozenset(bisim_actions)
    if {lab for _, lab, _ in lts.transitions} <= acts:
        return _refine_all_two_way(lts)
    return Refiner(lts, acts).run()
