# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled transition-counter kernel.

Behavioral twin of :mod:`pbmin._kernels_py` — same class, same methods, same
sorted results — with the per-state ``(label, parent)`` counters held in C++
hash maps keyed by ``label << 32 | parent`` and the reverse edges in flat
arrays.  See the pure module for the full interface contract.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize
from cython.operator cimport dereference as deref, preincrement as inc
from libcpp.algorithm cimport sort
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

ctypedef unsigned long long u64
ctypedef unordered_map[u64, long] cntmap

BACKEND = "compiled"

cdef inline u64 _key(long lab, long par):
    return (<u64> lab) << 32 | <u64> par


cdef class TransitionTable:
    """Per-state outgoing-transition counters keyed by (label, target parent).

    :param num_states: size of the state space.
    :param transitions: iterable of ``(source, label, target)`` triples.
    """

    cdef vector[cntmap] _cnt
    cdef vector[long] _rev_ptr
    cdef vector[long] _rev_src
    cdef vector[long] _rev_lab
    cdef readonly long num_states

    def __init__(self, num_states, transitions):
        cdef long n = num_states
        cdef long src, lab, dst, i, pos
        self.num_states = n
        self._cnt.resize(n)
        triples = [(s, l, d) for s, l, d in transitions]
        cdef long m = len(triples)
        self._rev_ptr.assign(n + 1, 0)
        for src, lab, dst in triples:
            self._cnt[src][_key(lab, 0)] += 1
            self._rev_ptr[dst + 1] += 1
        for i in range(n):
            self._rev_ptr[i + 1] += self._rev_ptr[i]
        self._rev_src.resize(m)
        self._rev_lab.resize(m)
        cdef vector[long] fill = self._rev_ptr
        for src, lab, dst in triples:
            pos = fill[dst]
            fill[dst] = pos + 1
            self._rev_src[pos] = src
            self._rev_lab[pos] = lab

    def out_labels(self, state):
        """Sorted label ids with at least one outgoing transition."""
        cdef long s = state
        cdef cntmap.iterator it = self._cnt[s].begin()
        labs = set()
        while it != self._cnt[s].end():
            labs.add(<long> (deref(it).first >> 32))
            inc(it)
        return sorted(labs)

    def state_keys(self, state):
        """Sorted ``(label, parent, count)`` triples with positive count."""
        cdef long s = state
        cdef cntmap.iterator it = self._cnt[s].begin()
        out = []
        while it != self._cnt[s].end():
            out.append((<long> (deref(it).first >> 32),
                        <long> (deref(it).first & 0xFFFFFFFFu),
                        deref(it).second))
            inc(it)
        out.sort()
        return out

    def count(self, state, label, parent):
        """Number of ``label``-transitions from ``state`` into ``parent``."""
        cdef long s = state
        cdef cntmap.iterator it = self._cnt[s].find(_key(label, parent))
        if it == self._cnt[s].end():
            return 0
        return deref(it).second

    def retarget(self, states, old_parent, new_parent):
        """Move ``states`` from ``old_parent`` to ``new_parent``.

        Same contract as the pure twin: returns sorted duplicate-free
        ``touched`` and ``lost`` lists of ``(state, label)`` pairs.
        """
        cdef long op = old_parent, np_ = new_parent
        cdef long d, src, lab, j, left, cur
        cdef u64 old_key, new_key
        if op == np_:
            return [], []
        touched = set()
        lost = set()
        for d_obj in states:
            d = d_obj
            for j in range(self._rev_ptr[d], self._rev_ptr[d + 1]):
                src = self._rev_src[j]
                lab = self._rev_lab[j]
                old_key = _key(lab, op)
                new_key = _key(lab, np_)
                left = self._cnt[src][old_key] - 1
                if left:
                    self._cnt[src][old_key] = left
                else:
                    self._cnt[src].erase(old_key)
                    lost.add((src, lab))
                cur = self._cnt[src][new_key]
                if cur == 0:
                    touched.add((src, lab))
                self._cnt[src][new_key] = cur + 1
        return sorted(touched), sorted(lost)

    def covered(self, states, label, parents):
        """The states (in input order) with a ``label``-move into any parent
        of ``parents``."""
        cdef long lab = label, s, p
        cdef vector[u64] keys
        cdef size_t k
        cdef bint hit
        for p_obj in parents:
            p = p_obj
            keys.push_back(_key(lab, p))
        out = []
        for s_obj in states:
            s = s_obj
            hit = False
            for k in range(keys.size()):
                if self._cnt[s].count(keys[k]):
                    hit = True
                    break
            if hit:
                out.append(s_obj)
        return out

    def aggregate_keys(self, states):
        """How many of ``states`` have at least one transition per key."""
        cdef unordered_map[u64, long] agg
        cdef cntmap.iterator it
        cdef unordered_map[u64, long].iterator ag
        cdef long s
        for s_obj in states:
            s = s_obj
            it = self._cnt[s].begin()
            while it != self._cnt[s].end():
                agg[deref(it).first] += 1
                inc(it)
        out = {}
        ag = agg.begin()
        while ag != agg.end():
            out[(<long> (deref(ag).first >> 32),
                 <long> (deref(ag).first & 0xFFFFFFFFu))] = deref(ag).second
            inc(ag)
        return out


def signature_refine(num_states, num_labels, transitions, initial):
    """Compiled twin of the pure kernel's ``signature_refine``.

    Same grouping and same first-seen id assignment, so the returned block
    ids are identical; signatures are sorted deduplicated move codes held in
    flat arrays and compared as raw bytes.
    """
    cdef long n = num_states
    cdef long enc = num_labels if num_labels > 0 else 1
    cdef long src, lab, dst, i, j, s, t, bid, z, nb, count, rounds, ulen
    cdef long di, gi, ng
    triples = [(a, b, c) for a, b, c in transitions]
    cdef long m = len(triples)
    cdef vector[long] adj_ptr, adj_lab, adj_tgt, pred_ptr, pred_dat
    cdef vector[long] fill_a, fill_p, blk, dirty, carved
    cdef vector[char] flag
    cdef vector[u64] codes
    adj_ptr.assign(n + 1, 0)
    pred_ptr.assign(n + 1, 0)
    for src, lab, dst in triples:
        adj_ptr[src + 1] += 1
        pred_ptr[dst + 1] += 1
    for i in range(n):
        adj_ptr[i + 1] += adj_ptr[i]
        pred_ptr[i + 1] += pred_ptr[i]
    adj_lab.resize(m)
    adj_tgt.resize(m)
    pred_dat.resize(m)
    fill_a = adj_ptr
    fill_p = pred_ptr
    for src, lab, dst in triples:
        j = fill_a[src]
        fill_a[src] = j + 1
        adj_lab[j] = lab
        adj_tgt[j] = dst
        j = fill_p[dst]
        fill_p[dst] = j + 1
        pred_dat[j] = src
    keys = {}
    blk.resize(n)
    for i in range(n):
        k = initial[i]
        ob = keys.get(k)
        if ob is None:
            ob = len(keys)
            keys[k] = ob
        blk[i] = <long> ob
    count = len(keys)
    members = [[] for _ in range(count)]
    for i in range(n):
        members[blk[i]].append(i)
    for i in range(count):
        dirty.push_back(i)
    rounds = 0
    while dirty.size() > 0:
        rounds += 1
        carved.clear()
        for di in range(<long> dirty.size()):
            bid = dirty[di]
            ms = members[bid]
            z = len(ms)
            if z <= 1:
                continue
            groups = {}
            for s_obj in ms:
                s = s_obj
                codes.clear()
                for j in range(adj_ptr[s], adj_ptr[s + 1]):
                    codes.push_back(
                        <u64> adj_lab[j] + <u64> enc * <u64> blk[adj_tgt[j]])
                sort(codes.begin(), codes.end())
                ulen = 0
                for j in range(<long> codes.size()):
                    if j == 0 or codes[j] != codes[ulen - 1]:
                        codes[ulen] = codes[j]
                        ulen += 1
                if ulen:
                    key = PyBytes_FromStringAndSize(
                        <char*> &codes[0], ulen * sizeof(u64))
                else:
                    key = b""
                grp = groups.get(key)
                if grp is None:
                    groups[key] = grp = []
                grp.append(s_obj)
            if len(groups) == 1:
                continue
            vals = list(groups.values())
            members[bid] = vals[0]          # first group keeps the id
            ng = len(vals)
            for gi in range(1, ng):
                nb = count
                count += 1
                rest = vals[gi]
                members.append(rest)
                for s_obj in rest:
                    s = s_obj
                    blk[s] = nb
                    carved.push_back(s)
        if carved.size() == 0:
            break
        flag.assign(count, 0)
        for i in range(<long> carved.size()):
            t = carved[i]
            for j in range(pred_ptr[t], pred_ptr[t + 1]):
                flag[blk[pred_dat[j]]] = 1
        dirty.clear()
        for i in range(count):
            if flag[i]:
                dirty.push_back(i)
    out = [0] * n
    for i in range(n):
        out[i] = blk[i]
    return out, count, rounds
