"""Labeled transition systems with explicit termination.

A system is a finite set of integer states, a list of named action labels,
a set of labeled transitions, a termination predicate (the subset of states
that may successfully terminate), and an optional initial state.  This module
owns the textual exchange format (Aldebaran ``.aut``) plus the two supported
termination encodings: a companion file of state ids, or a reserved label
whose transitions mark their source states as terminating.
"""

from __future__ import annotations

import logging
import re

log = logging.getLogger("pbmin")


class AutParseError(ValueError):
    """Raised for malformed ``.aut`` or termination input, with line info."""


class Lts:
    """A labeled transition system.

    :param num_states: number of states; states are ``0 .. num_states-1``.
    :param label_names: action names; label ids are indices into this list.
    :param transitions: iterable of ``(source, label_id, target)`` triples.
        Duplicates are collapsed (set semantics) with a warning.
    :param terminating: ids of states that may terminate successfully.
    :param initial: optional initial state id.
    """

    def __init__(self, num_states, label_names=(), transitions=(),
                 terminating=(), initial=None):
        self.num_states = int(num_states)
        self.label_names = list(label_names)
        self.label_ids = {name: i for i, name in enumerate(self.label_names)}
        if len(self.label_ids) != len(self.label_names):
            raise ValueError("duplicate label names")
        seen = set()
        ordered = []
        dupes = 0
        for tr in transitions:
            tr = (int(tr[0]), int(tr[1]), int(tr[2]))
            if tr in seen:
                dupes += 1
                continue
            seen.add(tr)
            ordered.append(tr)
        if dupes:
            log.warning("collapsed %d duplicate transition(s)", dupes)
        self.transitions = ordered
        self.terminating = frozenset(int(s) for s in terminating)
        self.initial = None if initial is None else int(initial)
        self._by_source = None

    @property
    def num_transitions(self):
        return len(self.transitions)

    @property
    def num_labels(self):
        return len(self.label_names)

    def label_id(self, name):
        """Resolve a label name to its id, raising ``KeyError`` if absent."""
        return self.label_ids[name]

    def by_source(self):
        """Per-state outgoing adjacency: list of lists of (label_id, target).

        Built lazily and cached; the cached lists must not be mutated.
        """
        if self._by_source is None:
            adj = [[] for _ in range(self.num_states)]
            for src, lab, dst in self.transitions:
                adj[src].append((lab, dst))
            self._by_source = adj
        return self._by_source

    def outgoing_labels(self, state):
        """The set of label ids on transitions leaving ``state``."""
        return {lab for lab, _ in self.by_source()[state]}

    def __eq__(self, other):
        if not isinstance(other, Lts):
            return NotImplemented
        return (self.num_states == other.num_states
                and self.label_names == other.label_names
                and set(self.transitions) == set(other.transitions)
                and self.terminating == other.terminating
                and self.initial == other.initial)

    def __repr__(self):
        return (f"Lts(states={self.num_states}, labels={self.num_labels}, "
                f"transitions={self.num_transitions}, "
                f"terminating={len(self.terminating)}, initial={self.initial})")


class BisimActionSet:
    """The set of actions whose transitions must be answered in both
    directions (the bisimulation actions).  The remaining actions are only
    simulated forward.

    Instances are created from a textual specification and resolved against a
    system's alphabet:

    * ``ALL`` — every label of the system,
    * ``NONE`` — the empty set,
    * ``a,b,c`` — an explicit comma-separated list of label names,
    * ``@path`` — a file of whitespace/comma separated label names.
    """

    def __init__(self, spec, names):
        self.spec = spec
        self.names = frozenset(names)

    @classmethod
    def parse(cls, spec):
        """Parse a specification string (without resolving labels yet)."""
        spec = spec.strip()
        if spec == "ALL" or spec == "NONE":
            return cls(spec, ())
        if spec.startswith("@"):
            try:
                with open(spec[1:], "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise AutParseError(f"cannot read action set file: {exc}") from exc
            names = [w for w in re.split(r"[\s,]+", text) if w]
            return cls(spec, names)
        names = [w.strip() for w in spec.split(",") if w.strip()]
        if not names:
            raise AutParseError(f"empty bisimulation action specification: {spec!r}")
        return cls(spec, names)

    def resolve(self, lts):
        """Return the frozenset of label ids this spec denotes for ``lts``.

        Unknown label names are an error: a silently ignored name would turn
        an intended bisimulation constraint into plain simulation.
        """
        if self.spec == "ALL":
            return frozenset(range(lts.num_labels))
        if self.spec == "NONE":
            return frozenset()
        unknown = sorted(self.names - set(lts.label_names))
        if unknown:
            raise AutParseError(
                "bisimulation action(s) not in the alphabet: " + ", ".join(unknown))
        return frozenset(lts.label_ids[n] for n in self.names)


_HEADER_RE = re.compile(r"^des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_TRANS_RE = re.compile(r'^\(\s*(\d+)\s*,\s*"([^"]*)"\s*,\s*(\d+)\s*\)\s*$')


def parse_aut(text):
    """Parse Aldebaran ``.aut`` text into an :class:`Lts`.

    The header line is ``des (<initial>, <#transitions>, <#states>)`` and each
    following non-blank line is ``(<from>, "<label>", <to>)``.  Labels are
    collected in first-appearance order.  Termination information is not part
    of the format and is supplied separately.
    """
    lines = text.splitlines()
    header = None
    header_no = 0
    for i, raw in enumerate(lines, start=1):
        if raw.strip():
            header = raw.strip()
            header_no = i
            break
    if header is None:
        raise AutParseError("empty input: missing 'des' header")
    m = _HEADER_RE.match(header)
    if not m:
        raise AutParseError(f"line {header_no}: malformed header: {header!r}")
    initial, declared_trans, num_states = (int(g) for g in m.groups())
    if num_states < 1:
        raise AutParseError(f"line {header_no}: state count must be positive")
    if initial >= num_states:
        raise AutParseError(
            f"line {header_no}: initial state {initial} out of range "
            f"(states: 0..{num_states - 1})")

    label_names = []
    label_ids = {}
    transitions = []
    seen = set()
    dup_lines = 0
    for i in range(header_no, len(lines)):
        raw = lines[i]
        line = raw.strip()
        if not line:
            continue
        m = _TRANS_RE.match(line)
        if not m:
            if line.count('"') != 2:
                raise AutParseError(
                    f"line {i + 1}: malformed transition (expected a "
                    f'double-quoted label): {line!r}')
            raise AutParseError(f"line {i + 1}: malformed transition: {line!r}")
        src, name, dst = int(m.group(1)), m.group(2), int(m.group(3))
        if src >= num_states or dst >= num_states:
            raise AutParseError(
                f"line {i + 1}: state id out of range "
                f"(states: 0..{num_states - 1}): {line!r}")
        if name not in label_ids:
            label_ids[name] = len(label_names)
            label_names.append(name)
        tr = (src, label_ids[name], dst)
        if tr in seen:
            dup_lines += 1
            log.warning("line %d: duplicate transition ignored: %s", i + 1, line)
            continue
        seen.add(tr)
        transitions.append(tr)
    if len(transitions) + dup_lines != declared_trans:
        raise AutParseError(
            f"header declares {declared_trans} transitions, found "
            f"{len(transitions) + dup_lines}")
    return Lts(num_states, label_names, transitions, initial=initial)


def parse_termination(text, num_states):
    """Parse a termination companion file: whitespace-separated state ids.

    Returns the frozenset of terminating states.  Ids outside
    ``0..num_states-1`` are an error.
    """
    ids = set()
    for tok in text.split():
        try:
            s = int(tok)
        except ValueError:
            raise AutParseError(f"termination file: not a state id: {tok!r}") from None
        if not 0 <= s < num_states:
            raise AutParseError(
                f"termination file: state {s} out of range (states: "
                f"0..{num_states - 1})")
        ids.add(s)
    return frozenset(ids)


def with_termination(lts, terminating):
    """A copy of ``lts`` with the given termination set."""
    return Lts(lts.num_states, lts.label_names, lts.transitions,
               terminating=terminating, initial=lts.initial)


def apply_termination_label(lts, label_name):
    """Interpret one reserved label as a termination marker.

    Every transition carrying ``label_name`` marks its *source* state as
    terminating; the marker transitions are stripped and the label is removed
    from the alphabet.  Raises :class:`AutParseError` when the label does not
    occur in the system.
    """
    if label_name not in lts.label_ids:
        raise AutParseError(
            f"termination label {label_name!r} not in the alphabet")
    marker = lts.label_ids[label_name]
    terminating = set(lts.terminating)
    kept = []
    for src, lab, dst in lts.transitions:
        if lab == marker:
            terminating.add(src)
        else:
            kept.append((src, lab, dst))
    names = [n for n in lts.label_names if n != label_name]
    remap = {lts.label_ids[n]: i for i, n in enumerate(names)}
    kept = [(s, remap[l], d) for s, l, d in kept]
    return Lts(lts.num_states, names, kept,
               terminating=terminating, initial=lts.initial)


def serialize_aut(lts):
    """Render an :class:`Lts` as ``.aut`` text.

    Transitions are emitted sorted by (source, label name, target) so that
    identical systems always serialize to identical bytes.  An empty system
    serializes with the one-state minimum header ``des (0, 0, 1)``.
    """
    num_states = max(1, lts.num_states)
    initial = lts.initial if lts.initial is not None else 0
    rows = sorted((src, lts.label_names[lab], dst)
                  for src, lab, dst in lts.transitions)
    out = [f"des ({initial}, {len(rows)}, {num_states})"]
    out.extend(f'({src}, "{name}", {dst})' for src, name, dst in rows)
    return "\n".join(out) + "\n"


def serialize_termination(terminating):
    """Render a termination set as one sorted id per line."""
    return "".join(f"{s}\n" for s in sorted(terminating))


def validate(lts):
    """Check internal consistency; returns a list of problem strings.

    An empty list means the system is well-formed: all transition endpoints,
    label ids, terminating ids and the initial state lie in range, and no
    duplicate transitions are stored.
    """
    problems = []
    n = lts.num_states
    if n < 0:
        problems.append(f"negative state count: {n}")
    if lts.initial is not None and not 0 <= lts.initial < n:
        problems.append(f"initial state out of range: {lts.initial}")
    for s in sorted(lts.terminating):
        if not 0 <= s < n:
            problems.append(f"terminating state out of range: {s}")
    seen = set()
    for src, lab, dst in lts.transitions:
        if not 0 <= src < n:
            problems.append(f"transition source out of range: {(src, lab, dst)}")
        if not 0 <= dst < n:
            problems.append(f"transition target out of range: {(src, lab, dst)}")
        if not 0 <= lab < lts.num_labels:
            problems.append(f"transition label out of range: {(src, lab, dst)}")
        if (src, lab, dst) in seen:
            problems.append(f"duplicate transition: {(src, lab, dst)}")
        seen.add((src, lab, dst))
    return problems
