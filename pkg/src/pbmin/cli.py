"""Command-line front end.

Subcommands:

* ``minimize`` — read a system, minimize it for a bisimulation action set,
  write the quotient plus optional map / little-brother / stats artifacts;
* ``compare`` — decide how two systems relate under the preorder;
* ``verify`` — re-check a minimize run's map and little-brother dump
  against the stability conditions, independently of the engine;
* ``generate`` — emit a reproducible random system;
* ``bench`` — time minimization runs over generated instances.

Exit codes: 0 success (for ``compare``: equivalence), 1 inequivalence,
2 parse/specification errors, 3 verification failure, 4 I/O errors.
All artifact files are byte-deterministic for fixed inputs and flags;
timings go only to the bench table on stdout.
"""

import argparse
import logging
import re
import sys
import time

from . import oracle
from .lts import (AutParseError, BisimActionSet, apply_termination_label,
                  parse_aut, parse_termination, serialize_aut,
                  serialize_termination, with_termination)
from .quotient import minimize


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(path, text):
    """Write ``text`` to ``path``, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_system(path, term_file=None, term_label=None):
    lts = parse_aut(_read(path))
    if term_file is not None:
        lts = with_termination(
            lts, parse_termination(_read(term_file), lts.num_states))
    elif term_label is not None:
        lts = apply_termination_label(lts, term_label)
    return lts


def _lb_dump(classes, class_lb):
    """Debug dump: one ``B<i>: {states}`` line per block, then the order."""
    lines = []
    for i, cls in enumerate(classes):
        inner = ", ".join(str(s) for s in sorted(cls))
        lines.append(f"B{i}: {{{inner}}}")
    lines.extend(f"B{i} <= B{j}" for i, j in sorted(class_lb))
    return "".join(line + "\n" for line in lines)


def cmd_minimize(args):
    lts = _load_system(args.input, args.term_file, args.term_label)
    actions = BisimActionSet.parse(args.bisim_actions).resolve(lts)
    q, res = minimize(lts, actions, keep_unreachable=args.keep_unreachable)

    failed = False
    if args.verify:
        violations = oracle.stable_check(lts, res.blocks,
                                         res.little_brothers, actions)
        for v in violations:
            print(f"pbmin: unstable: {v}", file=sys.stderr)
        failed = failed or bool(violations)
    if args.oracle_check:
        if lts.num_states <= args.oracle_cap:
            rel = oracle.naive_partial_bisim(lts, actions)
            blocks, lb = oracle.classes_from_relation(rel)
            if (blocks, lb) != (res.blocks, res.little_brothers):
                print("pbmin: oracle disagreement on classes or order",
                      file=sys.stderr)
                failed = True
        else:
            logging.getLogger("pbmin").warning(
                "oracle check skipped: %d states exceeds cap %d",
                lts.num_states, args.oracle_cap)
    if failed:
        return 3

    _emit(args.output, serialize_aut(q.lts))
    if args.map_out is not None:
        _emit(args.map_out,
              "".join(f"{s} {c}\n" for s, c in enumerate(q.state_map)))
    if args.lb_out is not None:
        _emit(args.lb_out, _lb_dump(q.classes, q.class_lb))
    if args.stats is not None:
        _emit(args.stats,
              "".join(f"{key}={res.stats[key]}\n"
                      for key in ("iterations", "splits", "lb_deletions",
                                  "peak_blocks")))
    return 0


def cmd_compare(args):
    f = _load_system(args.f, args.term_file_f, args.term_label)
    g = _load_system(args.g, args.term_file_g, args.term_label)
    aset = BisimActionSet.parse(args.bisim_actions)
    aset.resolve(f)  # validate against the alphabet early
    if aset.spec == "ALL":
        names = frozenset(f.label_names)
    elif aset.spec == "NONE":
        names = frozenset()
    else:
        names = aset.names
    f_le_g, g_le_f = oracle.compare(f, g, names)
    if f_le_g and g_le_f:
        print("F == G")
        return 0
    if f_le_g:
        print("F <= G")
    elif g_le_f:
        print("G <= F")
    else:
        print("incomparable")
    return 1


_LB_EDGE_RE = re.compile(r"^B(\d+)\s*<=\s*B(\d+)\s*$")
_LB_BLOCK_RE = re.compile(r"^B(\d+):")


def _parse_map(text, num_states):
    state_map = [None] * num_states
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise AutParseError(f"map file: malformed line: {line!r}")
        try:
            s, c = int(parts[0]), int(parts[1])
        except ValueError:
            raise AutParseError(
                f"map file: malformed line: {line!r}") from None
        if not 0 <= s < num_states:
            raise AutParseError(f"map file: state {s} out of range")
        if c < 0:
            raise AutParseError(
                "map file: contains pruned states (-1); produce the map "
                "with --keep-unreachable to make it verifiable")
        state_map[s] = c
    missing = [s for s, c in enumerate(state_map) if c is None]
    if missing:
        raise AutParseError(f"map file: no class for state(s) {missing}")
    num_classes = max(state_map) + 1 if state_map else 0
    members = [set() for _ in range(num_classes)]
    for s, c in enumerate(state_map):
        members[c].add(s)
    empty = [i for i, m in enumerate(members) if not m]
    if empty:
        raise AutParseError(f"map file: class id gap at {empty}")
    return tuple(frozenset(m) for m in members)


def _parse_lb(text, num_classes):
    pairs = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or _LB_BLOCK_RE.match(line):
            continue
        m = _LB_EDGE_RE.match(line)
        if not m:
            raise AutParseError(f"order file: malformed line: {line!r}")
        i, j = int(m.group(1)), int(m.group(2))
        if i >= num_classes or j >= num_classes:
            raise AutParseError(f"order file: block id out of range: {line!r}")
        pairs.add((i, j))
    return frozenset(pairs)


def cmd_verify(args):
    lts = _load_system(args.input, args.term_file, args.term_label)
    actions = BisimActionSet.parse(args.bisim_actions).resolve(lts)
    partition = _parse_map(_read(args.map), lts.num_states)
    lb = frozenset()
    if args.lb is not None:
        lb = _parse_lb(_read(args.lb), len(partition))
    violations = oracle.stable_check(lts, partition, lb, actions)
    if violations:
        for v in violations:
            print(f"pbmin: unstable: {v}", file=sys.stderr)
        return 3
    print(f"stable: {len(partition)} blocks, {len(lb)} order pairs")
    return 0


def cmd_generate(args):
    m = args.transitions
    if m is None:
        m = min(4 * args.states, args.states * args.states * args.labels)
    lts = oracle.random_lts(args.states, m, args.labels,
                            termination_density=args.term_density,
                            seed=args.seed)
    _emit(args.output, serialize_aut(lts))
    if args.term_out is not None:
        _emit(args.term_out, serialize_termination(lts.terminating))
    return 0


def cmd_bench(args):
    specs = args.bisim_actions or ["NONE", "ALL"]
    m = args.transitions
    if m is None:
        m = min(4 * args.states, args.states * args.states * args.labels)
    print("instance\tbisim\tin_states\tin_trans\tout_states\tout_trans"
          "\ttime_ms")
    for i in range(args.instances):
        lts = oracle.random_lts(args.states, m, args.labels,
                                termination_density=args.term_density,
                                seed=args.seed + i)
        for spec in specs:
            actions = BisimActionSet.parse(spec).resolve(lts)
            for _ in range(args.repetitions):
                t0 = time.perf_counter()
                q, _res = minimize(lts, actions)
                dt = (time.perf_counter() - t0) * 1000.0
                print(f"{i}\t{spec}\t{lts.num_states}"
                      f"\t{lts.num_transitions}\t{q.lts.num_states}"
                      f"\t{q.lts.num_transitions}\t{dt:.3f}")
    return 0


def _add_term_group(sub):
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--term-file", metavar="PATH",
                       help="termination companion file (state ids)")
    group.add_argument("--term-label", metavar="NAME",
                       help="treat this label as a termination marker")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pbmin",
        description="Minimize and compare labeled transition systems under "
                    "the partial-bisimulation preorder.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command")

    p = sub.add_parser("minimize", help="minimize one system")
    p.add_argument("input", help="input .aut file")
    p.add_argument("--bisim-actions", required=True, metavar="SPEC",
                   help="a,b | @file | ALL | NONE")
    _add_term_group(p)
    p.add_argument("--output", metavar="PATH",
                   help="minimized .aut (default: stdout)")
    p.add_argument("--map-out", metavar="PATH",
                   help="state-to-class map, '<state> <class>' per line")
    p.add_argument("--lb-out", metavar="PATH",
                   help="class little-brother dump")
    p.add_argument("--stats", metavar="PATH", help="run statistics")
    p.add_argument("--keep-unreachable", action="store_true",
                   help="skip reachability pruning")
    p.add_argument("--verify", action="store_true",
                   help="re-check stability of the converged pair")
    p.add_argument("--oracle-check", action="store_true",
                   help="cross-check classes against the naive oracle")
    p.add_argument("--oracle-cap", type=int, default=100, metavar="N",
                   help="state-count cap for --oracle-check (default 100)")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("compare", help="relate two systems")
    p.add_argument("f", help="first system (.aut)")
    p.add_argument("g", help="second system (.aut)")
    p.add_argument("--bisim-actions", required=True, metavar="SPEC")
    p.add_argument("--term-file-f", metavar="PATH")
    p.add_argument("--term-file-g", metavar="PATH")
    p.add_argument("--term-label", metavar="NAME")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify",
                       help="check minimize artifacts for stability")
    p.add_argument("input", help="original .aut file")
    p.add_argument("--bisim-actions", required=True, metavar="SPEC")
    p.add_argument("--map", required=True, metavar="PATH",
                   help="map file from minimize --map-out")
    p.add_argument("--lb", metavar="PATH",
                   help="order dump from minimize --lb-out")
    _add_term_group(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="emit a random system")
    p.add_argument("--states", type=int, default=32)
    p.add_argument("--transitions", type=int, default=None)
    p.add_argument("--labels", type=int, default=2)
    p.add_argument("--term-density", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", metavar="PATH")
    p.add_argument("--term-out", metavar="PATH")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="time minimization runs")
    p.add_argument("--states", type=int, default=64)
    p.add_argument("--transitions", type=int, default=None)
    p.add_argument("--labels", type=int, default=2)
    p.add_argument("--term-density", type=float, default=0.0)
    p.add_argument("--instances", type=int, default=3)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bisim-actions", action="append", metavar="SPEC",
                   help="repeatable; default: NONE and ALL")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr,
                        format="pbmin: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except AutParseError as exc:
        print(f"pbmin: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"pbmin: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pbmin: i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
