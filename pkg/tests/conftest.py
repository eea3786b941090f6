"""Shared example systems and the acceptance summary hook.

``make_f``/``make_g`` build the canonical comparison pair used throughout
the suite: F forks after one step, G makes the choice up front and one of
its branches is a little brother of the other.

The hooks at the bottom print one PASS/FAIL line per acceptance guarantee
after a run that included ``test_acceptance.py``.
"""

import pytest

from pbmin.lts import Lts


def make_f():
    """0 -a-> 1, 1 -b-> 2, 1 -c-> 3; nothing terminates."""
    return Lts(4, ["a", "b", "c"],
               [(0, 0, 1), (1, 1, 2), (1, 2, 3)], initial=0)


def make_g():
    """0 -a-> {1, 2}; 1 -b-> 3, 1 -c-> 4; 2 -b-> 5; nothing terminates.

    State 2 can only do ``b`` while its sibling 1 can do ``b`` and ``c``,
    so 2 is a little brother of 1.
    """
    return Lts(6, ["a", "b", "c"],
               [(0, 0, 1), (0, 0, 2), (1, 1, 3), (1, 2, 4), (2, 1, 5)],
               initial=0)


@pytest.fixture
def sys_f():
    return make_f()


@pytest.fixture
def sys_g():
    return make_g()


# ---------------------------------------------------------------------------
# acceptance summary: one line per guarantee

_ACCEPTANCE_LABELS = (
    ("test_oracle_equivalence",
     "oracle equivalence: blocks and pairs match the naive preorder on 500 "
     "random instances (exact, < 60 s)"),
    ("test_reduction_endpoints",
     "reduction endpoints: full set = textbook bisimilarity, empty set = "
     "textbook similarity classes + little brothers, 200 instances "
     "(exact, < 30 s)"),
    ("test_comparison_goldens",
     "comparison goldens: F/G equivalent for action sets within {b}, "
     "separated by the full alphabet, one-way for {c} (exact)"),
    ("test_quotient_soundness",
     "quotient soundness: every state equivalent to its class image on the "
     "disjoint union, 200 instances (exact, < 60 s)"),
    ("test_stability_verifier",
     "stability: the independent verifier accepts every converged output "
     "produced across the acceptance suites (exact)"),
    ("test_idempotence_monotonicity",
     "idempotence & monotonicity: minimize twice = minimize once; state "
     "counts non-decreasing along nested action-set chains (exact)"),
    ("test_scaling",
     "scaling: full-set median doubling ratio <= 2.6 on 10k-80k transitions "
     "x 5 seeds; empty-set ladder polynomial with counter audits "
     "(< 5 min)"),
)

_acceptance_outcomes = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if report.when == "call" or (report.when == "setup"
                                 and report.outcome != "passed"):
        _acceptance_outcomes[name] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    seen = [(n, label) for n, label in _ACCEPTANCE_LABELS
            if n in _acceptance_outcomes]
    if not seen:
        return
    terminalreporter.section("acceptance")
    for name, label in seen:
        outcome, duration = _acceptance_outcomes[name]
        word = {"passed": "PASS", "failed": "FAIL",
                "skipped": "SKIP"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{word}  {label} [{duration:.1f}s]")
