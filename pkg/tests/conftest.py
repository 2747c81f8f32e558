import itertools

import pytest

from smalearn.automaton import Direction, SmaSpec, Way
from smalearn.languages import BINARY

S, R = Direction.STAY, Direction.RIGHT


def words_upto(alphabet_size, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(range(alphabet_size), repeat=n)


@pytest.fixture
def l1_machine():
    """0w1: read the first symbol in place, then scan right remembering the last one."""
    return SmaSpec(
        k=1,
        way=Way.ONE,
        accept=(False, False, True),
        #        0     1     $     #
        delta=((1, None, None, None),
               (1, 2, None, None),
               (1, 2, None, None)),
        head_assign=((S, 0), (R, 0), (R, 0)),
    )


@pytest.fixture
def l2_machine():
    """Even length: initial Stay state, then an odd/even pair scanning right."""
    return SmaSpec(
        k=1,
        way=Way.ONE,
        accept=(True, False, True),
        delta=((1, 1, None, None),
               (2, 2, None, None),
               (1, 1, None, None)),
        head_assign=((S, 0), (R, 0), (R, 0)),
    )


def classical_dfa(table, start, accepting, word):
    """Plain table-driven DFA over input symbols only (no markers, no heads)."""
    q = start
    for c in word:
        q = table[q][c]
    return q in accepting


# 0w1: A start, B "began with 0, last symbol 0", C "began with 0, last symbol 1", D dead
L1_DFA = ({"A": {0: "B", 1: "D"}, "B": {0: "B", 1: "C"}, "C": {0: "B", 1: "C"},
           "D": {0: "D", 1: "D"}}, "A", {"C"})
L2_DFA = ({"E": {0: "O", 1: "O"}, "O": {0: "E", 1: "E"}}, "E", {"E"})


@pytest.fixture
def binary():
    return BINARY


# filled by test_acceptance.py, one line per criterion
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
