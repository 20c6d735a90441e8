import random

import pytest

from doda.engine import InteractionSequence, parse_sequence

S3_TEXT = "n 3 sink 0\n1 2\n1 0\n2 0\n"


@pytest.fixture
def s3():
    return parse_sequence(S3_TEXT)


@pytest.fixture
def s3_twice(s3):
    return s3 + s3


def random_sequence(rng: random.Random, n: int, length: int) -> InteractionSequence:
    pairs = []
    for _ in range(length):
        a, b = rng.sample(range(n), 2)
        pairs.append((a, b))
    return InteractionSequence(n, pairs)


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
