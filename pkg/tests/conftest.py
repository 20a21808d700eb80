import random
from fractions import Fraction

import pytest

from gaudin_lab.lie import build_algebra

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def sl2():
    return build_algebra("sl2")


@pytest.fixture(scope="session")
def sl3():
    return build_algebra("sl3")


def random_points(rng, N, gaussian=False, span=20, den=9):
    """N distinct exact points (Fractions, or (re, im) pairs when gaussian)."""
    while True:
        pts = []
        for _ in range(N):
            re = Fraction(rng.randint(-span, span), rng.randint(1, den))
            if gaussian:
                pts.append((re, Fraction(rng.randint(-span, span), rng.randint(1, den))))
            else:
                pts.append(re)
        if len(set(pts)) == N:
            return tuple(pts)


def random_real_floats(rng, N, lo=-3.0, hi=3.0, sep=0.2):
    while True:
        pts = sorted(rng.uniform(lo, hi) for _ in range(N))
        if all(b - a > sep for a, b in zip(pts, pts[1:])):
            rng.shuffle(pts)
            return tuple(pts)


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, passed, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
