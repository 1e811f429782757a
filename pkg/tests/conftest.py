import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pfowidth.formula import parse  # noqa: E402

SAMPLES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "samples")


def sample_path(name):
    return os.path.join(SAMPLES, name)


def load_sample(name):
    with open(sample_path(name), encoding="utf-8") as fh:
        text = "\n".join(line.split("#", 1)[0] for line in fh)
    return parse(text)


def adler(n):
    prefix = " ".join(f"exists x{i}." for i in range(1, n + 1))
    body = " & ".join(f"E{i}(x{i},y)" for i in range(1, n + 1))
    return parse(f"{prefix} forall y. ({body})")


@pytest.fixture
def phi0():
    return load_sample("phi0.fo")


@pytest.fixture
def phi5():
    return load_sample("phi5.fo")


REORDER = "exists x. exists y. exists t. (R(x,t) & S(t,y))"
