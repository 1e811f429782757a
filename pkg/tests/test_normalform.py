import pytest
from hypothesis import given, settings, strategies as st

from gen import random_formula, rng_for
from pfowidth.errors import StepBudgetExceeded
from pfowidth.formula import Atom, conjuncts, parse, width
from pfowidth.minimize import t_equivalent
from pfowidth.normalform import local_potentials, normalize, y_normal_form, y_potential, yprime_potential
from pfowidth.rules import replay
from conftest import adler


def test_y_potential_examples():
    assert y_potential(parse("exists x. R(x)")) == 1
    assert y_potential(parse("exists x. (R(x) & S(x))")) == 4
    assert y_potential(parse("forall x. exists y. (R(x,y) & S(y))")) == 8


def test_yprime_potential_examples():
    assert yprime_potential(parse("forall x. (R(x) & S(x))")) == 3
    assert yprime_potential(parse("(forall x. R(x)) & (forall x. S(x))")) == 2
    assert yprime_potential(parse("exists y. (R(y) & S(y))")) == 1


def test_local_potentials_keys():
    assert local_potentials(parse("forall x. (R(x) & S(x))")) == {(): 1}
    assert local_potentials(parse("(forall x. R(x)) & (forall y. S(y))")) == {(0,): 0, (1,): 0}


def test_normal_form_of_phi0(phi0, phi5):
    nf = normalize(phi0)
    assert t_equivalent(nf.formula, normalize(phi5).formula)
    assert replay(phi0, nf.trace) == nf.formula


def test_atom_is_its_own_normal_form():
    f = parse("R(x,y)")
    g, trace, reports = y_normal_form(f)
    assert g == f and trace == [] and reports == []


@pytest.mark.parametrize("n", [2, 3, 5])
def test_adler_normal_form_splits_into_blocks(n):
    g = normalize(adler(n)).formula
    parts = conjuncts(g)
    while len(parts) == 1 and not isinstance(parts[0], Atom):
        parts = conjuncts(parts[0].body)
    assert len(parts) == n or width(g) == 2
    assert width(g) <= n + 1


def test_budget():
    with pytest.raises(StepBudgetExceeded):
        normalize(adler(3), budget=1)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_potential_decreases_and_trace_replays(seed):
    f = random_formula(rng_for(seed), 4)
    nf = normalize(f)
    values = [r.y_potential for r in nf.reports]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert len(nf.reports) <= f.size ** 3
    assert replay(f, nf.trace) == nf.formula
    assert normalize(nf.formula).reports == []
