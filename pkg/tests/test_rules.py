import pytest
from hypothesis import given, settings, strategies as st

from gen import random_formula, rng_for
from pfowidth.errors import ReplayError, RuleNotApplicable
from pfowidth.formula import format_formula, parse, width
from pfowidth.normalform import normalize
from pfowidth.oracles import semantically_equiv
from pfowidth.rules import (
    RULES, T_RULES, Step, applicable, apply, enumerate_steps, format_trace, parse_step, parse_trace, replay,
)
from conftest import REORDER, adler

PHI1 = "forall y. forall z. exists v1. exists v3. (T(y,z) | exists v2. (E(v1,v2) & (E(v2,v3) & E(v3,z))))"
PHI1_ASSOC = "forall y. forall z. exists v1. exists v3. (T(y,z) | exists v2. ((E(v1,v2) & E(v2,v3)) & E(v3,z)))"
PHI3 = "forall y. forall z. (T(y,z) | exists v1. exists v3. ((exists v2. (E(v1,v2) & E(v2,v3))) & E(v3,z)))"


def test_reorder_example_chain():
    f = parse(REORDER)
    f = apply("O", f, (0,))          # exists x. exists t. exists y
    f = apply("O", f, ())            # exists t. exists x. exists y
    assert format_formula(f) == "exists t. exists x. exists y. (R(x,t) & S(t,y))"
    f = apply("C", f, (0, 0, 0))
    f = apply("Pdown", f, (0, 0))    # exists y pushed onto S
    f = apply("C", f, (0, 0))
    f = apply("Pdown", f, (0,))      # exists x pushed onto R
    assert f == parse("exists t. ((exists x. R(x,t)) & (exists y. S(t,y)))")
    assert width(f) == 2


def test_applicability_shapes():
    assert applicable("M", parse("exists x. R(y)"))
    assert not applicable("Sdown", parse("exists x. (R(x) & S(x))"))
    assert applicable("Sdown", parse("forall x. (R(x) & S(x))"))
    assert not applicable("Pdown", parse("exists x. (R(x) & S(x))"))
    assert applicable("Pdown", parse("exists x. (R(x) & S(y))"))


def test_worked_example_first_steps(phi0):
    f = apply("Sdown", phi0, (0, 0, 0, 0))
    f = apply("M", f, (0, 0, 0, 0, 0))
    assert f == parse(PHI1)
    assert apply("A_assoc_left", f, (0, 0, 0, 0, 1, 0)) == parse(PHI1_ASSOC)


def test_reorder_on_prefix():
    f = apply("O", parse(PHI3), ())
    assert format_formula(f).startswith("forall z. forall y.")


def test_rule_errors():
    with pytest.raises(RuleNotApplicable) as info:
        apply("M", parse("exists x. R(x)"))
    assert info.value.rule == "M"
    with pytest.raises(RuleNotApplicable):
        apply("C", parse("R(x)"), (0,))
    with pytest.raises(RuleNotApplicable):
        apply("Pup", parse("R(x) & exists y. S(y)"), (), "up")


def test_N_requires_fresh_target():
    f = parse("exists x. R(x,y)")
    assert apply("N", f, (), "z") == parse("exists z. R(z,y)")
    with pytest.raises(RuleNotApplicable):
        apply("N", f, (), "y")


def test_splitup_and_pullup_invert_downs():
    f = parse("forall x. (R(x) & S(x))")
    assert apply("Sup", apply("Sdown", f)) == f
    g = parse("exists x. (R(x) & S(y))")
    assert apply("Pup", apply("Pdown", g), (), "left") == g


def test_replay(phi0):
    assert replay(phi0, []) == phi0
    nf = normalize(phi0)
    assert replay(phi0, nf.trace) == nf.formula
    with pytest.raises(ReplayError) as info:
        replay(parse("R(x)"), [Step("C")])
    assert info.value.index == 0


def test_adler_trace_reaches_width_two():
    f = adler(2)
    nf = normalize(f)
    assert width(replay(f, nf.trace)) == 2


def test_trace_text_roundtrip():
    trace = [Step("C", (0, 1)), Step("Pup", (), "right"), Step("N", (2,), "_q3"), Step("M")]
    text = format_trace(trace)
    assert text.splitlines()[0] == "C path=[0,1] args=-"
    assert parse_trace(text) == trace
    with pytest.raises(ValueError):
        parse_step("Q path=[] args=-")


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_every_rule_preserves_semantics(seed):
    f = random_formula(rng_for(seed), 3, variables=("x", "y"), relations=(("R", 2), ("S", 1)))
    steps = enumerate_steps(f, RULES, rename_to="w")
    if not steps:
        return
    step = steps[seed % len(steps)]
    g = apply(step.rule, f, step.path, step.arg)
    assert semantically_equiv(f, g, 2)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_T_rules_preserve_free_variables(seed):
    f = random_formula(rng_for(seed), 4)
    for step in enumerate_steps(f, T_RULES, rename_to="w")[:10]:
        assert apply(step.rule, f, step.path, step.arg).free == f.free
