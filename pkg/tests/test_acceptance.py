"""Acceptance criteria 1-10.

Each criterion prints one PASS/FAIL line. Run directly for a plain report:

    python3 tests/test_acceptance.py
"""

import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import REORDER, adler, load_sample  # noqa: E402
from gen import random_exists_and_sentence, random_formula, random_structure, rng_for  # noqa: E402
from pfowidth.cli import bench  # noqa: E402
from pfowidth.evaluation import evaluate  # noqa: E402
from pfowidth.formula import QUANTIFIERS, parse, relations, standardize, subformulas, width  # noqa: E402
from pfowidth.minimize import minimize, rewrite_equiv  # noqa: E402
from pfowidth.normalform import normalize, y_normal_form, y_potential, yprime_potential  # noqa: E402
from pfowidth.oracles import brute_treewidth, naive_evaluate, rewrite_closure, semantically_equiv  # noqa: E402
from pfowidth.regions import organize, region_hypergraph  # noqa: E402
from pfowidth.rules import T_RULES, apply, apply_step, enumerate_steps  # noqa: E402
from pfowidth.treewidth import exact_treewidth  # noqa: E402

ACO = ("A_assoc_left", "A_assoc_right", "C", "O")


def _quantifier_count(f):
    return sum(isinstance(n, QUANTIFIERS) for _, n in subformulas(f))


# --- criteria ---------------------------------------------------------------------------


def criterion_1():
    f = parse(REORDER)
    start = time.perf_counter()
    g, _ = minimize(f)
    secs = time.perf_counter() - start
    ok = width(f) == 3 and width(g) == 2 and secs < 0.1
    return ok, f"input width {width(f)}, output width {width(g)}, {secs:.3f}s (limit 0.1s)"


def criterion_2():
    start = time.perf_counter()
    widths = []
    for n in range(1, 9):
        f = adler(n)
        g, _ = minimize(f)
        widths.append((width(f), width(g)))
    secs = time.perf_counter() - start
    ok = all(w_in == n + 1 and w_out == 2 for n, (w_in, w_out) in enumerate(widths, 1)) and secs < 1
    return ok, f"(in, out) widths {widths}, {secs:.3f}s total (limit 1s)"


def criterion_3():
    phi0, phi5 = load_sample("phi0.fo"), load_sample("phi5.fo")
    start = time.perf_counter()
    g, _ = minimize(phi0)
    same = rewrite_equiv(phi0, phi5)
    secs = time.perf_counter() - start
    ok = width(g) == 2 and same and secs < 0.5
    return ok, f"minimized width {width(g)}, rewrite_equiv(phi0, phi5) = {same}, {secs:.3f}s (limit 0.5s)"


def criterion_4():
    rng = rng_for(4)
    start = time.perf_counter()
    bad = []
    for i in range(50):
        f = random_exists_and_sentence(rng, max_vars=8, max_atoms=6)
        h = region_hypergraph(organize(standardize(f)).skeleton)
        tw = exact_treewidth(h).width
        g, _ = minimize(f)
        if width(g) != tw + 1 or tw != brute_treewidth(h):
            bad.append(i)
    secs = time.perf_counter() - start
    return not bad and secs < 30, f"{50 - len(bad)}/50 match tw+1 and brute force, {secs:.2f}s (limit 30s)"


def criterion_5():
    rng = rng_for(5)
    start = time.perf_counter()
    bad = 0
    for _ in range(200):
        f = random_formula(rng, rng.randint(1, 4), variables=("x", "y", "z", "w"),
                           relations=(("R", 2), ("S", 1)))
        g, _ = minimize(f)
        bad += not semantically_equiv(f, g, 2)
    secs = time.perf_counter() - start
    return bad == 0 and secs < 300, f"{200 - bad}/200 equivalent up to domain 2, {secs:.1f}s (limit 300s)"


def criterion_6():
    rng = rng_for(6)
    start = time.perf_counter()
    checked = skipped = bad = 0
    while checked < 100:
        f = random_formula(rng, rng.randint(1, 3), variables=("x", "y", "z"), quant_prob=0.5)
        if _quantifier_count(f) > 3:
            continue
        res = rewrite_closure(f)
        if res.status != "complete":
            skipped += 1
            continue
        checked += 1
        g, _ = minimize(f)
        bad += res.min_width != width(g)
    secs = time.perf_counter() - start
    detail = (f"{checked - bad}/{checked} closure minimum = minimize width ({skipped} skipped as incomplete; "
              f"assumes vacuous-quantifier insertion never lowers width), {secs:.1f}s (limit 600s)")
    return bad == 0 and secs < 600, detail


def _termination_data(n_norm=1000, n_t=1000):
    """Counts for the termination certificates, shared by both halves of criterion 7."""
    rng = rng_for(7)
    y_bad = bound_bad = 0
    sd_checked = sd_bad = 0
    sd_example = None
    for _ in range(n_norm):
        f = random_formula(rng, rng.randint(1, 6), variables=("x", "y", "z", "w"), quant_prob=0.6)
        nf = normalize(f, check=False)
        g = standardize(f)
        prev_y, prev_yp = y_potential(g), yprime_potential(g)
        bound_bad += len(nf.reports) > f.size ** 3
        for r in nf.reports:
            y_bad += r.y_potential >= prev_y
            if r.rule in ("Sdown", "M"):
                sd_checked += 1
                if r.yprime_potential >= prev_yp:
                    sd_bad += 1
                    sd_example = sd_example or (f, r.step_index, prev_yp, r.yprime_potential)
            prev_y, prev_yp = r.y_potential, r.yprime_potential
    t_checked = t_bad = 0
    while t_checked < n_t:
        f = standardize(random_formula(rng, rng.randint(2, 5), variables=("x", "y", "z"), quant_prob=0.6))
        steps = [s for s in enumerate_steps(f, T_RULES, rename_to="_fresh") if s.rule != "N" or rng.random() < 0.2]
        if not steps:
            continue
        step = rng.choice(steps)
        t_checked += 1
        t_bad += yprime_potential(apply_step(f, step)) != yprime_potential(f)
    return {"y_bad": y_bad, "bound_bad": bound_bad, "t_checked": t_checked, "t_bad": t_bad,
            "sd_checked": sd_checked, "sd_bad": sd_bad, "sd_example": sd_example}


_CACHE = {}


def termination_data():
    if "t" not in _CACHE:
        _CACHE["t"] = _termination_data()
    return _CACHE["t"]


def criterion_7():
    d = termination_data()
    ok = not (d["y_bad"] or d["bound_bad"] or d["t_bad"] or d["sd_bad"])
    detail = (f"y-potential violations {d['y_bad']}, cubic-bound violations {d['bound_bad']}, "
              f"y'-potential T-invariance violations {d['t_bad']}/{d['t_checked']}, "
              f"y'-potential non-decreases under Sdown/M {d['sd_bad']}/{d['sd_checked']}")
    return ok, detail


def criterion_8():
    rng = rng_for(8)
    bad = 0
    for _ in range(100):
        f = random_formula(rng, rng.randint(2, 5), variables=("x", "y", "z"), quant_prob=0.5)
        g = f
        for _ in range(rng.randint(1, 12)):
            steps = enumerate_steps(g, ACO)
            if not steps:
                break
            g = apply_step(g, rng.choice(steps))
        bad += not rewrite_equiv(y_normal_form(f)[0], y_normal_form(g)[0])
    return bad == 0, f"{100 - bad}/100 shuffled inputs reach T-equivalent normal forms"


def criterion_9():
    rng = rng_for(9)
    bad = 0
    for _ in range(500):
        f = random_formula(rng, rng.randint(1, 5), variables=("x", "y", "z"),
                           relations=(("R", 2), ("S", 1), ("P", 3)))
        s = random_structure(rng, relations(f), rng.randint(1, 3), density=rng.random())
        bad += evaluate(f, s) != naive_evaluate(f, s)
    return bad == 0, f"{500 - bad}/500 pairs agree with the naive evaluator"


def criterion_10():
    f = adler(4)
    s = random_structure(rng_for(10), relations(f), 10, density=0.9)
    start = time.perf_counter()
    report = bench(f, s, repeat=3)
    secs = time.perf_counter() - start
    ok = (report["width_before"], report["width_after"]) == (5, 2) and report["speedup"] >= 10 and secs < 60
    ok = ok and report["results_agree"]
    return ok, (f"width {report['width_before']} -> {report['width_after']}, "
                f"{report['time_before_ms']:.1f}ms -> {report['time_after_ms']:.2f}ms, "
                f"speedup {report['speedup']}x (need >= 10), {secs:.1f}s (limit 60s)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def line(n, ok, detail):
    return f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


# --- pytest wrappers ----------------------------------------------------------------------


@pytest.fixture
def emit(capsys):
    def out(n, ok, detail):
        with capsys.disabled():
            print("\n" + line(n, ok, detail))
    return out


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 8, 9, 10])
def test_criterion(n, emit):
    ok, detail = CRITERIA[n - 1]()
    emit(n, ok, detail)
    assert ok, detail


def test_criterion_7(emit):
    ok, detail = criterion_7()
    emit(7, ok, detail)
    d = termination_data()
    assert d["y_bad"] == 0 and d["bound_bad"] == 0 and d["t_bad"] == 0


@pytest.mark.xfail(strict=True, reason="the y'-potential can increase under splitdown; see the decisions ledger")
def test_criterion_7_yprime_decreases_under_splitdown():
    d = termination_data()
    assert d["sd_bad"] == 0, f"counterexample (formula, step, before, after): {d['sd_example']}"


def test_yprime_counterexample_is_real():
    # A splitdown under which the y'-potential rises from 12 to 14: the right copy binds nothing,
    # so it stops blocking the universal quantifier below the left copy.
    f = parse("exists z. ((forall x. ((exists y. (A(y)|B(y))) & C(x,z))) & (D(z)|G(z)))")
    g = apply("Sdown", f, (0, 0))
    assert (yprime_potential(f), yprime_potential(g)) == (12, 14)
    assert semantically_equiv(f, g, 2)


if __name__ == "__main__":
    failed = 0
    for i, crit in enumerate(CRITERIA, 1):
        ok, detail = crit()
        failed += not ok
        print(line(i, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
