import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relaytree.core import ErrorState, FusionRule, Priors, apply_strategy, reduction
from relaytree.strategies import enumerate_all, greedy_strategy
from relaytree.strings import (
    GREEDY_FACTOR,
    PAIRS,
    SYNTHETIC,
    PairedRule,
    all_greedy_strings,
    all_strings,
    check_diminishing_returns,
    check_greedy_bound,
    check_lemma1,
    check_monotone,
    concat,
    flatten,
    format_paired,
    greedy_string,
    is_prefix,
    optimal_strings,
    parse_paired,
    reduction_function,
    restriction_gap,
    u_reduction,
)

from conftest import exact_evolve, property_grid, triangle_sample

AO, OA = PairedRule.AO, PairedRule.OA
A, O = FusionRule.A, FusionRule.O
S0 = ErrorState(0.2, 0.3)


def exact_u(alpha, beta, pairs):
    a, b = exact_evolve(alpha, beta, "".join(pairs))
    return float((alpha + beta) - (a + b))


# -- string algebra -------------------------------------------------------------

small = st.lists(st.sampled_from("xyz"), max_size=5).map(tuple)


@given(small, small)
def test_concat_lengths_add_and_prefix(m, n):
    assert len(concat(m, n)) == len(m) + len(n)
    assert is_prefix(m, concat(m, n))


def test_prefix_is_partial_order():
    strs = list(all_strings("xy", 3))
    for m in strs:
        assert is_prefix(m, m)
    for m, n in itertools.product(strs, strs):
        if is_prefix(m, n) and is_prefix(n, m):
            assert m == n
    for m, n, k in itertools.product(strs, strs, strs):
        if is_prefix(m, n) and is_prefix(n, k):
            assert is_prefix(m, k)


def test_all_strings_counts():
    assert sum(1 for _ in all_strings("xy", 4)) == 1 + 2 + 4 + 8 + 16


def test_paired_parse_and_flatten():
    pi = parse_paired("AO,OA")
    assert pi == (AO, OA)
    assert format_paired(pi) == "AO,OA"
    assert flatten(pi) == (A, O, O, A)
    assert parse_paired("") == ()
    with pytest.raises(ValueError):
        parse_paired("AA")


@given(st.lists(st.sampled_from(PAIRS), max_size=10))
def test_flattened_pairs_never_repeat_a_rule_three_times(pi):
    flat = flatten(pi)
    assert len(flat) == 2 * len(pi)
    assert all(not (flat[i] == flat[i + 1] == flat[i + 2]) for i in range(len(flat) - 2))


# -- u ------------------------------------------------------------------------

def test_u_examples():
    assert u_reduction(S0, ()) == 0.0
    assert u_reduction(S0, (AO,)) == pytest.approx(0.1985, abs=1e-12)
    assert u_reduction(S0, (OA,)) == pytest.approx(0.1615, abs=1e-12)


def test_u_rejects_out_of_regime():
    with pytest.raises(ValueError):
        u_reduction(ErrorState(0.5, 0.5), (AO,))


@pytest.mark.parametrize("pairs", [("AO", "OA", "AO"), ("OA", "OA"), ("AO",) * 4])
def test_u_matches_exact_recursion(pairs):
    pi = tuple(PairedRule[p] for p in pairs)
    assert u_reduction(S0, pi) == pytest.approx(exact_u(0.2, 0.3, pairs), abs=1e-14)


def test_flattening_consistency(sample200):
    for s in sample200[:40]:
        u = reduction_function(s)
        for pi in itertools.product(PAIRS, repeat=3):
            flat = flatten(pi)
            assert u(pi) == pytest.approx(reduction(s, apply_strategy(s, flat)), abs=1e-12)
            assert u_reduction(s, pi) == pytest.approx(u(pi), abs=1e-12)
        by_strategy = {v.strategy: v.value for v in enumerate_all(s, 4)}
        for pi in itertools.product(PAIRS, repeat=2):
            assert u(pi) == pytest.approx(by_strategy[flatten(pi)], abs=1e-12)


def test_u_with_unequal_priors():
    pri = Priors(0.25, 0.75)
    end = apply_strategy(S0, (A, O))
    expected = 2 * (0.25 * 0.2 + 0.75 * 0.3 - 0.25 * end.alpha - 0.75 * end.beta)
    assert u_reduction(S0, (AO,), pri) == pytest.approx(expected, abs=1e-12)


# -- greedy strings -----------------------------------------------------------

def test_greedy_string_examples():
    assert greedy_string(reduction_function(S0), PAIRS, 1) == (AO,)
    assert greedy_string(len, "xy", 0) == ()
    assert greedy_string(reduction_function(ErrorState(0.3, 0.2)), PAIRS, 1) == (OA,)


def test_greedy_string_tie_order():
    f = SYNTHETIC["length"]
    assert greedy_string(f, "xy", 3) == ("x", "x", "x")
    assert greedy_string(f, "xy", 3, order="yx") == ("y", "y", "y")
    assert all_greedy_strings(f, "xy", 2) == set(itertools.product("xy", repeat=2))


def test_greedy_pair_equals_ulrt_when_ulrt_alternates(sample200):
    # Z-greedy and Y-greedy coincide whenever the ULRT string splits into Z pairs
    checked = 0
    for s in sample200:
        u = reduction_function(s)
        for K in range(1, 5):
            ulrt = greedy_strategy(s, 2 * K).strategy
            if any(ulrt[2 * i] == ulrt[2 * i + 1] for i in range(K)):
                continue
            checked += 1
            assert flatten(greedy_string(u, PAIRS, K)) == ulrt
    assert checked > 100


def test_greedy_pair_differs_from_ulrt_when_ulrt_repeats():
    # ULRT from here starts A, A; the paired alphabet cannot express that
    s = ErrorState(0.02, 0.5)
    assert greedy_strategy(s, 2).strategy == (A, A)
    assert flatten(greedy_string(reduction_function(s), PAIRS, 1)) != (A, A)


# -- checkers on synthetic functions --------------------------------------------

def test_check_monotone_synthetic():
    assert check_monotone(SYNTHETIC["length"], "xyz", 3).passed
    r = check_monotone(SYNTHETIC["neg_length"], "xy", 2)
    assert not r.passed
    assert all(v["slack"] == pytest.approx(-1.0) for v in r.violations)
    assert r.instances_checked == (1 + 2) * 2


def test_check_dimret_synthetic():
    r = check_diminishing_returns(SYNTHETIC["step"], "x", 3)
    assert not r.passed
    assert r.violations[0]["slack"] == pytest.approx(-1.0)
    assert check_diminishing_returns(SYNTHETIC["length"], "xyz", 3).passed
    assert check_diminishing_returns(SYNTHETIC["saturating"], "xy", 4).passed
    assert not check_diminishing_returns(SYNTHETIC["square"], "xy", 3).passed


def test_violations_are_replayable():
    f = SYNTHETIC["square"]
    r = check_diminishing_returns(f, "xy", 3)
    for v in r.violations:
        m, n, a = tuple(v["M"]), tuple(v["N"]), (v["a"],)
        assert (f(m + a) - f(m)) - (f(n + a) - f(n)) == pytest.approx(v["slack"])


def test_report_is_order_independent():
    f = SYNTHETIC["square"]
    assert check_diminishing_returns(f, "xy", 3).violations == check_diminishing_returns(f, "yx", 3).violations


@pytest.mark.parametrize(
    "name, one_step, full",
    [("length", True, True), ("saturating", True, True), ("neg_length", True, True),
     ("step", False, False), ("square", False, False)],
)
def test_lemma1_synthetic(name, one_step, full):
    r = check_lemma1(SYNTHETIC[name], "xy", 3)
    assert r.details["one_step_holds"] is one_step
    assert r.details["full_holds"] is full
    assert r.passed


def test_lemma1_reports_one_sided_discrepancy():
    # marginal gains 1, 1, 3, 3, 3: the first step alone looks fine
    def f(s):
        return [0.0, 1.0, 2.0, 5.0, 8.0, 11.0][len(s)]

    r = check_lemma1(f, "x", 4)
    assert r.details["one_step_holds"] and not r.details["full_holds"]
    assert not r.passed
    assert r.violations and all(v["side"] == "full" for v in r.violations)


def test_greedy_bound_synthetic():
    r = check_greedy_bound(SYNTHETIC["saturating"], "xy", 4)
    assert r.passed and r.details["ratio"] == 1.0
    with pytest.raises(ValueError):
        check_greedy_bound(lambda s: 1.0 + len(s), "xy", 2)


def test_greedy_bound_catches_bad_greedy():
    # first action looks better, but only the other one unlocks a large later gain
    def f(s):
        if not s:
            return 0.0
        base = 1.0 if s[0] == "x" else 0.9
        return base + (10.0 if s[0] == "y" and len(s) >= 2 else 0.0)

    r = check_greedy_bound(f, "xy", 2)
    assert not r.passed
    assert any(v["bound"] == "lower" for v in r.violations)


# -- checkers on u ------------------------------------------------------------

def test_u_monotone_at_reference_state():
    assert check_monotone(reduction_function(S0), PAIRS, 4).passed


def test_u_diminishing_returns_fails_at_reference_state():
    # exact arithmetic: u(OA) - u() = 0.1615 < u(AO, OA) - u(AO) = 0.16943...
    first = exact_u(0.2, 0.3, ("OA",))
    later = exact_u(0.2, 0.3, ("AO", "OA")) - exact_u(0.2, 0.3, ("AO",))
    assert later - first == pytest.approx(0.0079364833755935, abs=1e-12)
    r = check_diminishing_returns(reduction_function(S0), PAIRS, 4)
    assert not r.passed
    assert r.violations[0] == {"M": [], "N": ["AO"], "a": "OA", "slack": pytest.approx(first - later, abs=1e-12)}


def test_u_lemma1_agrees_at_reference_state():
    r = check_lemma1(reduction_function(S0), PAIRS, 4)
    assert r.passed
    assert not r.details["one_step_holds"] and not r.details["full_holds"]


def test_u_submodular_in_small_error_region():
    # measured: every grid state with alpha + beta <= 0.24 passes at depth 5
    region = [s for s in property_grid() if s.alpha + s.beta <= 0.24 + 1e-9]
    assert len(region) == 66
    for s in region:
        u = reduction_function(s)
        assert check_monotone(u, PAIRS, 5).passed, s
        assert check_diminishing_returns(u, PAIRS, 5).passed, s


def test_u_not_monotone_near_the_line():
    # every paired strategy raises the total error from here
    s = ErrorState(0.9, 0.05)
    u = reduction_function(s)
    assert u((AO,)) < 0 and u((OA,)) < 0
    assert not check_monotone(u, PAIRS, 1).passed


def test_greedy_bound_examples():
    r = check_greedy_bound(reduction_function(S0), PAIRS, 3)
    assert r.passed
    assert r.details["f_optimal"] == pytest.approx(exact_u(0.2, 0.3, ("AO", "AO", "OA")), abs=1e-12)
    assert GREEDY_FACTOR * r.details["f_optimal"] < r.details["f_greedy"] <= r.details["f_optimal"]
    r0 = check_greedy_bound(reduction_function(S0), PAIRS, 0)
    assert r0.passed and r0.details["f_greedy"] == 0.0 and r0.details["f_optimal"] == 0.0
    r4 = check_greedy_bound(reduction_function(ErrorState(0.1, 0.1)), PAIRS, 4)
    assert r4.passed
    assert r4.details["f_optimal"] == pytest.approx(exact_u(0.1, 0.1, ("AO", "OA", "OA", "OA")), abs=1e-12)


def test_greedy_bound_exhaustive_variant():
    r = check_greedy_bound(reduction_function(ErrorState(0.1, 0.15)), PAIRS, 4, exhaustive=True)
    assert r.passed
    assert r.instances_checked >= 2 + 4
    with pytest.raises(ValueError):
        check_greedy_bound(reduction_function(S0), PAIRS, 9, exhaustive=True)


def test_optimal_strings_matches_enumeration():
    u = reduction_function(S0)
    best, optima = optimal_strings(u, PAIRS, 3)
    assert best == max(u(p) for p in itertools.product(PAIRS, repeat=3))
    assert optima[0] == (AO, AO, OA)


def test_bound_factor():
    assert GREEDY_FACTOR == pytest.approx(1 - math.exp(-1))


# -- cost of restricting to pairs ------------------------------------------------

def test_restriction_gap_zero_when_best_flat_strategy_is_paired():
    g = restriction_gap(ErrorState(0.2, 0.3), 2)
    assert g.paired == (AO, AO)
    assert g.gap == pytest.approx(0.0, abs=1e-12)


def test_restriction_gap_positive_when_flat_optimum_repeats_a_rule():
    g = restriction_gap(ErrorState(0.02, 0.5), 1)
    assert g.flat == (FusionRule.A, FusionRule.A)
    assert g.gap == pytest.approx(0.37986816 - 0.08093184, abs=1e-8)


def test_restriction_gap_never_negative():
    for s in triangle_sample(50, seed=3):
        for K in (1, 2, 3):
            g = restriction_gap(s, K)
            assert g.gap >= -1e-12
            assert g.paired_value == pytest.approx(u_reduction(s, g.paired), abs=1e-15)
