import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from khmix.conslaw import power_flux, quadratic_flux
from khmix.oracle import (MonotoneProfile, evaluate_sides, maximize_ratio, moment, random_monotone_profile,
                          run_campaign, sampled_optimal_profile)

Q = quadratic_flux(1.0)


def test_plateau_hand_example():
    # s = 0 on [-a, a]: lhs = a/4, moment = a^2/2, C# = 1/sqrt(6), ratio = sqrt(12)/4
    a = 0.7
    prof = MonotoneProfile([-a, a], [0.0])
    lhs, rhs, ratio = evaluate_sides(prof, Q)
    assert lhs == pytest.approx(a / 4, rel=1e-14)
    assert moment(prof) == pytest.approx(a * a / 2, rel=1e-14)
    assert ratio == pytest.approx(np.sqrt(12) / 4, rel=1e-12)


def test_sharp_step_is_degenerate():
    prof = MonotoneProfile([-1.0, 0.0, 1.0], [0.5, -0.5])
    assert evaluate_sides(prof, Q) == (0.0, 0.0, 0.0)


def test_one_sided_profile_moment():
    # s = -U/2 already on [0.2, 1]; only breakpoints above zero, so z = 0 is padded in
    prof = MonotoneProfile([0.2, 1.0], [0.1])
    assert moment(prof) == pytest.approx(0.5 * (0.2 ** 2) + 0.6 * 0.5 * (1 - 0.04), rel=1e-14)


def test_profile_rejects_bad_input():
    with pytest.raises(ValueError):
        MonotoneProfile([0.0, 1.0], [0.1, 0.0])
    with pytest.raises(ValueError):
        MonotoneProfile([0.0, 1.0, 0.5], [0.1, 0.0])
    with pytest.raises(ValueError):
        MonotoneProfile([0.0, 1.0, 2.0], [0.0, 0.1])
    with pytest.raises(ValueError):
        MonotoneProfile([0.0, 1.0], [0.7])
    with pytest.raises(ValueError):
        evaluate_sides(MonotoneProfile([0.0, 1.0], [0.0], U=2.0), Q)


def test_profile_evaluation():
    prof = MonotoneProfile([-1.0, 0.0, 1.0], [0.3, -0.2])
    np.testing.assert_array_equal(prof([-2.0, -0.5, 0.0, 0.5, 1.0, 3.0]), [0.5, 0.3, -0.2, -0.2, -0.5, -0.5])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 20), st.floats(0.2, 5.0))
def test_ratio_dilation_invariant(seed, count, lam):
    prof = random_monotone_profile(seed, count)
    r1 = evaluate_sides(prof, Q)[2]
    r2 = evaluate_sides(prof.dilated(lam), Q)[2]
    assert r2 == pytest.approx(r1, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 20))
def test_random_profiles_respect_inequality(seed, count):
    assert evaluate_sides(random_monotone_profile(seed, count), Q)[2] <= 1 + 1e-9


def test_splitting_a_step_changes_nothing():
    prof = random_monotone_profile(3, 5)
    z, s = prof.breakpoints, prof.values
    mid = 0.5 * (z[2] + z[3])
    split = MonotoneProfile(np.insert(z, 3, mid), np.insert(s, 2, s[2]))
    np.testing.assert_allclose(evaluate_sides(split, Q), evaluate_sides(prof, Q), rtol=1e-13)


def test_random_profile_deterministic():
    a, b = random_monotone_profile(42, 7), random_monotone_profile(42, 7)
    np.testing.assert_array_equal(a.breakpoints, b.breakpoints)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.count == 7
    with pytest.raises(ValueError):
        random_monotone_profile(0, 0)


def test_sampled_optimum_approaches_one():
    r64 = evaluate_sides(sampled_optimal_profile(Q, 64), Q)[2]
    r8 = evaluate_sides(sampled_optimal_profile(Q, 8), Q)[2]
    assert r8 < r64 < 1
    assert r64 > 0.999


def test_power_flux_warm_start():
    f = power_flux(1.0, 0.75)
    assert 0.95 < evaluate_sides(sampled_optimal_profile(f, 64), f)[2] <= 1 + 1e-9


def test_hill_climb_monotone_in_budget():
    r0, p0 = maximize_ratio(Q, 0)
    assert r0 == pytest.approx(evaluate_sides(sampled_optimal_profile(Q, 64), Q)[2])
    r1, _ = maximize_ratio(Q, 300, seed=1)
    assert r0 <= r1 <= 1 + 1e-9
    assert maximize_ratio(Q, 300, seed=1)[0] == r1
    with pytest.raises(ValueError):
        maximize_ratio(Q, -1)


def test_campaign():
    camp = run_campaign(Q, range(200))
    assert camp.violations() == 0
    assert 0 < camp.max_ratio <= 1
    again = run_campaign(Q, range(200))
    np.testing.assert_array_equal(camp.ratios, again.ratios)
