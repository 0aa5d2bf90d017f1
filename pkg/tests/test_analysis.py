import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shgcat.analysis import (
    NoRevivalError,
    conversion_ratio,
    find_gt_max,
    fit_power_law,
    moving_average,
)
from shgcat.experiments import classical_window


def test_exact_power_law_recovered():
    ns = [1e2, 1e3, 1e4, 1e5]
    fit = fit_power_law([(n, 2.7 * n**-0.43) for n in ns])
    assert fit.coefficient == pytest.approx(2.7, abs=1e-9)
    assert fit.exponent == pytest.approx(0.43, abs=1e-9)
    assert fit.exp_stderr < 1e-9
    np.testing.assert_allclose(fit.predict(ns), [2.7 * n**-0.43 for n in ns], rtol=1e-9)


def test_rescaling_n_moves_only_the_coefficient():
    rng = np.random.default_rng(0)
    pts = [(n, 2.0 * n**-0.5 * math.exp(rng.normal(0, 0.05))) for n in (10, 100, 1000, 1e4)]
    a = fit_power_law(pts)
    b = fit_power_law([(10 * n, g) for n, g in pts])
    assert b.exponent == pytest.approx(a.exponent, abs=1e-12)
    assert b.coefficient == pytest.approx(a.coefficient * 10**a.exponent, rel=1e-10)
    assert a.to_dict()["points"] == [[float(n), float(g)] for n, g in pts]


@pytest.mark.parametrize(
    "pts",
    [[(1, 1), (2, 0.5)], [(1, 1), (2, -1), (3, 0.2)], [(0, 1), (2, 1), (3, 1)], [(5, 1), (5, 2), (5, 3)]],
)
def test_fit_rejects_bad_points(pts):
    with pytest.raises(ValueError):
        fit_power_law(pts)


def test_moving_average():
    y = np.arange(10.0)
    np.testing.assert_allclose(moving_average(y, 3), y)  # linear data is invariant
    np.testing.assert_allclose(moving_average([0, 3, 0, 3, 0], 3), [0, 1, 2, 1, 0])
    for bad in (0, 2, 11):
        with pytest.raises(ValueError):
            moving_average(y, bad)


def test_cos_squared_revival():
    t = np.arange(0, 4, 1e-3)
    rep = find_gt_max(t, np.cos(t) ** 2, window=1)
    assert rep.gt_min == pytest.approx(math.pi / 2, abs=1e-3)
    assert rep.gt_max == pytest.approx(math.pi, abs=1e-6)
    assert rep.ratio == pytest.approx(1.0, abs=1e-6)
    assert conversion_ratio(rep, 1.0) == rep.ratio


def test_window_smooths_noise():
    rng = np.random.default_rng(1)
    t = np.arange(0, 4, 1e-3)
    y = np.cos(t) ** 2 + rng.normal(0, 1e-4, t.size)
    assert find_gt_max(t, y, window=51).gt_max == pytest.approx(math.pi, abs=5e-3)


@pytest.mark.parametrize("y", [np.linspace(1, 0, 50), np.linspace(0, 1, 50), np.ones(50)])
def test_no_revival(y):
    with pytest.raises(NoRevivalError):
        find_gt_max(np.arange(50.0), y, window=1)


def test_input_validation():
    with pytest.raises(ValueError):
        find_gt_max([0, 1, 2], [1, 2])
    with pytest.raises(ValueError):
        find_gt_max([0, 1, 3, 4], [1, 0, 1, 0], window=1)
    with pytest.raises(ValueError):
        conversion_ratio(find_gt_max(np.arange(5.0), [1, 0, 1, 0, 1], window=1), 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 2.5), st.floats(0.01, 0.05))
def test_refined_peak_within_one_step(t_peak, frac):
    step = frac * t_peak
    t = np.arange(0, t_peak * 1.4, step)
    y = np.cos(np.pi * t / t_peak) ** 2  # min at t_peak/2, max at t_peak
    rep = find_gt_max(t, y, window=1)
    i = rep.index_max
    assert abs(rep.gt_max - t[i]) <= step * (1 + 1e-9)
    assert abs(rep.gt_max - t_peak) <= step


def test_classical_window_contains_quantum_revivals():
    # quantum gt_max: 0.4622 at n = 50 and 0.3516 at n = 100
    assert classical_window(50) > 0.4622 and classical_window(100) > 0.3516


def test_fit_residuals_zero_mean():
    rng = np.random.default_rng(2)
    pts = [(n, 2.8 * n**-0.44 * math.exp(rng.normal(0, 0.1))) for n in (1e2, 1e3, 1e4, 1e5, 1e6)]
    fit = fit_power_law(pts)
    res = [math.log(g) - math.log(fit.predict(n)) for n, g in pts]
    assert abs(np.mean(res)) < 1e-10
