import math

import numpy as np
import pytest

from shgcat.hilbert import build_initial_state, coherent_amplitudes
from shgcat.observables import (
    DensityMatrix,
    cat_fidelity,
    cat_overlap,
    cat_vector,
    min_quadrature_variance,
    purity,
    quadrature_distribution,
    quadrature_moments,
    quadrature_variance,
    reduce_pump,
)
from shgcat.propagator import evolve, evolve_series

from .conftest import random_state


def random_rho(rng, dim, rank=3):
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    r = g @ g.conj().T
    return DensityMatrix(r / np.trace(r).real)


def dense_partial_trace(state):
    """Reduce via the full two-mode projector and a reshaped trace."""
    psi = state.amplitude_matrix()
    d1, d2 = psi.shape
    full = np.outer(psi.ravel(), psi.ravel().conj()).reshape(d1, d2, d1, d2)
    return np.trace(full, axis1=1, axis2=3)


@pytest.mark.parametrize("seed", range(6))
def test_reduce_matches_dense_trace(seed):
    rng = np.random.default_rng(seed)
    s = evolve(random_state(rng, max_N=10), float(rng.uniform(0, 1)))
    rho = reduce_pump(s).elements
    ref = dense_partial_trace(s)
    d = ref.shape[0]
    np.testing.assert_allclose(rho[:d, :d], ref, atol=1e-12)
    assert np.all(rho[d:] == 0)
    assert rho.shape[0] == d + 5


def test_reduced_is_valid_state():
    rho = reduce_pump(evolve(build_initial_state(math.sqrt(30)), 0.4))
    rho.check()
    assert rho.trace == pytest.approx(1.0, abs=1e-10)


def test_coherent_product_is_pure():
    s = build_initial_state(2.5)
    rho = reduce_pump(s)
    assert purity(rho) == pytest.approx(1.0, abs=1e-9)
    ket = coherent_amplitudes(2.5, rho.dim)
    assert abs(np.vdot(ket, rho.elements @ ket).real - 1.0) < 1e-9


def test_purity_bounds_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        rho = random_rho(rng, int(rng.integers(2, 12)), rank=int(rng.integers(1, 6)))
        p = purity(rho)
        assert 1.0 / rho.dim - 1e-12 <= p <= 1.0 + 1e-9


def test_purity_matches_trace_of_square():
    rho = random_rho(np.random.default_rng(1), 8)
    assert purity(rho) == pytest.approx(np.trace(rho.elements @ rho.elements).real, abs=1e-12)


def test_purity_decreases_from_one():
    res = evolve_series(build_initial_state(math.sqrt(20)), np.linspace(0, 0.3, 4), purity=True)
    assert res.purity_series[0] == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diff(res.purity_series) < 0)


def test_check_rejects_bad_matrices():
    with pytest.raises(ValueError):
        DensityMatrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]])).check()
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.6])).check()
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5])).check()


# --- quadratures -----------------------------------------------------------


@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 2])
def test_vacuum_and_coherent_variance(theta):
    vac = DensityMatrix(np.diag([1.0, 0, 0]))
    assert quadrature_variance(vac, theta) == pytest.approx(0.25, abs=1e-12)
    coh = DensityMatrix.from_ket(coherent_amplitudes(1.5 + 0.5j, 60))
    mean, var = quadrature_moments(coh, theta)
    assert var == pytest.approx(0.25, abs=1e-10)
    assert mean == pytest.approx(((1.5 + 0.5j) * np.exp(-1j * theta)).real, abs=1e-10)


def test_fock_variance():
    # <n|X^2|n> = (2n + 1)/4
    rho = DensityMatrix(np.diag([0, 0, 0, 1.0, 0]))
    assert quadrature_variance(rho, 0.7) == pytest.approx(7 / 4, abs=1e-12)


def test_min_variance_matches_scan():
    rng = np.random.default_rng(4)
    for _ in range(10):
        rho = random_rho(rng, 7)
        thetas = np.linspace(0, math.pi, 2001)
        scan = min(quadrature_variance(rho, t) for t in thetas)
        var, theta = min_quadrature_variance(rho)
        assert var == pytest.approx(scan, abs=1e-6)
        assert quadrature_variance(rho, theta) == pytest.approx(var, abs=1e-12)


def test_quadrature_distribution_moments():
    rho = random_rho(np.random.default_rng(8), 6)
    x = np.linspace(-8, 8, 4001)
    for theta in (0.0, 1.1):
        p = quadrature_distribution(rho, theta, x)
        assert np.trapezoid(p, x) == pytest.approx(1.0, abs=1e-9)
        mean, var = quadrature_moments(rho, theta)
        assert np.trapezoid(x * p, x) == pytest.approx(mean, abs=1e-9)
        assert np.trapezoid((x - mean) ** 2 * p, x) == pytest.approx(var, abs=1e-9)


def test_squeezing_near_first_minimum_n50():
    s = build_initial_state(math.sqrt(50))
    grid = np.arange(0, 0.4, 2e-3)
    res = evolve_series(s, grid)
    t_min = grid[np.argmin(res.n1_series)]
    var, _ = min_quadrature_variance(reduce_pump(evolve(s, t_min)))
    assert var < 0.25


# --- cats ------------------------------------------------------------------


def test_cat_vector_normalised():
    for beta, phi, c in [(2.0, 0.0, 0j), (1j, math.pi, 0j), (0.3, 1.0, 1 + 1j)]:
        v = cat_vector(beta, phi, 80, c)
        assert np.vdot(v, v).real == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("family", ["centered", "displaced"])
def test_even_cat_self_fidelity(family):
    rho = DensityMatrix.from_ket(cat_vector(2.0, 0.0, 40))
    fit = cat_fidelity(rho, family=family)
    assert fit.fidelity == pytest.approx(1.0, abs=1e-6)
    assert abs(abs(fit.beta) - 2.0) < 1e-3
    assert abs(fit.center) < 1e-3
    assert fit.fidelity == pytest.approx(cat_overlap(rho, fit.beta, fit.rel_phase, fit.center), abs=1e-9)


def test_coherent_state_half_fidelity():
    rho = DensityMatrix.from_ket(coherent_amplitudes(2.0, 40))
    fit = cat_fidelity(rho, family="centered")
    assert fit.fidelity >= 0.5
    assert fit.fidelity == pytest.approx(cat_overlap(rho, fit.beta, fit.rel_phase), abs=1e-9)


def test_fidelity_reported_value_is_evaluated(rho_100):
    fit = cat_fidelity(rho_100)
    assert 0.0 <= fit.fidelity <= 1.0
    assert 0.0 <= fit.rel_phase < 2 * math.pi
    assert fit.fidelity == pytest.approx(cat_overlap(rho_100, fit.beta, fit.rel_phase, fit.center), abs=1e-9)


def test_displaced_family_dominates_centered(rho_50):
    c = cat_fidelity(rho_50, family="centered")
    d = cat_fidelity(rho_50, family="displaced")
    assert d.fidelity >= c.fidelity - 1e-9


def test_fidelity_monotone_under_refinement():
    rho = random_rho(np.random.default_rng(12), 15, rank=2)
    coarse = cat_fidelity(rho, family="centered", r_step=0.1)
    fine = cat_fidelity(rho, family="centered", r_step=0.05)
    assert fine.fidelity >= coarse.fidelity - 1e-9


def test_unknown_family():
    with pytest.raises(ValueError):
        cat_fidelity(DensityMatrix(np.eye(2) / 2), family="odd")


def test_maximally_mixed_purity():
    for d in (1, 3, 10):
        assert purity(DensityMatrix(np.eye(d) / d)) == pytest.approx(1 / d, abs=1e-12)


def test_reduced_mean_matches_state():
    from shgcat.hilbert import mean_photon

    s = evolve(build_initial_state(math.sqrt(40)), 0.37)
    assert reduce_pump(s).mean_photon == pytest.approx(mean_photon(s, 1), abs=1e-9)
