import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from shgcat.hilbert import block_hamiltonian, build_initial_state, fock_product_state, manley_rowe, mean_photon
from shgcat.propagator import (
    block_eigensystem,
    evolve,
    evolve_series,
    kerr_cat_overlap,
    kerr_cat_reference,
    kerr_evolve,
)

from .conftest import random_state


def taylor_expm(a, terms=30):
    """Power series with scaling and squaring, independent of any eigensolver."""
    s = max(0, int(np.ceil(np.log2(np.abs(a).sum(axis=0).max() + 1e-300))) + 1)
    a = a / 2**s
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def test_identity_at_zero():
    s = build_initial_state(2.0)
    assert evolve(s, 0.0) is s


@pytest.mark.parametrize("gt", [0.0, 0.1, 0.7, 2.3, -0.4])
def test_rabi_two_level(gt):
    s = evolve(fock_product_state(2, 0), gt)
    c, sn = math.cos(math.sqrt(2) * gt), math.sin(math.sqrt(2) * gt)
    np.testing.assert_allclose(s.blocks[0], [c, 1j * sn], atol=1e-12)
    assert mean_photon(s, 1) == pytest.approx(2 * c * c, abs=1e-10)


@pytest.mark.parametrize("N", [2, 3, 5, 7, 10, 11])
@pytest.mark.parametrize("gt", [0.05, 0.4, 1.3])
def test_block_propagator_matches_taylor(N, gt):
    w, v = block_eigensystem(N)
    u = v @ np.diag(np.exp(1j * gt * w)) @ v.T
    ref = taylor_expm(1j * gt * block_hamiltonian(N).dense())
    np.testing.assert_allclose(u, ref, atol=1e-9)


def dense_evolve(state, gt):
    """Evolve in the plain |n1> (x) |n2> product space with scipy's expm."""
    d1, d2 = state.max_n1 + 1, state.max_n2 + 1
    a1 = np.diag(np.sqrt(np.arange(1, d1)), 1)
    a2 = np.diag(np.sqrt(np.arange(1, d2)), 1)
    A1, A2 = np.kron(a1, np.eye(d2)), np.kron(np.eye(d1), a2)
    h = A1.T @ A1.T @ A2 + A1 @ A1 @ A2.T
    psi = state.amplitude_matrix().ravel()
    return (expm(1j * gt * h) @ psi).reshape(d1, d2)


@pytest.mark.parametrize("seed", range(5))
def test_against_dense_space(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng, max_N=9)
    gt = float(rng.uniform(-1, 1))
    np.testing.assert_allclose(evolve(s, gt).amplitude_matrix(), dense_evolve(s, gt), atol=1e-10)


def test_unitarity_and_conservation_random():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        s = random_state(rng, max_N=16)
        gt = float(rng.uniform(-3, 3))
        e = evolve(s, gt)
        assert e.norm2 == pytest.approx(s.norm2, abs=1e-10)
        assert manley_rowe(e) == pytest.approx(manley_rowe(s), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-2, 2), st.floats(-2, 2))
def test_group_and_time_reversal(seed, t1, t2):
    s = random_state(np.random.default_rng(seed), max_N=20)
    assert evolve(evolve(s, t1), t2).distance(evolve(s, t1 + t2)) < 1e-9
    assert evolve(evolve(s, t1), -t1).distance(s) < 1e-9


def test_single_block_stays_single():
    s = fock_product_state(6, 2)
    e = evolve(s, 0.9)
    assert e.Ns == (10,)


def test_nonfinite_time():
    with pytest.raises(ValueError):
        evolve(fock_product_state(2, 0), float("nan"))


def test_series_matches_pointwise():
    s = build_initial_state(math.sqrt(8))
    grid = np.linspace(0, 1, 11)
    res = evolve_series(s, grid, keep_states=True, purity=True)
    for i, t in enumerate(grid):
        e = evolve(s, t)
        assert res.n1_series[i] == pytest.approx(mean_photon(e, 1), abs=1e-10)
        assert res.n2_series[i] == pytest.approx(mean_photon(e, 2), abs=1e-10)
        assert res.states[i].distance(e) < 1e-12
    np.testing.assert_allclose(res.invariant_series, res.invariant_series[0], rtol=1e-9)
    assert res.purity_series[0] == pytest.approx(1.0, abs=1e-9)
    assert np.all(res.purity_series <= 1 + 1e-9)


def test_series_vacuum_is_zero():
    res = evolve_series(build_initial_state(0), np.linspace(0, 1, 5))
    assert np.all(res.n1_series == 0)


@pytest.mark.parametrize("grid", [[], [0.1, 0.2], [0, 0.2, 0.1]])
def test_series_grid_errors(grid):
    with pytest.raises(ValueError):
        evolve_series(build_initial_state(1.0), grid)


def test_n50_non_monotonic_with_64_percent_revival():
    s = build_initial_state(math.sqrt(50))
    res = evolve_series(s, np.arange(1001) * 1e-3)
    d = np.diff(res.n1_series)
    assert np.any((d[:-1] < 0) & (d[1:] > 0))  # an interior minimum
    assert np.any((d[:-1] > 0) & (d[1:] < 0))  # and a maximum
    assert 0.62 <= mean_photon(evolve(s, 0.463), 1) / 50 <= 0.66


# --- Kerr medium -----------------------------------------------------------


def test_kerr_zero_phase_is_identity():
    k = kerr_evolve(2.0, 0.0)
    from shgcat.hilbert import coherent_amplitudes

    np.testing.assert_allclose(k.coeffs, coherent_amplitudes(2.0, k.coeffs.size), atol=1e-15)


def test_kerr_cat_at_pi_mean_n():
    k = kerr_evolve(2.0, math.pi * 4.0)
    assert kerr_cat_overlap(k) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("phi", [0.0, 0.3, math.pi * 4, 17.0])
def test_kerr_keeps_poisson_statistics(phi):
    from scipy.stats import poisson

    k = kerr_evolve(2.0, phi)
    n = np.arange(k.coeffs.size)
    np.testing.assert_allclose(k.photon_distribution, poisson.pmf(n, 4.0), atol=1e-10)
    assert np.sum(k.photon_distribution) == pytest.approx(1.0, abs=1e-10)


def test_kerr_full_period():
    # phi = 2 pi <n> gives (-1)^n, i.e. |-alpha>; the identity returns at 4 pi <n>
    from shgcat.hilbert import coherent_amplitudes

    alpha = 1.7
    half = kerr_evolve(alpha, 2 * math.pi * alpha**2)
    ref = coherent_amplitudes(-alpha, half.coeffs.size)
    assert 1 - abs(np.vdot(ref, half.coeffs)) ** 2 < 1e-9
    full = kerr_evolve(alpha, 4 * math.pi * alpha**2)
    ref = coherent_amplitudes(alpha, full.coeffs.size)
    assert 1 - abs(np.vdot(ref, full.coeffs)) ** 2 < 1e-9


def test_kerr_vacuum_fixed_point():
    k = kerr_evolve(0.0, 3.0)
    np.testing.assert_array_equal(k.coeffs, [1.0])


def test_kerr_cat_reference_is_normalised():
    ref = kerr_cat_reference(2.5, 80)
    assert np.vdot(ref, ref).real == pytest.approx(1.0, abs=1e-10)
