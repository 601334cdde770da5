import numpy as np
import pytest

from wavestrip.grid import make_grid, dealias, tilbert, to_spectrum
from wavestrip.holo import (
    HoloField,
    holo_from_real,
    holo_from_spectrum,
    project,
    inner_h,
    weighted_inner,
    norm_calH,
    sobolev_weight,
    sobolev_norm,
    holomorphy_residual,
    flip_residual,
    check_identities,
)
from conftest import random_trace


def test_holo_from_real_satisfies_constraint(grid, rng):
    u = holo_from_real(rng.standard_normal(grid.N), grid)
    assert holomorphy_residual(u.values, grid) < 1e-12
    u.validate()


def test_holo_from_spectrum_coefficients(grid):
    u = holo_from_spectrum([0.5, 0.0, 0.25j], grid)
    c = to_spectrum(u.values.real)
    assert abs(c[1] - 0.5) < 1e-13
    assert abs(c[3] - 0.25j) < 1e-13
    assert abs(c[-3] - np.conj(0.25j)) < 1e-13
    u.validate()


def test_holofield_shape_check(grid):
    with pytest.raises(ValueError):
        HoloField(grid, np.zeros(grid.N + 1))


def test_field_means(grid):
    u = HoloField(grid, (3.0 + 0.0j) * np.ones(grid.N))
    assert np.isclose(u.re_mean, 3.0)
    assert np.isclose(u.im_mean, 0.0)


def test_validate_rejects_nonholomorphic(grid):
    bad = HoloField(grid, np.cos(grid.nodes) + 1j * np.cos(grid.nodes))
    with pytest.raises(ValueError):
        bad.validate()


def test_field_arithmetic(grid, rng):
    u = random_trace(grid, rng)
    v = random_trace(grid, rng)
    assert np.allclose((u + v).values, u.values + v.values)
    assert np.allclose((u - v).values, u.values - v.values)
    assert np.allclose((2.5 * u).values, 2.5 * u.values)


def test_projection_partition_of_identity(grid, rng):
    f = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
    total = project(f, grid, "holo") + project(f, grid, "anti")
    assert np.allclose(total, f, atol=1e-11)


def test_projection_idempotent_and_fixes_traces(grid, rng):
    u = random_trace(grid, rng)
    v = u.values - np.mean(u.values)
    Pv = project(v, grid, "holo")
    assert np.allclose(Pv, v, atol=1e-10)
    # idempotency and mutual annihilation hold on the fluctuation modes;
    # the zero and Nyquist gauge modes split evenly on every application
    f = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
    P1 = project(f, grid, "holo")
    gauge = (grid.k == 0) | (np.abs(grid.k) == grid.N // 2)
    d1 = to_spectrum(project(P1, grid, "holo") - P1)
    assert np.max(np.abs(d1[~gauge])) < 1e-12
    d2 = to_spectrum(project(P1, grid, "anti"))
    assert np.max(np.abs(d2[~gauge])) < 1e-12


def test_projection_kills_conjugate_trace(grid, rng):
    u = random_trace(grid, rng)
    v = np.conj(u.values - np.mean(u.values))
    assert np.max(np.abs(project(v, grid, "holo"))) < 1e-10


def test_flip_relation(grid, rng):
    u = random_trace(grid, rng)
    assert flip_residual(u.values, grid) < 1e-9
    # a conjugated trace violates the flip relation badly
    assert flip_residual(np.conj(u.values), grid) > 1e-2


def test_inner_h_single_mode(grid):
    # u = cos(kx) - i tanh(hk) sin... : <u, u> = L tanh(hk)^2
    for k in (1, 2, 5):
        u = holo_from_real(np.cos(k * grid.nodes), grid)
        want = grid.L * np.tanh(grid.h * k) ** 2
        assert np.isclose(inner_h(u, u, grid), want, rtol=1e-12)


def test_inner_h_blind_to_constants(grid, rng):
    u = random_trace(grid, rng)
    shifted = HoloField(grid, u.values + 7.0)
    assert np.isclose(inner_h(u, u, grid), inner_h(shifted, shifted, grid),
                      rtol=1e-10)


def test_weighted_inner(grid, rng):
    u = random_trace(grid, rng)
    v = random_trace(grid, rng)
    ones = np.ones(grid.N)
    assert np.isclose(weighted_inner(u, v, ones, grid), inner_h(u, v, grid),
                      rtol=1e-12)
    with pytest.raises(ValueError):
        weighted_inner(u, v, 1j * ones, grid)


def test_norm_calH(grid, rng):
    u = random_trace(grid, rng)
    v = random_trace(grid, rng)
    n = norm_calH((u, v), 2.0, grid)
    assert n > 0
    # quadratic homogeneity
    n4 = norm_calH((2 * u, 2 * v), 2.0, grid)
    assert np.isclose(n4, 4.0 * n, rtol=1e-12)
    with pytest.raises(ValueError):
        norm_calH((u, v), -1.0, grid)


def test_sobolev_norm_s0_is_l2(grid, rng):
    f = rng.standard_normal(grid.N)
    want = np.linalg.norm(f) * np.sqrt(grid.L / grid.N)
    assert np.isclose(sobolev_norm(f, 0.0, grid), want, rtol=1e-12)
    with pytest.raises(ValueError):
        sobolev_norm(f, -1.0, grid)
    with pytest.raises(ValueError):
        sobolev_norm(f, 1.0, grid, base="junk")


def test_sobolev_weight_depth_uniform():
    xi = np.array([0.0, 1.0, 10.0])
    w = sobolev_weight(xi, 2.0, 1.0)
    assert np.allclose(w, np.sqrt(1 + 4 * xi ** 2) / 2.0)


def test_product_identities(grid, rng):
    for _ in range(10):
        rep = check_identities(random_trace(grid, rng),
                               random_trace(grid, rng))
        assert rep.product_formula < 1e-10
        assert rep.projected_formula < 1e-10
        assert rep.passed
