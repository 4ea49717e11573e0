"""Collision operator: oracle equality, equilibrium trend, stepping."""

import numpy as np
import pytest

from kinlat import _reference as ref
from kinlat.errors import NumericalBlowupError, SizeMismatchError
from kinlat.kinetic import (
    DEFAULT_OMEGA_FLOOR,
    CollisionDiagnostics,
    ResonanceRule,
    Spectrum,
    TorusGrid,
    active_mask,
    collision,
    compare_spectra,
    energy_moment,
    evolve,
    nodes,
    omega_grid,
    rayleigh_jeans,
    step,
)


@pytest.mark.parametrize(
    "d,m,eps,profile",
    [(1, 8, 0.3, "gaussian"), (1, 12, 0.15, "lorentzian"), (2, 6, 0.4, "gaussian")],
)
def test_collision_matches_direct_quadrature(rng, d, m, eps, profile):
    grid = TorusGrid(d, m)
    rule = ResonanceRule(eps, profile=profile)
    f = rng.uniform(0.1, 1.0, size=grid.shape)
    got = collision(f, grid, rule)
    want = ref.collision_direct(f, grid, rule)
    assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))


def test_collision_is_deterministic(rng):
    grid = TorusGrid(1, 10)
    rule = ResonanceRule(0.2)
    f = rng.uniform(0.1, 1.0, size=grid.shape)
    assert np.array_equal(collision(f, grid, rule), collision(f, grid, rule))


def test_frozen_modes_do_not_move(rng):
    grid = TorusGrid(1, 16)
    rule = ResonanceRule(0.1, omega_floor=0.2)
    f = rng.uniform(0.5, 1.0, size=grid.shape)
    c = collision(f, grid, rule)
    frozen = ~active_mask(grid, rule)
    assert frozen.any()  # the floor actually bites at this resolution
    assert np.all(c[frozen] == 0.0)


def test_collision_preserves_evenness():
    grid = TorusGrid(1, 16)
    x = np.arange(16) / 16.0
    f = 1.0 + 0.5 * np.cos(2.0 * np.pi * x) ** 2
    c = collision(f, grid, ResonanceRule(0.1))
    mirrored = c[(-np.arange(16)) % 16]
    assert np.max(np.abs(c - mirrored)) < 1e-13


def test_equilibrium_rate_vanishes_with_broadening():
    # T/omega annihilates the sharp bracket; the residual is pure broadening
    grid = TorusGrid(1, 16)
    norms = []
    for eps in (0.2, 0.1, 0.05, 0.025):
        rule = ResonanceRule(eps)
        rj = rayleigh_jeans(grid, 2.0, rule)
        c = collision(rj, grid, rule)
        norms.append(float(np.sum(np.abs(c)) * grid.cell_measure))
    assert all(a > b for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-10


def test_rayleigh_jeans_shape():
    grid = TorusGrid(1, 16)
    rule = ResonanceRule(0.1)
    rj = rayleigh_jeans(grid, 3.0, rule)
    w = omega_grid(grid)
    act = active_mask(grid, rule)
    assert np.allclose(rj.f[act] * w[act], 3.0, atol=1e-14)
    assert np.all(rj.f[~act] == 0.0)


def test_energy_moment_is_plain_quadrature(rng):
    grid = TorusGrid(2, 5)
    f = rng.uniform(size=grid.shape)
    want = float(np.sum(omega_grid(grid) * f)) / 25.0
    assert energy_moment(f, grid) == pytest.approx(want, rel=1e-15)
    assert energy_moment(Spectrum(grid, f), grid) == pytest.approx(want, rel=1e-15)


def test_step_clips_negatives_into_diagnostics():
    grid = TorusGrid(1, 16)
    rule = ResonanceRule(0.1)
    # a hollow spectrum drains its active minimum below zero in one big step
    x = np.arange(16) / 16.0
    f = Spectrum(grid, 0.02 + np.sin(2.0 * np.pi * x) ** 4)
    diag = CollisionDiagnostics()
    out = step(f, grid, rule, 5.0, scheme="euler", diag=diag)
    assert np.all(out.f >= 0.0)
    assert diag.steps == 1
    assert diag.clip_events >= 1 and diag.clipped_mass > 0.0


def test_evolve_stamps_time_and_calls_back():
    grid = TorusGrid(1, 8)
    rule = ResonanceRule(0.3)
    f = Spectrum(grid, np.full(grid.shape, 0.5))
    seen = []
    out = evolve(f, grid, rule, 0.01, 5, callback=lambda i, s: seen.append((i, s.tau)))
    assert out.tau == pytest.approx(0.05)
    assert seen[0] == (0, pytest.approx(0.01)) and len(seen) == 5


def test_euler_converges_to_rk4(rng):
    grid = TorusGrid(1, 12)
    rule = ResonanceRule(0.15)
    f0 = Spectrum(grid, rng.uniform(0.3, 0.8, size=grid.shape))
    ref_out = evolve(f0, grid, rule, 0.01, 10, scheme="rk4")
    e1 = evolve(f0, grid, rule, 0.01, 10, scheme="euler")
    e2 = evolve(f0, grid, rule, 0.005, 20, scheme="euler")
    gap1 = np.max(np.abs(e1.f - ref_out.f))
    gap2 = np.max(np.abs(e2.f - ref_out.f))
    assert gap2 < 0.75 * gap1  # first-order error halves under dt halving


def test_blowup_guard():
    grid = TorusGrid(1, 8)
    rule = ResonanceRule(0.5)
    f = Spectrum(grid, np.full(grid.shape, 1.0))
    with pytest.raises(NumericalBlowupError):
        evolve(f, grid, rule, 1e9, 50, scheme="euler")


def test_spectrum_validation():
    grid = TorusGrid(1, 8)
    with pytest.raises(SizeMismatchError):
        Spectrum(grid, np.zeros(7))
    with pytest.raises(ValueError):
        Spectrum(grid, np.full(8, -1.0))
    with pytest.raises(ValueError):
        Spectrum(grid, np.full(8, np.nan))
    with pytest.raises(ValueError):
        TorusGrid(1, 3)
    with pytest.raises(ValueError):
        ResonanceRule(0.0)
    with pytest.raises(ValueError):
        ResonanceRule(0.1, profile="box")


def test_compare_spectra_same_grid(rng):
    grid = TorusGrid(1, 8)
    a = Spectrum(grid, rng.uniform(size=8), 1.0)
    b = Spectrum(grid, a.f + 0.25, 2.0)
    d = compare_spectra(a, b)
    assert d.linf == pytest.approx(0.25)
    assert d.l1 == pytest.approx(0.25)
    assert d.l2 == pytest.approx(0.25)
    assert d.tau_a == 1.0 and d.tau_b == 2.0


def test_compare_spectra_interpolates_coarse_onto_fine():
    coarse = TorusGrid(1, 8)
    fine = TorusGrid(1, 16)
    xc = nodes(coarse)[..., 0]
    xf = nodes(fine)[..., 0]
    # a linear-in-node hat survives periodic linear interpolation exactly
    fc = Spectrum(coarse, 1.0 - np.abs(xc - 0.5))
    ff = Spectrum(fine, 1.0 - np.abs(xf - 0.5))
    d = compare_spectra(fc, ff)
    assert d.grid.m == 16
    assert d.linf < 1e-14
    with pytest.raises(SizeMismatchError):
        compare_spectra(
            Spectrum(TorusGrid(2, 4), np.zeros((4, 4))),
            Spectrum(TorusGrid(2, 6), np.zeros((6, 6))),
        )


def test_default_floor_is_tiny():
    # the default floor only guards against literal zero dispersion
    assert DEFAULT_OMEGA_FLOOR < 1e-6
