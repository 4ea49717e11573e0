"""Long-range coupled oscillator chains with power-law interaction.

Sites sit on the uniform periodic mesh ``x = j h``, ``h = 1/n``, any number
of sites per axis (the mesh here is independent of the odd-count spectral
lattice used by the wave pipeline).  Each site carries a scalar
displacement/velocity pair driven by every other site:

    dv_x/dt = h^d sum_{y != x} (r_y - r_x) / |y - x|^(d + 2 alpha)

with ``|y - x|`` the minimal-image torus distance.  The flow conserves the
energy ``sum v^2/2 + (h^d/4) sum_{x,y} w(y-x) (r_y - r_x)^2`` and, by
pairwise antisymmetry, the total momentum ``sum v`` exactly; the mean
displacement therefore moves ballistically (zero acceleration).

Ensembles of independently initialized replicas feed the empirical phase
density and the two-site factorization defect used to probe molecular
chaos; both reduce over replicas in fixed order so results are
reproducible for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import (
    NumericalBlowupError,
    SizeMismatchError,
    UnnormalizedDensityError,
)
from .kernels import chain_force_flat, chain_kernel_table

__all__ = [
    "ChainGeometry",
    "FractionalParams",
    "ChainState",
    "ChainEnsemble",
    "GaussianLaw",
    "PointLaw",
    "TabulatedLaw",
    "site_coordinates",
    "force",
    "chain_energy",
    "total_momentum",
    "mean_displacement",
    "verlet_step",
    "verlet_evolve",
    "sample_ensemble",
    "EmpiricalDensity",
    "empirical_density",
    "chaos_defect",
]


@dataclass(frozen=True)
class ChainGeometry:
    """Uniform periodic site mesh: ``n`` sites per axis at spacing ``h = 1/n``."""

    d: int
    n: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.n < 2:
            raise ValueError(f"need at least two sites per axis, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_sites(self) -> int:
        return self.n**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d


@dataclass(frozen=True)
class FractionalParams:
    """Interaction exponent ``0 < alpha < 1`` and ambient dimension."""

    alpha: float
    d: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"fractional order must lie in (0, 1), got {self.alpha}")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")

    @property
    def c_d_alpha(self) -> float:
        """Normalization ``4^a Gamma(d/2 + a) / (pi^{d/2} |Gamma(-a)|)``.

        For d = 1, a = 1/2 this is exactly 1/pi.
        """
        a, d = self.alpha, self.d
        return (
            4.0**a
            * math.gamma(0.5 * d + a)
            / (math.pi ** (0.5 * d) * abs(math.gamma(-a)))
        )


@lru_cache(maxsize=32)
def site_coordinates(geom: ChainGeometry) -> np.ndarray:
    """Torus coordinates of the flat site order, shape ``(n_sites, d)``."""
    ax = np.arange(geom.n, dtype=np.float64) * geom.h
    mesh = np.meshgrid(*([ax] * geom.d), indexing="ij")
    out = np.stack(mesh, axis=-1).reshape(geom.n_sites, geom.d)
    out.setflags(write=False)
    return out


def _check_sites(geom: ChainGeometry, arr: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.shape[-1:] != (geom.n_sites,):
        raise SizeMismatchError(
            f"{name} has trailing shape {arr.shape}, expected (..., {geom.n_sites})"
        )
    return arr


@dataclass
class ChainState:
    """Flat per-site displacement and velocity at time ``t``."""

    r: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.r.shape != self.v.shape or self.r.ndim != 1:
            raise SizeMismatchError(
                f"state arrays must be equal-length vectors, got {self.r.shape} and {self.v.shape}"
            )
        if not (np.all(np.isfinite(self.r)) and np.all(np.isfinite(self.v))):
            raise ValueError("state entries must be finite")


@dataclass
class ChainEnsemble:
    """Replica-stacked states, arrays of shape ``(m, n_sites)``."""

    r: np.ndarray
    v: np.ndarray
    t: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.r.shape != self.v.shape or self.r.ndim != 2:
            raise SizeMismatchError(
                f"ensemble arrays must match and be 2-D, got {self.r.shape} and {self.v.shape}"
            )
        if self.r.shape[0] < 1:
            raise ValueError("ensemble needs at least one replica")

    @property
    def m(self) -> int:
        return self.r.shape[0]

    def replica(self, i: int) -> ChainState:
        return ChainState(self.r[i].copy(), self.v[i].copy(), self.t)


# ---------------------------------------------------------------------------
# force, energy, integrator
# ---------------------------------------------------------------------------


def force_array(
    r: np.ndarray,
    geom: ChainGeometry,
    fp: FractionalParams,
    method: str = "direct",
    backend: str | None = None,
) -> np.ndarray:
    """Batched acceleration for flat ``(..., n_sites)`` displacement arrays."""
    r = _check_sites(geom, r, "displacement")
    flat = r.reshape(-1, geom.n_sites)
    out = chain_force_flat(flat, geom.d, geom.n, fp.alpha, method, backend)
    return out.reshape(r.shape)


def force(
    state: ChainState,
    geom: ChainGeometry,
    fp: FractionalParams,
    method: str = "direct",
    backend: str | None = None,
) -> np.ndarray:
    """Per-site acceleration of the long-range coupling; sums to zero."""
    return force_array(state.r, geom, fp, method, backend)


def chain_energy(
    state: ChainState | ChainEnsemble,
    geom: ChainGeometry,
    fp: FractionalParams,
    backend: str | None = None,
) -> float | np.ndarray:
    """Conserved energy ``sum v^2/2 + (h^d/4) sum_{x,y} w (r_y - r_x)^2``.

    The potential term is evaluated through the quadratic-form identity
    ``U = -(1/2) sum_x r_x F_x``, which reproduces the pair sum exactly and
    keeps the analytic gradient relation ``-dU/dr = F`` by construction.
    Returns a scalar for a single state, a per-replica vector for an
    ensemble.
    """
    r = _check_sites(geom, state.r, "displacement")
    v = _check_sites(geom, state.v, "velocity")
    f = force_array(r, geom, fp, backend=backend)
    kin = 0.5 * np.sum(v * v, axis=-1)
    pot = -0.5 * np.sum(r * f, axis=-1)
    total = kin + pot
    return float(total) if total.ndim == 0 else total


def total_momentum(state: ChainState | ChainEnsemble) -> float | np.ndarray:
    out = np.sum(state.v, axis=-1)
    return float(out) if out.ndim == 0 else out


def mean_displacement(state: ChainState | ChainEnsemble) -> float | np.ndarray:
    out = np.mean(state.r, axis=-1)
    return float(out) if out.ndim == 0 else out


def _verlet_arrays(r, v, geom, fp, dt, n_steps, method, backend, callback, f0=None):
    """Velocity-Verlet core on batched arrays; one force call per step."""
    f = force_array(r, geom, fp, method, backend) if f0 is None else f0
    for i in range(n_steps):
        v_half = v + 0.5 * dt * f
        r = r + dt * v_half
        f = force_array(r, geom, fp, method, backend)
        v = v_half + 0.5 * dt * f
        if not np.isfinite(r).all() or not np.isfinite(v).all():
            raise NumericalBlowupError("non-finite chain state", step=i)
        if callback is not None:
            callback(i, r, v, f)
    return r, v, f


def verlet_step(
    state: ChainState,
    geom: ChainGeometry,
    fp: FractionalParams,
    dt: float,
    method: str = "direct",
    backend: str | None = None,
) -> ChainState:
    """One velocity-Verlet step (second order, symplectic)."""
    if dt <= 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    r, v, _ = _verlet_arrays(
        state.r.copy(), state.v.copy(), geom, fp, dt, 1, method, backend, None
    )
    return ChainState(r, v, state.t + dt)


def verlet_evolve(
    state: ChainState | ChainEnsemble,
    geom: ChainGeometry,
    fp: FractionalParams,
    dt: float,
    n_steps: int,
    method: str = "direct",
    backend: str | None = None,
    callback: Callable[[int, np.ndarray, np.ndarray, np.ndarray], None] | None = None,
):
    """Advance a state or a whole ensemble by ``n_steps`` Verlet steps.

    The ensemble path integrates all replicas as one batched array, which
    is both the fast path and trivially order-independent.  ``callback``
    sees ``(step_index, r, v, force)`` after each step.
    """
    if dt <= 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    r, v, _ = _verlet_arrays(
        np.array(state.r), np.array(state.v), geom, fp, dt, n_steps, method, backend, callback
    )
    t = state.t + dt * n_steps
    if isinstance(state, ChainEnsemble):
        return ChainEnsemble(r, v, t, state.seed)
    return ChainState(r, v, t)


# ---------------------------------------------------------------------------
# initial laws and sampling
# ---------------------------------------------------------------------------


def _per_site(value, x: np.ndarray) -> np.ndarray:
    """Broadcast a scalar or evaluate a callable of site coordinates."""
    if callable(value):
        out = np.asarray(value(x), dtype=np.float64)
        if out.shape != x.shape[:-1]:
            raise SizeMismatchError(
                f"site profile returned shape {out.shape}, expected {x.shape[:-1]}"
            )
        return out
    return np.full(x.shape[:-1], float(value))


Profile = float | Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GaussianLaw:
    """Independent normal (r, v) per site; parameters may vary with x.

    Any of the four fields may be a callable of the ``(n_sites, d)`` site
    coordinate array.  Zero widths degenerate to deterministic components,
    which is the clean way to get a smooth displacement profile with random
    velocities.
    """

    mean_r: Profile = 0.0
    mean_v: Profile = 0.0
    sigma_r: Profile = 1.0
    sigma_v: Profile = 1.0

    def sample_sites(self, rng: np.random.Generator, x: np.ndarray):
        mr, mv = _per_site(self.mean_r, x), _per_site(self.mean_v, x)
        sr, sv = _per_site(self.sigma_r, x), _per_site(self.sigma_v, x)
        if np.any(sr < 0.0) or np.any(sv < 0.0):
            raise ValueError("gaussian widths must be nonnegative")
        r = mr + sr * rng.standard_normal(x.shape[:-1])
        v = mv + sv * rng.standard_normal(x.shape[:-1])
        return r, v

    def density(self, x: np.ndarray, r: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Evaluate the law's phase density on broadcastable (x, r, v) grids."""
        mr, mv = _per_site(self.mean_r, x), _per_site(self.mean_v, x)
        sr, sv = _per_site(self.sigma_r, x), _per_site(self.sigma_v, x)
        if np.any(sr <= 0.0) or np.any(sv <= 0.0):
            raise ValueError("density undefined for degenerate (zero-width) components")
        shp = mr.shape + (1,) * (np.ndim(r))
        mr, mv, sr, sv = (a.reshape(shp) for a in (mr, mv, sr, sv))
        zr = (np.asarray(r) - mr) / sr
        zv = (np.asarray(v) - mv) / sv
        return np.exp(-0.5 * (zr * zr + zv * zv)) / (2.0 * np.pi * sr * sv)


@dataclass(frozen=True)
class PointLaw:
    """Deterministic initial data: point mass at (r0, v0), optionally x-dependent."""

    r0: Profile = 0.0
    v0: Profile = 0.0

    def sample_sites(self, rng: np.random.Generator, x: np.ndarray):
        return _per_site(self.r0, x), _per_site(self.v0, x)


@dataclass(frozen=True)
class TabulatedLaw:
    """x-independent law given as cell probabilities on an (r, v) grid.

    ``density`` holds cell-averaged density values; the law must integrate
    to one over the grid (unnormalized tables are rejected).  Sampling
    draws a cell by its mass and jitters uniformly inside it.
    """

    r_edges: np.ndarray
    v_edges: np.ndarray
    density: np.ndarray
    tol: float = 1e-8

    def __post_init__(self):
        re = np.asarray(self.r_edges, dtype=np.float64)
        ve = np.asarray(self.v_edges, dtype=np.float64)
        den = np.asarray(self.density, dtype=np.float64)
        if re.ndim != 1 or ve.ndim != 1 or re.size < 2 or ve.size < 2:
            raise ValueError("edges must be 1-D with at least two entries")
        if np.any(np.diff(re) <= 0.0) or np.any(np.diff(ve) <= 0.0):
            raise ValueError("edges must be strictly increasing")
        if den.shape != (re.size - 1, ve.size - 1):
            raise SizeMismatchError(
                f"density shape {den.shape} does not match edges "
                f"({re.size - 1}, {ve.size - 1})"
            )
        if np.any(den < 0.0):
            raise ValueError("density must be nonnegative")
        object.__setattr__(self, "r_edges", re)
        object.__setattr__(self, "v_edges", ve)
        object.__setattr__(self, "density", den)
        mass = float(np.sum(den * np.outer(np.diff(re), np.diff(ve))))
        if abs(mass - 1.0) > self.tol:
            raise UnnormalizedDensityError(
                f"tabulated law integrates to {mass:.12g}, expected 1 within {self.tol:g}"
            )

    def sample_sites(self, rng: np.random.Generator, x: np.ndarray):
        n = x.shape[0]
        dr = np.diff(self.r_edges)
        dv = np.diff(self.v_edges)
        mass = (self.density * np.outer(dr, dv)).ravel()
        mass = mass / mass.sum()
        cells = rng.choice(mass.size, size=n, p=mass)
        ir, iv = np.unravel_index(cells, self.density.shape)
        r = self.r_edges[ir] + dr[ir] * rng.random(n)
        v = self.v_edges[iv] + dv[iv] * rng.random(n)
        return r, v


def sample_ensemble(law, geom: ChainGeometry, m: int, seed: int) -> ChainEnsemble:
    """Draw ``m`` independent replicas, i.i.d. across sites within each.

    Replica ``i`` is generated from the child stream ``[seed, i]``, so the
    data for a given replica index never depends on how many replicas are
    requested or how the work is split across workers.
    """
    if m < 1:
        raise ValueError(f"need at least one replica, got {m}")
    x = site_coordinates(geom)
    r = np.empty((m, geom.n_sites))
    v = np.empty((m, geom.n_sites))
    for i in range(m):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        r[i], v[i] = law.sample_sites(rng, x)
    return ChainEnsemble(r, v, 0.0, seed)


# ---------------------------------------------------------------------------
# empirical measures
# ---------------------------------------------------------------------------


def _check_edges(edges: np.ndarray, name: str) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0.0):
        raise ValueError(f"{name} must be 1-D, strictly increasing, >= 2 entries")
    return edges


@dataclass
class EmpiricalDensity:
    """Per-site (r, v) histogram of an ensemble, as density values.

    ``density[x, i, j]`` estimates the phase density in bin (i, j) at site
    x; summing times the bin areas gives the captured probability, and
    ``escaped[x]`` logs what fell outside the binned window.
    """

    r_edges: np.ndarray
    v_edges: np.ndarray
    density: np.ndarray
    escaped: np.ndarray
    t: float


def empirical_density(
    ens: ChainEnsemble,
    geom: ChainGeometry,
    r_edges: np.ndarray,
    v_edges: np.ndarray,
) -> EmpiricalDensity:
    """Histogram the replicas site by site on a fixed (r, v) bin grid."""
    r_edges = _check_edges(r_edges, "r_edges")
    v_edges = _check_edges(v_edges, "v_edges")
    r = _check_sites(geom, ens.r, "displacement")
    v = _check_sites(geom, ens.v, "velocity")
    n_sites = geom.n_sites
    nr, nv = r_edges.size - 1, v_edges.size - 1
    counts = np.zeros((n_sites, nr, nv))
    for x in range(n_sites):
        counts[x], _, _ = np.histogram2d(r[:, x], v[:, x], bins=(r_edges, v_edges))
    area = np.outer(np.diff(r_edges), np.diff(v_edges))
    density = counts / (ens.m * area)
    escaped = 1.0 - counts.sum(axis=(1, 2)) / ens.m
    return EmpiricalDensity(r_edges, v_edges, density, escaped, ens.t)


def _joint_masses(ens, x, y, r_edges, v_edges):
    """Per-replica 4-D occupancy (r_x, v_x, r_y, v_y) on the shared bin grid."""
    sample = np.stack([ens.r[:, x], ens.v[:, x], ens.r[:, y], ens.v[:, y]], axis=1)
    hist, _ = np.histogramdd(sample, bins=(r_edges, v_edges, r_edges, v_edges))
    return hist / ens.m


def chaos_defect(
    ens: ChainEnsemble,
    pair: tuple[int, int],
    r_edges: np.ndarray,
    v_edges: np.ndarray,
) -> float:
    """L2 gap between the two-site histogram and the product of its marginals.

    Works on probability masses (not densities), so the value is scale-free
    in the bin widths: 0 means the empirical two-site measure factorizes on
    the bin grid, and for i.i.d. replicas it shrinks like ``m^-1/2``.
    Marginals are taken from the joint itself, so out-of-window samples
    drop out consistently.
    """
    x, y = pair
    if x == y:
        raise ValueError("site pair must be distinct")
    if ens.m < 2:
        raise ValueError("factorization defect needs at least two replicas")
    r_edges = _check_edges(r_edges, "r_edges")
    v_edges = _check_edges(v_edges, "v_edges")
    joint = _joint_masses(ens, x, y, r_edges, v_edges)
    p_x = joint.sum(axis=(2, 3))
    p_y = joint.sum(axis=(0, 1))
    gap = joint - p_x[:, :, None, None] * p_y[None, None, :, :]
    return float(np.sqrt(np.sum(gap * gap)))


def two_site_frequency(geom: ChainGeometry, fp: FractionalParams) -> float:
    """Closed-form normal-mode frequency of the two-site chain (d = 1).

    The difference coordinate obeys ``u'' = -2 h w(1/2) u`` with
    ``w(1/2) = (1/2)^-(1+2a)``, i.e. frequency ``sqrt(2^(1+2a))``.
    """
    if geom.d != 1 or geom.n != 2:
        raise ValueError("closed form applies to the two-site d=1 chain only")
    w, _, _ = chain_kernel_table(1, 2, float(fp.alpha))
    return math.sqrt(2.0 * geom.h * w[1])
