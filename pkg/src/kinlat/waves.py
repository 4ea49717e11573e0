"""Weakly nonlinear lattice waves in amplitude form.

The second-order lattice dynamics is rewritten in complex amplitudes
``a(k) = wbar(k) q(k) + i p(k)/wbar(k)`` and doubled over a sign index so
that every mode carries the pair ``(a_k, conj(a_k))``:

    d/dt ah(k, s) = -i s wbar(k) ah(k, s)
                    - i s lam sum_{s1 s2} sum_{k1 + k2 window} M ah(k1,s1) ah(k2,s2)

with ``M = [8 wbar(k) wbar(k1) wbar(k2)]^-1`` and the wavenumber constraint
``s1 k1 + s2 k2 = s k (mod N)`` (umklapp wraps included).  The interaction
sum carries unit weight after the constraint collapses it, which is the
normalization the position-space equation of motion induces.  The sign pair
is stored explicitly; the physical manifold is ``ah(k,-1) = conj(ah(k,+1))``
and the flow preserves it structurally.

The zero mode has vanishing dispersion and is masked throughout: it is
dropped from the transformation, excluded from the interaction sum, and its
amplitude stays pinned at zero.

Ensembles are initialized with deterministic random phases on a prescribed
modulus profile; averaging ``|ah(k,+1)|^2`` over replicas gives the empirical
spectrum reported on the rescaled wavenumbers ``h k``, which is the object
the kinetic description predicts at times of order ``lam^-2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalBlowupError, SizeMismatchError
from .kernels import wave_nonlinear
from .kinetic import Spectrum, TorusGrid
from .lattice import (
    LatticeSpec,
    center_index,
    inverse_omega_bar_grid,
    omega_bar_grid,
    wavenumbers,
)

__all__ = [
    "ModelParams",
    "PhasePair",
    "AmplitudeState",
    "EnsembleSpec",
    "to_amplitudes",
    "from_amplitudes",
    "rhs",
    "hamiltonian",
    "hamiltonian_terms",
    "integrate",
    "sample_initial",
    "stack_ensemble",
    "unstack_ensemble",
    "empirical_spectrum",
    "reality_defect",
]

BLOWUP_BOUND = 1e8


@dataclass(frozen=True)
class ModelParams:
    """Lattice geometry plus interaction strength ``lam >= 0``."""

    spec: LatticeSpec
    lam: float

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError(f"coupling must be nonnegative, got {self.lam}")


@dataclass
class PhasePair:
    """Fourier components of a displacement/velocity pair on the lattice.

    Shifted spectral layout; descends from real fields iff both arrays are
    conjugate-even, ``q(-k) = conj(q(k))``.
    """

    q: np.ndarray
    p: np.ndarray


@dataclass
class AmplitudeState:
    """Doubled amplitude field ``a[s, k]`` with ``s = 0 <-> +1, 1 <-> -1``."""

    a: np.ndarray
    t: float = 0.0


def _check_state(spec: LatticeSpec, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    want = (2,) + spec.shape
    if a.shape[-len(want) :] != want:
        raise SizeMismatchError(f"amplitude array shape {a.shape}, expected trailing {want}")
    return a


def _grid_axes(spec: LatticeSpec, arr: np.ndarray) -> tuple[int, ...]:
    return tuple(range(arr.ndim - spec.d, arr.ndim))


def to_amplitudes(pair: PhasePair, spec: LatticeSpec) -> AmplitudeState:
    """Map ``(q, p)`` to amplitudes, ``a = wbar q + i p / wbar``.

    The zero mode carries no oscillation and is dropped (set to zero); its
    content is not representable in these variables.
    """
    q = np.asarray(pair.q, dtype=np.complex128)
    p = np.asarray(pair.p, dtype=np.complex128)
    if q.shape != spec.shape or p.shape != spec.shape:
        raise SizeMismatchError(
            f"phase pair shapes {q.shape}/{p.shape}, expected {spec.shape}"
        )
    wbar = omega_bar_grid(spec)
    winv = inverse_omega_bar_grid(spec)
    a_plus = wbar * q + 1j * winv * p
    a_plus[center_index(spec)] = 0.0
    return AmplitudeState(np.stack([a_plus, np.conj(a_plus)]), 0.0)


def from_amplitudes(state: AmplitudeState, spec: LatticeSpec) -> PhasePair:
    """Inverse map, ``q = [a(k) + a*(-k)]/(2 wbar)``, ``p = i wbar [a*(-k) - a(k)]/2``.

    Uses the stored sign pair literally: ``a*(-k)`` is read off the ``s = -1``
    component at ``-k``.  Exact inverse of :func:`to_amplitudes` on the
    retained modes; the masked zero mode returns as zero.
    """
    a = _check_state(spec, state.a)
    gax = _grid_axes(spec, a[0])
    a_plus = a[0]
    a_conj_neg = np.flip(a[1], axis=gax)  # value of conj-component at -k
    winv = inverse_omega_bar_grid(spec)
    wbar = omega_bar_grid(spec)
    q = 0.5 * winv * (a_plus + a_conj_neg)
    p = 0.5j * wbar * (a_conj_neg - a_plus)
    return PhasePair(q, p)


def reality_defect(state: AmplitudeState) -> float:
    """Max deviation from the conjugate-pair constraint ``a[1] = conj(a[0])``."""
    return float(np.max(np.abs(state.a[1] - np.conj(state.a[0]))))


def rhs(state: AmplitudeState, params: ModelParams, backend: str | None = None) -> np.ndarray:
    """Time derivative of the amplitude array (same shape as ``state.a``)."""
    a = _check_state(params.spec, state.a)
    return _rhs_array(a, params, backend)


def _rhs_array(a: np.ndarray, params: ModelParams, backend: str | None = None) -> np.ndarray:
    spec = params.spec
    wbar = omega_bar_grid(spec)
    sgn = np.array([1.0, -1.0]).reshape((2,) + (1,) * spec.d)
    lin = -1j * sgn * wbar * a
    if params.lam == 0.0:
        return lin
    return lin + wave_nonlinear(a, spec, params.lam, backend)


def hamiltonian_terms(
    state: AmplitudeState, params: ModelParams
) -> tuple[float, complex]:
    """Quadratic and cubic energy terms ``(H1, H2)``.

    ``H1 = sum_k wbar |a_k|^2 / 2`` over the sign ``+1`` component.  ``H2``
    is the sign-symmetric triple sum over ``s0 k0 + s1 k1 + s2 k2 = 0
    (mod N)`` with the interaction kernel ``M`` and one lattice measure
    ``h**d``, matching the measure of the quadratic term in the equations
    of motion.  All eight sign words collapse into a cube of the single
    field ``V = fft((a(+) + flip(a(-))) / wbar)``, so the value costs one
    FFT.  On states obeying the reality constraint ``V`` is real and so is
    ``H2``; the complex return keeps round-off imaginary parts visible.
    """
    a = _check_state(params.spec, state.a)
    spec = params.spec
    gax = _grid_axes(spec, a[0])
    wbar = omega_bar_grid(spec)
    winv = inverse_omega_bar_grid(spec)
    h1 = float(0.5 * np.sum(wbar * np.abs(a[0]) ** 2))
    b = (a[0] + np.flip(a[1], axis=gax)) * winv
    v = np.fft.fftn(np.fft.ifftshift(b, axes=gax), axes=gax)
    h2 = complex(spec.h ** (2 * spec.d) * 0.125 * np.sum(v**3))
    return h1, h2


def hamiltonian(state: AmplitudeState, params: ModelParams) -> float:
    """Total energy ``H1 + lam * Re H2`` (see :func:`hamiltonian_terms`)."""
    h1, h2 = hamiltonian_terms(state, params)
    return h1 + params.lam * h2.real


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------


def _phase_factors(spec: LatticeSpec, dt: float) -> tuple[np.ndarray, np.ndarray]:
    wbar = omega_bar_grid(spec)
    sgn = np.array([1.0, -1.0]).reshape((2,) + (1,) * spec.d)
    e_half = np.exp(-0.5j * dt * sgn * wbar)
    return e_half, e_half * e_half


def _integrate_array(
    a: np.ndarray,
    params: ModelParams,
    dt: float,
    n_steps: int,
    scheme: str = "exponential",
    backend: str | None = None,
    check_every: int = 50,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Batched core; ``a`` may carry leading replica axes."""
    spec = params.spec
    if scheme == "exponential":
        e2, e1 = _phase_factors(spec, dt)

        def nl(x):
            return wave_nonlinear(x, spec, params.lam, backend)

        for i in range(n_steps):
            k1 = nl(a)
            k2 = nl(e2 * (a + 0.5 * dt * k1))
            k3 = nl(e2 * a + 0.5 * dt * k2)
            ea = e1 * a
            k4 = nl(ea + dt * e2 * k3)
            a = ea + dt / 6.0 * (e1 * k1 + 2.0 * e2 * (k2 + k3) + k4)
            _maybe_check(a, i, check_every, n_steps)
            if callback is not None:
                callback(i, a)
    elif scheme == "rk4":
        for i in range(n_steps):
            k1 = _rhs_array(a, params, backend)
            k2 = _rhs_array(a + 0.5 * dt * k1, params, backend)
            k3 = _rhs_array(a + 0.5 * dt * k2, params, backend)
            k4 = _rhs_array(a + dt * k3, params, backend)
            a = a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            _maybe_check(a, i, check_every, n_steps)
            if callback is not None:
                callback(i, a)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return a


def _maybe_check(a: np.ndarray, i: int, every: int, n_steps: int) -> None:
    if every and (i % every == every - 1 or i == n_steps - 1):
        peak = np.max(np.abs(a))
        if not np.isfinite(peak) or peak > BLOWUP_BOUND:
            raise NumericalBlowupError(f"amplitude peak {peak:.3e}", step=i)


def integrate(
    state: AmplitudeState,
    params: ModelParams,
    dt: float,
    n_steps: int,
    scheme: str = "exponential",
    backend: str | None = None,
    check_every: int = 50,
) -> AmplitudeState:
    """Advance the amplitude flow by ``n_steps`` steps of size ``dt``.

    ``scheme="exponential"`` propagates the linear phase exactly and applies
    a fourth-order rule in the rotating frame, so at ``lam = 0`` every
    modulus is preserved to round-off.  ``scheme="rk4"`` is the plain
    classical rule on the full right-hand side.
    """
    a = _check_state(params.spec, state.a)
    out = _integrate_array(
        a.copy(), params, dt, n_steps, scheme, backend, check_every
    )
    return AmplitudeState(out, state.t + dt * n_steps)


# ---------------------------------------------------------------------------
# ensembles and the empirical spectrum
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    """Random-phase ensemble: ``m`` replicas on modulus profile ``n0``.

    ``n0`` is either a table over the shifted spectral grid or a callable
    evaluated on the rescaled wavenumbers ``h k`` (array of shape
    ``(N,)*d + (d,)``); values must be nonnegative.
    """

    m: int
    seed: int
    n0: np.ndarray | Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"ensemble needs at least one replica, got {self.m}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")


def n0_table(ens: EnsembleSpec, spec: LatticeSpec) -> np.ndarray:
    """Materialize the profile on the spectral grid, zero mode masked."""
    if callable(ens.n0):
        kappa = spec.h * wavenumbers(spec).astype(np.float64)
        table = np.asarray(ens.n0(kappa), dtype=np.float64)
    else:
        table = np.asarray(ens.n0, dtype=np.float64)
    if table.shape != spec.shape:
        raise SizeMismatchError(f"profile shape {table.shape}, expected {spec.shape}")
    if not np.all(np.isfinite(table)) or np.any(table < 0.0):
        raise ValueError("modulus profile must be finite and nonnegative")
    table = table.copy()
    table[center_index(spec)] = 0.0
    return table


def _sample_array(ens: EnsembleSpec, spec: LatticeSpec) -> np.ndarray:
    root = np.sqrt(n0_table(ens, spec))
    out = np.empty((ens.m, 2) + spec.shape, dtype=np.complex128)
    for i in range(ens.m):
        # per-replica generator: replica i is identical no matter how many
        # replicas are drawn or on which worker
        rng = np.random.default_rng(np.random.SeedSequence([ens.seed, i]))
        theta = 2.0 * np.pi * rng.random(spec.shape)
        a_plus = root * np.exp(1j * theta)
        out[i, 0] = a_plus
        out[i, 1] = np.conj(a_plus)
    return out


def sample_initial(ens: EnsembleSpec, spec: LatticeSpec) -> list[AmplitudeState]:
    """Draw the random-phase ensemble at ``t = 0``, deterministically in the seed."""
    return [AmplitudeState(a, 0.0) for a in _sample_array(ens, spec)]


def stack_ensemble(states: Sequence[AmplitudeState]) -> tuple[np.ndarray, float]:
    """Stack replicas into one ``(m, 2) + grid`` array; all must share ``t``."""
    if len(states) == 0:
        raise ValueError("empty ensemble")
    t = states[0].t
    if any(abs(s.t - t) > 1e-12 for s in states):
        raise ValueError("replicas are at different times")
    return np.stack([s.a for s in states]), t


def unstack_ensemble(a: np.ndarray, t: float) -> list[AmplitudeState]:
    return [AmplitudeState(a[i].copy(), t) for i in range(a.shape[0])]


def empirical_spectrum(
    states: Sequence[AmplitudeState] | np.ndarray, spec: LatticeSpec, t: float | None = None
) -> Spectrum:
    """Replica average of ``ah(k,-1) ah(k,+1)`` on the rescaled grid ``h k``.

    On the physical manifold the product is ``|ah(k,+1)|^2``; the real part
    is taken and round-off negatives are floored at zero.  The result lives
    on the torus grid with ``N`` nodes per axis (``h k`` mod 1 enumerates
    exactly the nodes ``j/N``), reported in natural node order.  ``tau``
    carries the microscopic time; rescaling to kinetic time is the caller's
    business.
    """
    if isinstance(states, np.ndarray):
        a = states
        if t is None:
            raise ValueError("stacked-array input needs an explicit time")
    else:
        a, t = stack_ensemble(states)
    a = _check_state(spec, a)
    if a.ndim != 2 + spec.d:  # replica, sign, then the grid axes
        raise SizeMismatchError("expected one leading replica axis")
    prod = np.mean(a[:, 1] * a[:, 0], axis=0).real
    gax = tuple(range(prod.ndim - spec.d, prod.ndim))
    f = np.maximum(np.fft.ifftshift(prod, axes=gax), 0.0)
    return Spectrum(TorusGrid(spec.d, spec.N), f, float(t))
