"""Hot numerical kernels, each in a numba and a pure-numpy flavor.

Three inner loops dominate every pipeline: the quadratic interaction sum of
the lattice wave system, the discrete collision operator of the three-wave
kinetic equation, and the all-pairs force of the long-range chain.  Each is
implemented twice:

* ``*_direct``  - explicit loops compiled with ``numba.njit``;
* ``*_numpy``   - vectorized numpy (FFT convolution where the sum is one).

`kinlat._backend` picks the default; every public entry point also accepts
``backend="numba"|"numpy"`` explicitly.  The two flavors agree to round-off
and are timed against each other in ``benchmarks/bench_kernels.py``.

Layout conventions: spectral arrays arrive in the shifted (ascending
wavenumber) order of :mod:`kinlat.lattice`; kernels flatten them C-style, so
the flat index of wavenumber ``k`` is ``sum_c (k_c + D) * N**(d-1-c)``.
Position-space chain arrays stay in natural site order.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._backend import njit, resolve_backend
from .lattice import LatticeSpec, inverse_omega_bar_grid, wavenumbers

__all__ = [
    "wave_nonlinear",
    "collision_rate",
    "chain_force_flat",
    "chain_kernel_table",
]

TWO_PI = 2.0 * np.pi
_SQRT_2PI = float(np.sqrt(2.0 * np.pi))

PROFILE_CODES = {"gaussian": 0, "lorentzian": 1}


# ---------------------------------------------------------------------------
# wave interaction sum
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _wave_tables(spec: LatticeSpec):
    kvecs = np.ascontiguousarray(wavenumbers(spec).reshape(spec.n_sites, spec.d))
    winv = np.ascontiguousarray(inverse_omega_bar_grid(spec).reshape(-1))
    return kvecs, winv


@njit(cache=True)
def _wave_nl_direct(a, kvecs, winv, D, N, lam):
    # a: (batch, 2, n) complex128, sigma index 0 <-> +1, 1 <-> -1
    B, _, n = a.shape
    d = kvecs.shape[1]
    hd = 1.0 / N**d  # lattice measure h^d on the constrained pair sum
    out = np.zeros_like(a)
    for b in range(B):
        for si in range(2):
            sigma = 1 - 2 * si
            for ik in range(n):
                if winv[ik] == 0.0:
                    continue
                acc = 0.0 + 0.0j
                for s1 in range(2):
                    sig1 = 1 - 2 * s1
                    for s2 in range(2):
                        sig2 = 1 - 2 * s2
                        for i1 in range(n):
                            if winv[i1] == 0.0:
                                continue
                            # unique k2 in the window with
                            # sig1*k1 + sig2*k2 = sigma*k (mod N)
                            i2 = 0
                            for c in range(d):
                                kc = sig2 * (sigma * kvecs[ik, c] - sig1 * kvecs[i1, c])
                                i2 = i2 * N + (kc + D) % N
                            if winv[i2] == 0.0:
                                continue
                            acc += winv[i1] * winv[i2] * a[b, s1, i1] * a[b, s2, i2]
                out[b, si, ik] = -1j * sigma * lam * hd * 0.125 * winv[ik] * acc
    return out


def _wave_nl_fft(a: np.ndarray, spec: LatticeSpec, lam: float) -> np.ndarray:
    # The four sign-pair sums collapse into one cyclic self-convolution of
    # w = u(+) + flip(u(-)), with u(s) = a(., s) / omega_bar.
    d = spec.d
    s_ax = a.ndim - d - 1
    winv = inverse_omega_bar_grid(spec)
    up = np.take(a, 0, axis=s_ax) * winv
    um = np.take(a, 1, axis=s_ax) * winv
    gax = tuple(range(up.ndim - d, up.ndim))
    w = up + np.flip(um, axis=gax)
    W = np.fft.fftn(np.fft.ifftshift(w, axes=gax), axes=gax)
    S = np.fft.fftshift(np.fft.ifftn(W * W, axes=gax), axes=gax)
    coef = lam * spec.h**spec.d * 0.125 * winv
    nl_plus = -1j * coef * S
    nl_minus = 1j * coef * np.flip(S, axis=gax)
    return np.stack([nl_plus, nl_minus], axis=s_ax)


def wave_nonlinear(
    a: np.ndarray, spec: LatticeSpec, lam: float, backend: str | None = None
) -> np.ndarray:
    """Quadratic interaction term of the amplitude equations.

    ``a`` has shape ``batch + (2,) + (N,)*d`` (sigma axis before the grid
    axes, shifted wavenumber order).  Returns the same shape.  The pair sum
    over the momentum constraint carries the lattice measure ``h**d``, and
    the zero mode is excluded on input and output through the masked
    ``1/omega_bar`` table.
    """
    if lam == 0.0:
        return np.zeros_like(a)
    if resolve_backend(backend) == "numpy":
        return _wave_nl_fft(a, spec, lam)
    kvecs, winv = _wave_tables(spec)
    lead = a.shape[: a.ndim - spec.d - 1]
    flat = np.ascontiguousarray(a.reshape((-1, 2, spec.n_sites)))
    out = _wave_nl_direct(flat, kvecs, winv, spec.D, spec.N, float(lam))
    return out.reshape(lead + (2,) + spec.shape)


# ---------------------------------------------------------------------------
# three-wave collision operator
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _torus_tables(d: int, m: int):
    ax = np.arange(m, dtype=np.int64)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    jvecs = np.stack(mesh, axis=-1).reshape(m**d, d)
    omega = np.sum(np.sin(TWO_PI * jvecs / m) ** 2, axis=-1)
    return np.ascontiguousarray(jvecs), np.ascontiguousarray(omega)


def _flat_index(jvecs: np.ndarray, m: int) -> np.ndarray:
    d = jvecs.shape[-1]
    out = jvecs[..., 0] % m
    for c in range(1, d):
        out = out * m + jvecs[..., c] % m
    return out


def _profile_weight(du: np.ndarray, eps: float, code: int) -> np.ndarray:
    if code == 0:
        return np.exp(-0.5 * (du / eps) ** 2) / (eps * _SQRT_2PI)
    return (eps / np.pi) / (du * du + eps * eps)


@lru_cache(maxsize=16)
def _collision_plan(d: int, m: int, eps: float, code: int, floor: float):
    jvecs, omega = _torus_tables(d, m)
    kinv = np.where(omega >= floor, 1.0, 0.0) / np.where(omega >= floor, omega, 1.0)
    idx_a = _flat_index(jvecs[:, None, :] - jvecs[None, :, :], m)
    idx_b = _flat_index(jvecs[None, :, :] - jvecs[:, None, :], m)
    base = 0.125 * kinv[:, None] * kinv[None, :]
    w1 = base * kinv[idx_a] * _profile_weight(
        omega[:, None] - omega[None, :] - omega[idx_a], eps, code
    )
    w2 = base * kinv[idx_b] * _profile_weight(
        omega[None, :] - omega[:, None] - omega[idx_b], eps, code
    )
    return idx_a, idx_b, w1, w2


def _collision_numpy(f, d, m, eps, code, floor):
    idx_a, idx_b, w1, w2 = _collision_plan(d, m, eps, code, floor)
    f1 = f[None, :]
    f2a = f[idx_a]
    f2b = f[idx_b]
    term1 = (w1 * (f1 * f2a - f[:, None] * f1 - f[:, None] * f2a)).sum(axis=1)
    term2 = (w2 * (f2b * f[:, None] - f[:, None] * f1 - f1 * f2b)).sum(axis=1)
    return (term1 - 2.0 * term2) / m**d


@njit(cache=True)
def _collision_direct(f, omega, kinv, jvecs, m, eps, code):
    n = f.shape[0]
    d = jvecs.shape[1]
    out = np.zeros(n)
    inv_meas = 1.0 / m**d
    for ik in range(n):
        if kinv[ik] == 0.0:
            continue
        fk = f[ik]
        acc = 0.0
        for i1 in range(n):
            if kinv[i1] == 0.0:
                continue
            ia = 0
            ib = 0
            for c in range(d):
                ia = ia * m + (jvecs[ik, c] - jvecs[i1, c]) % m
                ib = ib * m + (jvecs[i1, c] - jvecs[ik, c]) % m
            if kinv[ia] != 0.0:
                du = omega[ik] - omega[i1] - omega[ia]
                if code == 0:
                    phi = np.exp(-0.5 * (du / eps) ** 2) / (eps * _SQRT_2PI)
                else:
                    phi = (eps / np.pi) / (du * du + eps * eps)
                w = 0.125 * kinv[ik] * kinv[i1] * kinv[ia] * phi
                acc += w * (f[i1] * f[ia] - fk * f[i1] - fk * f[ia])
            if kinv[ib] != 0.0:
                du = omega[i1] - omega[ik] - omega[ib]
                if code == 0:
                    phi = np.exp(-0.5 * (du / eps) ** 2) / (eps * _SQRT_2PI)
                else:
                    phi = (eps / np.pi) / (du * du + eps * eps)
                w = 0.125 * kinv[ik] * kinv[i1] * kinv[ib] * phi
                acc -= 2.0 * w * (f[ib] * fk - fk * f[i1] - f[i1] * f[ib])
        out[ik] = acc * inv_meas
    return out


def collision_rate(
    f: np.ndarray,
    d: int,
    m: int,
    eps: float,
    profile: str,
    floor: float,
    backend: str | None = None,
) -> np.ndarray:
    """Collision operator on the uniform torus grid ``j/m``, flat C order.

    Momentum deltas are resolved exactly on the grid; the frequency delta is
    broadened to a unit-mass profile of width ``eps``.  Modes with dispersion
    below ``floor`` neither receive nor donate. Quadrature weight ``m**-d``.
    """
    code = PROFILE_CODES[profile]
    flat = np.ascontiguousarray(f, dtype=np.float64).reshape(-1)
    if resolve_backend(backend) == "numpy":
        out = _collision_numpy(flat, d, m, float(eps), code, float(floor))
    else:
        jvecs, omega = _torus_tables(d, m)
        kinv = np.where(omega >= floor, 1.0, 0.0) / np.where(omega >= floor, omega, 1.0)
        out = _collision_direct(flat, omega, kinv, jvecs, m, float(eps), code)
    return out.reshape(f.shape)


# ---------------------------------------------------------------------------
# long-range chain force
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def chain_kernel_table(d: int, n: int, alpha: float):
    """Minimal-image coupling kernel ``|y-x|^-(d+2a)`` on the flat offset grid.

    Sites live at ``j/n`` per axis (any ``n >= 2``; even counts are fine, the
    half-way offset is its own mirror and the kernel is even).  Returns
    ``(w, wsum, wmat)``: the kernel over offsets in natural site order with
    ``w[0] = 0``, its total, and the full symmetric coupling matrix used by
    the vectorized direct path.
    """
    h = 1.0 / n
    half = n // 2
    ax = np.arange(n, dtype=np.int64)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    offs = np.stack(mesh, axis=-1).reshape(n**d, d)
    mimg = (offs + half) % n - half
    dist = h * np.sqrt(np.sum(mimg.astype(np.float64) ** 2, axis=-1))
    w = np.zeros(n**d)
    w[1:] = dist[1:] ** (-(d + 2.0 * alpha))
    # w[0] stays 0: no self-coupling
    diff = _flat_index(offs[None, :, :] - offs[:, None, :], n)
    wmat = w[diff]
    return w, float(w.sum()), wmat


@njit(cache=True)
def _chain_force_direct(r, wmat, h_d):
    B, n = r.shape
    out = np.zeros_like(r)
    for b in range(B):
        for x in range(n):
            acc = 0.0
            rx = r[b, x]
            for y in range(n):
                acc += wmat[x, y] * (r[b, y] - rx)
            out[b, x] = h_d * acc
    return out


def _chain_force_numpy(r, wmat, wsum, h_d):
    return h_d * (r @ wmat - wsum * r)


def _chain_force_circulant(r, w_grid, wsum, h_d, shape):
    rg = r.reshape(r.shape[:-1] + shape)
    gax = tuple(range(rg.ndim - len(shape), rg.ndim))
    wk = np.fft.fftn(w_grid)
    conv = np.real(np.fft.ifftn(np.fft.fftn(rg, axes=gax) * wk, axes=gax))
    return h_d * (conv.reshape(r.shape) - wsum * r)


def chain_force_flat(
    r: np.ndarray,
    d: int,
    n: int,
    alpha: float,
    method: str = "direct",
    backend: str | None = None,
) -> np.ndarray:
    """Acceleration ``h^d sum_{y != x} (r_y - r_x)/|y-x|^(d+2a)``, flat sites.

    ``r`` is ``(batch, n**d)``.  ``method="circulant"`` evaluates the same
    sum as an FFT convolution; it must (and does, to 1e-12) agree with the
    direct path.
    """
    w, wsum, wmat = chain_kernel_table(d, n, float(alpha))
    h_d = (1.0 / n) ** d
    shape = (n,) * d
    if method == "circulant":
        return _chain_force_circulant(r, w.reshape(shape), wsum, h_d, shape)
    if method != "direct":
        raise ValueError(f"unknown force method {method!r}")
    if resolve_backend(backend) == "numpy":
        return _chain_force_numpy(r, wmat, wsum, h_d)
    return _chain_force_direct(np.ascontiguousarray(r, dtype=np.float64), wmat, h_d)
