"""Named spectrum profiles over torus wavenumbers.

Every profile is a callable taking a coordinate mesh of shape
``(m,)*d + (d,)`` (entries in [0, 1) per axis, or equivalently rescaled
lattice wavenumbers mod 1) and returning nonnegative values of shape
``(m,)*d``.  The same callable therefore seeds either a wave ensemble or a
kinetic-equation initial spectrum.  ``make_profile`` is the string-keyed
factory the run configuration goes through.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ConfigError

__all__ = [
    "constant_profile",
    "torus_gaussian",
    "omega_bump",
    "rayleigh_jeans_profile",
    "make_profile",
    "PROFILE_NAMES",
]

Profile = Callable[[np.ndarray], np.ndarray]


def _dispersion(kappa: np.ndarray) -> np.ndarray:
    return np.sum(np.sin(2.0 * np.pi * kappa) ** 2, axis=-1)


def constant_profile(level: float) -> Profile:
    if level < 0.0:
        raise ConfigError(f"level must be nonnegative, got {level}", field="level")

    def profile(kappa: np.ndarray) -> np.ndarray:
        return np.full(kappa.shape[:-1], float(level))

    return profile


def torus_gaussian(amplitude: float, width: float) -> Profile:
    """Smooth periodic bump at the origin: ``A exp(-sum sin^2(pi k)/w^2)``."""
    if amplitude < 0.0 or width <= 0.0:
        raise ConfigError(
            f"need amplitude >= 0 and width > 0, got {amplitude}, {width}", field="width"
        )

    def profile(kappa: np.ndarray) -> np.ndarray:
        s = np.sum(np.sin(np.pi * kappa) ** 2, axis=-1)
        return amplitude * np.exp(-s / width**2)

    return profile


def omega_bump(amplitude: float, center: float, width: float) -> Profile:
    """Gaussian ridge in the dispersion value, ``A exp(-(w(k)-c)^2/2s^2)``."""
    if amplitude < 0.0 or width <= 0.0:
        raise ConfigError(
            f"need amplitude >= 0 and width > 0, got {amplitude}, {width}", field="width"
        )

    def profile(kappa: np.ndarray) -> np.ndarray:
        u = (_dispersion(kappa) - center) / width
        return amplitude * np.exp(-0.5 * u * u)

    return profile


def rayleigh_jeans_profile(temperature: float, floor: float = 1e-12) -> Profile:
    """Equilibrium shape ``T/w(k)``, zeroed where the dispersion sits below ``floor``."""
    if temperature < 0.0 or floor <= 0.0:
        raise ConfigError(
            f"need temperature >= 0 and floor > 0, got {temperature}, {floor}",
            field="temperature",
        )

    def profile(kappa: np.ndarray) -> np.ndarray:
        w = _dispersion(kappa)
        safe = np.where(w >= floor, w, 1.0)
        return np.where(w >= floor, temperature / safe, 0.0)

    return profile


_FACTORIES = {
    "constant": (constant_profile, ("level",)),
    "torus-gaussian": (torus_gaussian, ("amplitude", "width")),
    "omega-bump": (omega_bump, ("amplitude", "center", "width")),
    "rayleigh-jeans": (rayleigh_jeans_profile, ("temperature",)),
}

PROFILE_NAMES = tuple(sorted(_FACTORIES))


def make_profile(name: str, **params: float) -> Profile:
    """Build a profile by name; unknown names or parameters are config errors."""
    if name not in _FACTORIES:
        raise ConfigError(
            f"unknown profile {name!r}, expected one of {PROFILE_NAMES}", field="profile"
        )
    fn, required = _FACTORIES[name]
    extra = set(params) - set(required) - {"floor"}
    if name != "rayleigh-jeans":
        extra = set(params) - set(required)
    if extra:
        raise ConfigError(
            f"profile {name!r} does not take {sorted(extra)}", field="profile"
        )
    missing = [p for p in required if p not in params]
    if missing:
        raise ConfigError(
            f"profile {name!r} needs {missing}", field="profile"
        )
    return fn(**params)
