"""Exception types shared across the package.

Everything raised on purpose derives from :class:`KinlatError` so callers
can distinguish our failures from genuine bugs.  The CLI maps these onto
exit codes (config -> 1, numerics -> 2, failed checks -> 3).
"""

from __future__ import annotations


class KinlatError(Exception):
    """Base class for all deliberate failures."""


class ConfigError(KinlatError):
    """Invalid run configuration (schema violation, unknown key, bad range)."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class SizeMismatchError(KinlatError, ValueError):
    """Array shape does not match the lattice or grid it claims to live on."""


class SingularModeError(KinlatError, ValueError):
    """An operation hit a mode with vanishing dispersion that it cannot handle."""


class UnnormalizedDensityError(KinlatError, ValueError):
    """A sampling law or tabulated density does not integrate to one."""


class NumericalBlowupError(KinlatError, RuntimeError):
    """Integration produced non-finite values or exceeded the growth bound."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")


class CheckFailure(KinlatError):
    """An acceptance-style assertion requested via --check did not hold."""
