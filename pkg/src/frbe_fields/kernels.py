"""Translation-invariant smoothing kernels and their Fourier transforms.

A kernel ``g(x1, x) = h(x1 - x)`` enters every downstream formula only
through ``g_hat(l, x) = e^{i l x} h_hat(l)``.  Custom kernels are therefore
given by their (even, real) transform ``h_hat``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, PreconditionError
from .specfun import log_bessel_k

_CHECK_GRID = np.concatenate([np.linspace(0.0, 10.0, 41), np.geomspace(12.0, 1e4, 30)])


@dataclass(frozen=True)
class KernelSpec:
    family: str = "matern"
    nu: float = 0.5
    a: float = 1.0
    custom_ft: Callable | None = None

    def __post_init__(self):
        fam = self.family.lower()
        object.__setattr__(self, "family", fam)
        if fam == "matern":
            if not self.nu > 0:
                raise DomainError(f"Matern nu must be > 0, got {self.nu}")
            if not self.a > 0:
                raise DomainError(f"Matern a must be > 0, got {self.a}")
        elif fam == "custom":
            if self.custom_ft is None:
                raise PreconditionError("custom kernel needs custom_ft")
            _validate_custom(self.custom_ft)
        else:
            raise DomainError(f"unknown kernel family {self.family!r}")

    def describe(self) -> dict:
        if self.family == "matern":
            return {"family": "matern", "nu": self.nu, "a": self.a}
        return {"family": "custom", "custom_ft": getattr(self.custom_ft, "__name__", repr(self.custom_ft))}


def _validate_custom(fn: Callable) -> None:
    pos = np.asarray(fn(_CHECK_GRID), dtype=float)
    neg = np.asarray(fn(-_CHECK_GRID), dtype=float)
    if pos.shape != _CHECK_GRID.shape or not np.all(np.isfinite(pos)):
        raise PreconditionError("custom_ft must be vectorised and finite")
    scale = max(np.abs(pos).max(), 1e-300)
    if np.max(np.abs(pos - neg)) > 1e-10 * scale:
        raise PreconditionError("custom_ft must be even")
    # square-integrability surrogate: l * h_hat(l)^2 must fall off at the far end
    tail = _CHECK_GRID[-5:] * pos[-5:] ** 2
    if np.max(tail) > 1e-3 * scale**2:
        raise PreconditionError("custom_ft does not look square-integrable")


def matern(spec: KernelSpec, x):
    """``h(x) = (a|x|)^nu K_nu(a|x|) / (2^(nu-1) Gamma(nu))``, with ``h(0) = 1``."""
    _require_matern(spec)
    x = np.asarray(x, dtype=float)
    z = spec.a * np.abs(x).ravel()
    out = np.ones_like(z)
    pos = z > 0
    if pos.any():
        zp = z[pos]
        nu = spec.nu
        out[pos] = np.exp(nu * np.log(zp) + log_bessel_k(nu, zp) - (nu - 1) * math.log(2.0) - gammaln(nu))
        np.minimum(out, 1.0, out=out)  # near 0 the log terms cancel and may round above 1
    out = out.reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def matern_ft(spec: KernelSpec, lam):
    """``2 sqrt(pi) a^(2nu) Gamma(nu+1/2)/Gamma(nu) (a^2 + l^2)^-(nu+1/2)``."""
    _require_matern(spec)
    lam = np.asarray(lam, dtype=float)
    nu, a = spec.nu, spec.a
    logc = math.log(2 * math.sqrt(math.pi)) + 2 * nu * math.log(a) + gammaln(nu + 0.5) - gammaln(nu)
    out = np.exp(logc - (2 * nu + 1) * np.log(np.hypot(a, lam)))
    return float(out) if out.ndim == 0 else out


def kernel_transform(spec: KernelSpec, lam):
    """Radial transform ``h_hat(l)`` for either family."""
    if spec.family == "matern":
        return matern_ft(spec, lam)
    lam = np.asarray(lam, dtype=float)
    out = np.broadcast_to(np.asarray(spec.custom_ft(lam), dtype=float), lam.shape).copy()
    return float(out) if out.ndim == 0 else out


def kernel_ft(spec: KernelSpec, lam, x):
    """Real form ``cos(l x) h_hat(l)`` of the kernel transform."""
    lam = np.asarray(lam, dtype=float)
    return np.cos(lam * x) * kernel_transform(spec, lam)


def _require_matern(spec: KernelSpec) -> None:
    if spec.family != "matern":
        raise PreconditionError("operation defined for the Matern family only")
