"""Initial-condition model: covariance, spectral density, limit constants, Green multiplier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import log_bessel_k, ml_neg


@dataclass(frozen=True)
class ModelParams:
    """Exponents and diffusivity of the fractional Riesz-Bessel equation."""

    alpha: float = 1.0
    beta: float = 0.5
    gamma_b: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if not self.alpha >= 0:
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 < self.beta <= 1:
            raise DomainError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.gamma_b > 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma_b}")
        if not self.mu > 0:
            raise DomainError(f"mu must be > 0, got {self.mu}")


@dataclass(frozen=True)
class SpectralSpec:
    """Cyclic long-memory covariance parameters, indexed ``j = 0..n``.

    Entry ``j = 0`` is the classical (origin) component with ``w[0] = 0``.
    """

    kappa: tuple[float, ...]
    w: tuple[float, ...]
    A: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "kappa", tuple(float(v) for v in self.kappa))
        object.__setattr__(self, "w", tuple(float(v) for v in self.w))
        object.__setattr__(self, "A", tuple(float(v) for v in self.A))
        n = len(self.kappa)
        if n == 0 or len(self.w) != n or len(self.A) != n:
            raise DomainError("kappa, w and A must be non-empty and of equal length")
        if any(not 0 < k < 1 for k in self.kappa):
            raise DomainError(f"every kappa_j must lie in (0, 1): {self.kappa}")
        if self.w[0] != 0:
            raise DomainError("w[0] must be 0")
        if any(not v > 0 for v in self.w[1:]):
            raise DomainError("w_j must be > 0 for j >= 1")
        if len(set(self.w[1:])) != n - 1:
            raise DomainError("w_j must be pairwise distinct")
        if any(a < 0 for a in self.A):
            raise DomainError("weights A_j must be >= 0")
        if abs(sum(self.A) - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1, got {sum(self.A)!r}")

    @property
    def kappa0(self) -> float:
        return self.kappa[0]

    @property
    def A0(self) -> float:
        return self.A[0]

    @property
    def case(self) -> str:
        return "cyclic" if self.A0 == 0 else "origin"

    def singular_points(self) -> list[float]:
        """Non-negative frequencies where the density is infinite."""
        pts = [w for w, a in zip(self.w[1:], self.A[1:]) if a > 0]
        if self.A0 > 0:
            pts.append(0.0)
        return sorted(pts)


def singular_exponents(spec: SpectralSpec) -> dict[float, float]:
    """Map each non-negative singular frequency to its ``kappa`` (``f ~ |l - s|^(kappa-1)``)."""
    out = {w: k for w, k, a in zip(spec.w[1:], spec.kappa[1:], spec.A[1:]) if a > 0}
    if spec.A0 > 0:
        out[0.0] = spec.kappa0
    return out


@dataclass(frozen=True)
class LimitConstants:
    c_cyclic: float
    c_origin: float
    c1: tuple[float, ...]
    # small-frequency coefficient of the density: f(l) ~ c_origin_density |l|^(kappa0-1)
    c_origin_density: float


def example_spectrum(case: str = "cyclic") -> SpectralSpec:
    """Parameter sets of the two worked numerical examples.

    ``case="origin"`` adds ``A0 = 0.4, kappa0 = 0.2`` and scales the cyclic
    weights by 0.6 so that the weights still sum to one.
    """
    kappa = (0.2, 0.6, 0.8)
    w = (0.8, 1.2, 2.0)
    A = (0.4, 0.35, 0.25)
    if case == "cyclic":
        return SpectralSpec((0.5,) + kappa, (0.0,) + w, (0.0,) + A)
    if case == "origin":
        return SpectralSpec((0.2,) + kappa, (0.0,) + w, (0.4,) + tuple(0.6 * a for a in A))
    raise ValueError(f"unknown case {case!r}")


def covariance_init(spec: SpectralSpec, x):
    """``r(x) = sum_j A_j cos(w_j x) (1 + x^2)^(-kappa_j / 2)``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k, w, a in zip(spec.kappa, spec.w, spec.A):
        if a:
            out = out + a * np.cos(w * x) * (1.0 + x * x) ** (-k / 2)
    return float(out) if out.ndim == 0 else out


def c1(kappa: float, j: int) -> float:
    return (2.0 if j == 0 else 1.0) * 2 ** ((1 - kappa) / 2) / (math.sqrt(math.pi) * math.gamma(kappa / 2))


def _bessel_power(kappa: float, u: np.ndarray) -> np.ndarray:
    """``K_{(k-1)/2}(u) u^{(k-1)/2}`` for ``u >= 0`` (infinite at 0)."""
    nu = (kappa - 1) / 2
    out = np.full_like(u, np.inf)
    pos = u > 0
    if pos.any():
        up = u[pos]
        out[pos] = np.exp(log_bessel_k(nu, up) + nu * np.log(up))
    return out


def spectral_density(spec: SpectralSpec, lam):
    """Spectral density ``f_xi(lambda)``; returns ``inf`` at the singular frequencies."""
    lam = np.asarray(lam, dtype=float)
    flat = np.abs(lam.ravel())
    out = np.zeros_like(flat)
    for j, (k, w, a) in enumerate(zip(spec.kappa, spec.w, spec.A)):
        if not a:
            continue
        coef = c1(k, j) / 2 * a
        if j == 0:
            out += coef * _bessel_power(k, flat)
        else:
            out += coef * (_bessel_power(k, np.abs(flat + w)) + _bessel_power(k, np.abs(flat - w)))
    out = out.reshape(lam.shape)
    return float(out) if out.ndim == 0 else out


def density_offset(spec: SpectralSpec, s: float, off: float) -> float:
    """``f_xi(s + off)`` for a singular frequency ``s``, taking the distance to ``s`` as ``|off|``.

    Near ``s`` the sum ``s + off`` rounds away most of ``off``; passing the
    offset separately keeps the singular term exact at any distance.
    """
    lam = abs(s + off)
    total = 0.0
    for j, (k, w, a) in enumerate(zip(spec.kappa, spec.w, spec.A)):
        if not a:
            continue
        coef = c1(k, j) / 2 * a
        if j == 0:
            u = np.array([abs(off) if s == 0 else lam])
            total += coef * _bessel_power(k, u)[0]
        else:
            u = np.array([abs(off) if s == w else abs(lam - w), lam + w])
            total += coef * _bessel_power(k, u).sum()
    return float(total)


def limit_constants(spec: SpectralSpec) -> LimitConstants:
    c1s = tuple(c1(k, j) for j, k in enumerate(spec.kappa))
    c_cyc = 0.0
    for j in range(1, len(spec.kappa)):
        k, w, a = spec.kappa[j], spec.w[j], spec.A[j]
        if a:
            nu = (k - 1) / 2
            c_cyc += c1s[j] * a * math.exp(log_bessel_k(nu, w) + nu * math.log(w))
    k0, a0 = spec.kappa0, spec.A0
    c_org = a0 / (math.gamma(k0) * math.cos(k0 * math.pi / 2))
    # K_nu(u) ~ Gamma(|nu|)/2 (2/u)^|nu| as u -> 0 fixes the density's origin coefficient
    c_dens = a0 * c1s[0] / 2 * math.gamma((1 - k0) / 2) * 2 ** ((1 - k0) / 2) / 2
    return LimitConstants(c_cyc, c_org, c1s, c_dens)


def field_constant(spec: SpectralSpec, case: str, origin_constant: str = "density") -> float:
    """Squared normalising constant of the limit field for ``case``.

    For the origin case ``origin_constant="density"`` uses the small-frequency
    coefficient of the spectral density, which is what the pre-limit fields
    converge to; ``"literal"`` uses the closed-form constant
    ``A0 / (Gamma(kappa0) cos(kappa0 pi / 2))``, which is twice as large.
    """
    lc = limit_constants(spec)
    if case == "cyclic":
        return lc.c_cyclic
    if case == "origin":
        if origin_constant == "density":
            return lc.c_origin_density
        if origin_constant == "literal":
            return lc.c_origin
        raise ValueError(f"origin_constant must be 'density' or 'literal', got {origin_constant!r}")
    raise ValueError(f"unknown case {case!r}")


def green_ft(params: ModelParams, t: float, lam, eps_scale: float = 0.0):
    """Fourier multiplier ``E_beta(-mu t^beta |l|^alpha (1 + l^2)^(gamma/2))``.

    ``eps_scale`` multiplies ``l^2`` inside the Bessel factor; the default 0
    drops that factor, which is the form appearing in the limit fields.  Pass
    ``eps_scale=1`` for the unscaled solution multiplier.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    lam = np.abs(np.asarray(lam, dtype=float))
    arg = params.mu * t ** params.beta * lam ** params.alpha
    if eps_scale:
        arg = arg * (1.0 + eps_scale * lam * lam) ** (params.gamma_b / 2)
    return ml_neg(params.beta, arg)
