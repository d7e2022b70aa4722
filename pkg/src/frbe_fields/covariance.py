"""Limit-field covariances by quadrature, the closed form at alpha = beta = a = 1,
and the Monte Carlo estimator used to check them.

With ``phi(l) = h_hat(l)^2 E(t, l) E(t', l) sigma(l)^2`` the covariance is

    C * 2 int_0^inf phi(l) cos(l (x - x')) dl                (complex form)

and the cosine-form fields add the same integral at ``x + x'``.  The head
``[0, 1]`` is integrated directly (after ``l = u^(1/kappa0)`` in the origin
case) and the tail with the Fourier-weighted QUADPACK routine, so oscillation
at large lags costs nothing extra.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import DomainError, LatticeMismatchError, PreconditionError, ToleranceError
from .kernels import KernelSpec, kernel_transform
from .simulate import MCEstimate, ensemble_values
from .spectral import ModelParams, SpectralSpec, field_constant, green_ft
from .specfun import bessel_k

_HEAD = 1.0


@dataclass(frozen=True)
class CovarianceQuery:
    t: float
    x: float
    t2: float
    x2: float
    case: str = "cyclic"

    def __post_init__(self):
        if self.t < 0 or self.t2 < 0:
            raise DomainError("times must be >= 0")
        if self.case not in ("cyclic", "origin"):
            raise DomainError(f"case must be cyclic|origin, got {self.case!r}")

    def swapped(self) -> "CovarianceQuery":
        return CovarianceQuery(self.t2, self.x2, self.t, self.x, self.case)


def _phi(mp: ModelParams, ks: KernelSpec, t: float, t2: float):
    def phi(lam):
        e1 = green_ft(mp, t, lam)
        e2 = e1 if t2 == t else green_ft(mp, t2, lam)
        return float(kernel_transform(ks, lam)) ** 2 * e1 * e2

    return phi


def _cos_integral(phi, h: float, kappa0: float | None, epsabs: float) -> tuple[float, float]:
    """``int_0^inf phi(l) |l|^(kappa0-1) cos(h l) dl`` (no power factor if ``kappa0`` is None)."""
    h = abs(h)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if kappa0 is None:
            if h > 0:
                v1, e1 = quad(phi, 0.0, _HEAD, weight="cos", wvar=h, epsabs=epsabs, limit=500)
            else:
                v1, e1 = quad(phi, 0.0, _HEAD, epsabs=epsabs, epsrel=1e-12, limit=500)
            tail = phi
        else:
            p = 1.0 / kappa0

            def head(u):
                lam = u**p
                return phi(lam) * p * math.cos(h * lam)

            v1, e1 = quad(head, 0.0, _HEAD, epsabs=epsabs, epsrel=1e-12, limit=1000)

            def tail(lam):
                return phi(lam) * lam ** (kappa0 - 1)
        if h > 0:
            v2, e2 = quad(tail, _HEAD, np.inf, weight="cos", wvar=h, epsabs=epsabs, limlst=200)
        else:
            v2, e2 = quad(tail, _HEAD, np.inf, epsabs=epsabs, epsrel=1e-12, limit=500)
    return v1 + v2, e1 + e2


def _covariance(mp, sp, ks, q, case, representation, origin_constant, tol) -> float:
    if representation not in ("complex", "cosine"):
        raise DomainError(f"representation must be complex|cosine, got {representation!r}")
    c = field_constant(sp, case, origin_constant)
    if c == 0:
        return 0.0
    kappa0 = sp.kappa0 if case == "origin" else None
    phi = _phi(mp, ks, q.t, q.t2)
    lags = [q.x - q.x2] + ([q.x + q.x2] if representation == "cosine" else [])
    total = err = 0.0
    for h in lags:
        v, e = _cos_integral(phi, h, kappa0, tol / 20)
        total += v
        err += e
    if not math.isfinite(total) or 2 * c * err > tol:
        raise ToleranceError(f"covariance quadrature error {2 * c * err:.2e} exceeds {tol:.1e}")
    return 2.0 * c * total


def covariance_limit_cyclic(mp: ModelParams, sp: SpectralSpec, ks: KernelSpec, q: CovarianceQuery,
                            representation: str = "complex", tol: float = 1e-8) -> float:
    """Covariance of the cyclic-case limit field at ``(t, x)`` and ``(t2, x2)``."""
    if sp.A0 != 0:
        raise PreconditionError("cyclic-case covariance needs A0 = 0")
    if q.case != "cyclic":
        raise PreconditionError("query case must be 'cyclic'")
    return _covariance(mp, sp, ks, q, "cyclic", representation, "density", tol)


def covariance_limit_origin(mp: ModelParams, sp: SpectralSpec, ks: KernelSpec, q: CovarianceQuery,
                            representation: str = "complex", origin_constant: str = "density",
                            tol: float = 1e-8) -> float:
    """Covariance of the origin-case limit field (spectral factor ``|l|^(kappa0-1)``)."""
    if sp.A0 == 0:
        raise PreconditionError("origin-case covariance needs A0 > 0")
    if q.case != "origin":
        raise PreconditionError("query case must be 'origin'")
    return _covariance(mp, sp, ks, q, "origin", representation, origin_constant, tol)


def covariance_limit(mp, sp, ks, t, x, t2, x2, representation="complex", origin_constant="density",
                     tol=1e-8) -> float:
    """Dispatch on the spectrum's case."""
    q = CovarianceQuery(t, x, t2, x2, sp.case)
    if sp.case == "cyclic":
        return covariance_limit_cyclic(mp, sp, ks, q, representation, tol)
    return covariance_limit_origin(mp, sp, ks, q, representation, origin_constant, tol)


def covariance_matrix(mp, sp, ks, points, **kw) -> np.ndarray:
    """Gram matrix over ``[(t, x), ...]``."""
    n = len(points)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = covariance_limit(mp, sp, ks, *points[i], *points[j], **kw)
    return out


# -- closed form at alpha = beta = a = 1 ----------------------------------------

def poisson_kernel(mu: float, t0: float, h):
    """``P(h) = 4 mu t0 / ((2 mu t0)^2 + h^2)``, the transform of ``exp(-2 mu t0 |l|)``."""
    h = np.asarray(h, dtype=float)
    return 4 * mu * t0 / ((2 * mu * t0) ** 2 + h * h)


def bessel_profile(nu: float, h):
    """``G(h) = 2 sqrt(pi) / Gamma(2nu+1) (|h|/2)^(2nu+1/2) K_{2nu+1/2}(|h|)``, the transform of ``(1+l^2)^-(2nu+1)``."""
    h = np.abs(np.asarray(h, dtype=float))
    p = 2 * nu + 0.5
    out = np.full(h.shape, math.sqrt(math.pi) * math.gamma(p) / math.gamma(2 * nu + 1))
    nz = h > 0
    if nz.any():
        out[nz] = 2 * math.sqrt(math.pi) / math.gamma(2 * nu + 1) * (h[nz] / 2) ** p * bessel_k(p, h[nz])
    return out


def covariance_closed_form_special(mu: float, t0: float, nu: float, h: float, c_field: float = 1.0) -> float:
    """Covariance at lag ``h`` for ``alpha = beta = a = 1`` and ``t = t' = t0``.

    Equal to ``c_field * K^2 / (2 pi) * (P * G)(h)`` with ``K`` the Matern
    transform constant ``2 sqrt(pi) Gamma(nu+1/2)/Gamma(nu)``.  The convolution
    is done by quadrature in ``y``.
    """
    if not (mu > 0 and t0 > 0 and nu > 0):
        raise DomainError("mu, t0 and nu must be > 0")
    k = 2 * math.sqrt(math.pi) * math.gamma(nu + 0.5) / math.gamma(nu)
    const = c_field * k * k / (2 * math.pi)

    def integrand(y):
        return float(poisson_kernel(mu, t0, h - y) * bessel_profile(nu, y))

    reach = 80.0 + 4 * nu
    edges = sorted({-reach - abs(h), min(0.0, h), max(0.0, h), reach + abs(h)})
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        if b > a:
            total += quad(integrand, a, b, epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    # outside the cut G is below 1e-30 and P is bounded by 1/(mu t0)
    return const * total


# -- Monte Carlo ----------------------------------------------------------------

def _nearest(grid: np.ndarray, v: float) -> int:
    return int(np.argmin(np.abs(np.asarray(grid) - v)))


def mc_covariance(samples, q: CovarianceQuery, min_samples: int = 100) -> MCEstimate:
    """Sample covariance between the lattice points nearest to ``(t, x)`` and ``(t2, x2)``.

    The standard error is the leave-one-out jackknife, computed in closed form.
    """
    if len(samples) < min_samples:
        raise PreconditionError(f"need at least {min_samples} samples, got {len(samples)}")
    vals = ensemble_values(samples)
    first = samples[0]
    i1, j1 = _nearest(first.t_grid, q.t), _nearest(first.x_grid, q.x)
    i2, j2 = _nearest(first.t_grid, q.t2), _nearest(first.x_grid, q.x2)
    a = vals[:, i1, j1]
    b = vals[:, i2, j2]
    return _cov_jackknife(a, b)


def _cov_jackknife(a: np.ndarray, b: np.ndarray) -> MCEstimate:
    m = a.size
    if m < 3:
        raise LatticeMismatchError("jackknife needs at least three samples")
    sa, sb, sab = a.sum(), b.sum(), (a * b).sum()
    est = (sab - sa * sb / m) / (m - 1)
    n = m - 1
    loo = ((sab - a * b) - (sa - a) * (sb - b) / n) / (n - 1)
    se = math.sqrt((m - 1) / m * float(((loo - loo.mean()) ** 2).sum()))
    return MCEstimate(float(est), se)
