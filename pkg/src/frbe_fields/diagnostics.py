"""Hölder exponents and short/long-range dependence probes."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .covariance import covariance_limit
from .errors import InsufficientLagsError, PreconditionError, UnsupportedKernelError
from .kernels import KernelSpec
from .simulate import MCEstimate, ensemble_values
from .spectral import ModelParams, SpectralSpec


@dataclass(frozen=True)
class HolderReport:
    eta_star: float
    eta_tilde_star: float | None
    gamma_t_sup: float
    theta: float
    theta_star: float | None
    empirical_gamma_t: MCEstimate | None = None
    empirical_gamma_x: MCEstimate | None = None


@dataclass(frozen=True)
class HolderEstimate:
    estimate: float
    std_err: float
    degenerate: bool
    lags: tuple[float, ...]


@dataclass(frozen=True)
class DependenceReport:
    time_partial_integrals: list[tuple[float, float]]
    space_partial_integrals: list[tuple[float, float]]
    verdict_time: str
    verdict_space: str
    time_growth_exponent: float | None = None
    # slope after dividing by log T; removes the logarithm that E_beta's tail puts in front of T^(1-beta)
    time_growth_exponent_log: float | None = None
    space_decay_exponent: float | None = None
    settings: dict = field(default_factory=dict)


def holder_exponents_matern(mp: ModelParams, ks: KernelSpec, sp: SpectralSpec) -> HolderReport:
    """Closed-form Hölder orders for a Matérn kernel.

    Time: ``eta* = min(1, (4nu+1)/(2alpha))`` (origin case
    ``(4nu+2-kappa0)/(2alpha)``), scaled by ``beta``.  Space:
    ``theta = min(1, alpha+2nu+1/2)`` and ``theta* = min(1, alpha+2nu+1-kappa0/2)``.
    """
    if ks.family != "matern":
        raise UnsupportedKernelError("closed-form Hölder orders exist for the Matern family only")
    a, nu = mp.alpha, ks.nu

    def capped(num):
        return 1.0 if a == 0 else min(1.0, num / (2 * a))

    eta = capped(4 * nu + 1)
    origin = sp.A0 > 0
    eta_t = capped(4 * nu + 2 - sp.kappa0) if origin else None
    theta = min(1.0, a + 2 * nu + 0.5)
    theta_s = min(1.0, a + 2 * nu + 1 - sp.kappa0 / 2) if origin else None
    return HolderReport(eta, eta_t, (eta_t if origin else eta) * mp.beta, theta, theta_s)


def estimate_holder_from_samples(ens, axis: str = "time", anchor: int | None = 0,
                                 max_lag: int = 10, min_samples: int = 1000) -> HolderEstimate:
    """Variogram regression ``log E|dU|^2 = c + 2 gamma log h`` over lags ``1..max_lag``.

    Along ``time`` the increments start at lattice index ``anchor`` (default the
    first time, where the field is least regular); ``anchor=None`` averages
    over all start points.  Along ``space`` all start points are used.
    """
    if len(ens) < min_samples:
        raise PreconditionError(f"need at least {min_samples} samples, got {len(ens)}")
    vals = ensemble_values(ens)
    if axis == "time":
        grid = np.asarray(ens[0].t_grid)
    elif axis == "space":
        grid = np.asarray(ens[0].x_grid)
        vals = np.swapaxes(vals, 1, 2)
        anchor = None
    else:
        raise ValueError(f"axis must be time|space, got {axis!r}")
    n = grid.size
    if n < 2 or math.log10(n - 1) < 1.5:
        raise InsufficientLagsError(f"{n} lattice points span fewer than 1.5 decades of lags")
    step = np.diff(grid)
    if not np.allclose(step, step[0], rtol=1e-9):
        raise InsufficientLagsError("variogram fit needs a uniform lattice")
    lags = np.arange(1, max_lag + 1)
    if anchor is not None and anchor + max_lag >= n:
        raise InsufficientLagsError("anchor leaves too few lags")
    vario = np.empty(lags.size)
    for i, k in enumerate(lags):
        if anchor is None:
            d = vals[:, k:, :] - vals[:, :-k, :]
        else:
            d = vals[:, anchor + k, :] - vals[:, anchor, :]
        vario[i] = np.mean(d * d)
    h = lags * step[0]
    scale = float(np.mean(vals * vals))
    if not np.all(vario > 1e-24 * max(scale, 1e-300)):
        return HolderEstimate(1.0, 0.0, True, tuple(h))
    x, y = np.log(h), np.log(vario)
    xm = x - x.mean()
    slope = float(xm @ (y - y.mean()) / (xm @ xm))
    resid = y - y.mean() - slope * xm
    se = math.sqrt(float(resid @ resid) / (x.size - 2) / float(xm @ xm))
    return HolderEstimate(slope / 2, se / 2, False, tuple(h))


def _panel_integral(fn, edges) -> list[float]:
    """Cumulative ``int |fn|`` at each edge after the first."""
    out, acc = [], 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(edges, edges[1:]):
            acc += quad(lambda h: abs(fn(h)), a, b, epsabs=1e-12, epsrel=1e-9, limit=200)[0]
            out.append(acc)
    return out


def _cumulative_at(targets, edges, cum) -> list[float]:
    lookup = dict(zip(edges[1:], cum))
    return [lookup[float(v)] for v in targets]


def _log_slope(x, y) -> float | None:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return None
    lx, ly = np.log(x[ok]), np.log(y[ok])
    lxm = lx - lx.mean()
    return float(lxm @ (ly - ly.mean()) / (lxm @ lxm))


def dependence_probe(mp: ModelParams, sp: SpectralSpec, ks: KernelSpec, t0: float, x0: float,
                     T_list, H_list, growth_factor: float = 5.0, cauchy_tol: float = 1e-6,
                     decay_threshold: float = 1.2, representation: str = "complex",
                     origin_constant: str = "density") -> DependenceReport:
    """Partial integrals of ``|Cov|`` over time lags ``[0, T]`` and space lags ``[-H, H]``.

    Time verdict: ``LRD`` when the partial integrals increase strictly and the
    last/first ratio reaches ``growth_factor``; ``SRD`` when the last
    increment is below ``cauchy_tol``.  Space verdict: ``SRD`` when the last
    increment is below ``cauchy_tol`` or the increment density falls off
    faster than ``H^-decay_threshold`` (an integrable tail).
    """
    if not t0 > 0:
        raise PreconditionError("t0 must be > 0")
    T_list = [float(v) for v in T_list]
    H_list = [float(v) for v in H_list]
    for lst, name in ((T_list, "T_list"), (H_list, "H_list")):
        if any(b <= a for a, b in zip(lst, lst[1:])) or (lst and lst[0] <= 0):
            raise PreconditionError(f"{name} must be positive and increasing")
    kw = dict(representation=representation, origin_constant=origin_constant)

    def cov_t(h):
        return covariance_limit(mp, sp, ks, t0, x0, t0 + h, x0, **kw)

    def cov_x(h):
        return covariance_limit(mp, sp, ks, t0, x0, t0, x0 + h, **kw)

    time_vals: list[float] = []
    if T_list:
        geo = [0.1 * 2.0**k for k in range(int(math.log2(T_list[-1] / 0.1)) + 1)]
        edges = sorted({0.0, *geo, *T_list})
        edges = [e for e in edges if e <= T_list[-1]]
        time_vals = _cumulative_at(T_list, edges, _panel_integral(cov_t, edges))

    space_vals: list[float] = []
    if H_list:
        edges = sorted({0.0, *np.arange(1.0, H_list[-1], 1.0).tolist(), *H_list})
        right = _panel_integral(cov_x, edges)
        if representation == "complex":
            left = right  # stationary and even in the lag
        else:
            left = _panel_integral(lambda h: cov_x(-h), edges)
        space_vals = _cumulative_at(H_list, edges, [r + l for r, l in zip(right, left)])

    vt, g, glog = _time_verdict(T_list, time_vals, growth_factor, cauchy_tol)
    vs, p = _space_verdict(H_list, space_vals, cauchy_tol, decay_threshold)
    return DependenceReport(
        list(zip(T_list, time_vals)), list(zip(H_list, space_vals)), vt, vs, g, glog, p,
        {"t0": t0, "x0": x0, "growth_factor": growth_factor, "cauchy_tol": cauchy_tol,
         "decay_threshold": decay_threshold, "representation": representation},
    )


def _time_verdict(T, vals, growth, tol):
    if len(vals) < 2:
        return "inconclusive", None, None
    slope = _log_slope(T, vals)
    logc = _log_slope(T, [v / math.log(t) for t, v in zip(T, vals)]) if T[0] > 1 else None
    inc = np.diff(vals)
    if vals[0] > 0 and np.all(inc > 0) and vals[-1] / vals[0] >= growth:
        return "LRD", slope, logc
    if abs(inc[-1]) < tol:
        return "SRD", slope, logc
    return "inconclusive", slope, logc


def _space_verdict(H, vals, tol, threshold):
    if len(vals) < 2:
        return "inconclusive", None
    inc = np.diff(vals)
    dens = inc / np.diff(H)
    mids = (np.asarray(H[1:]) + np.asarray(H[:-1])) / 2
    tail = slice(-3, None) if len(dens) >= 3 else slice(None)
    slope = _log_slope(mids[tail], dens[tail])
    p = None if slope is None else -slope
    if abs(inc[-1]) < tol:
        return "SRD", p
    if p is not None and p > threshold:
        return "SRD", p
    if p is not None and p < 1.0:
        return "LRD", p
    return "inconclusive", p
