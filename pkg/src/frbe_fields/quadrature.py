"""Adaptive quadrature helpers for integrands with algebraic singularities."""

from __future__ import annotations

import warnings

import numpy as np

from scipy.integrate import IntegrationWarning, quad


def singular_quad(fn, a: float, b: float, singular: dict[float, float] | None = None,
                  epsabs: float = 1e-13, epsrel: float = 1e-10, limit: int = 400,
                  near=None) -> tuple[float, float]:
    """Integrate ``fn`` over ``[a, b]`` where ``fn ~ |l - s|^(kappa - 1)`` near each ``s``.

    ``singular`` maps singular points inside ``[a, b]`` to their exponent
    ``kappa`` in ``(0, 1)``.  The interval is cut at every singular point and
    each piece touching one is mapped by ``l = s +- v^(1/kappa)``, which turns
    the leading singular term into a constant.

    ``near(s, off)``, if given, evaluates the integrand at ``s + off`` from
    the exact offset.  Without it ``s + v^(1/kappa)`` is rounded to a double,
    which for small ``kappa`` makes the mapped integrand a staircase near
    ``v = 0``; the fallback takes the Jacobian from the rounded distance so the
    value stays right, but the adaptive rule then needs many more points.
    """
    singular = {s: k for s, k in (singular or {}).items() if a <= s <= b}
    edges = sorted({a, b, *singular})
    total = err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for lo, hi in zip(edges, edges[1:]):
            if hi <= lo:
                continue
            k_lo, k_hi = singular.get(lo), singular.get(hi)
            pieces = [(lo, hi)] if not (k_lo and k_hi) else [(lo, (lo + hi) / 2), ((lo + hi) / 2, hi)]
            for p_lo, p_hi in pieces:
                if k_lo is not None and p_lo == lo:
                    v, e = _mapped(fn, near, p_lo, p_hi - p_lo, 1.0 / k_lo, +1, epsabs, epsrel, limit)
                elif k_hi is not None and p_hi == hi:
                    v, e = _mapped(fn, near, p_hi, p_hi - p_lo, 1.0 / k_hi, -1, epsabs, epsrel, limit)
                else:
                    v, e = quad(fn, p_lo, p_hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
                total += v
                err += e
    return total, err


def _mapped(fn, near, s, length, p, sign, epsabs, epsrel, limit):
    ulp = float(np.spacing(abs(s))) if s else 0.0
    tiny = 1e-300 ** (1.0 / p)  # smallest v whose power is still positive

    def exact(v):
        v = max(v, tiny)
        return near(s, sign * v**p) * p * v ** (p - 1)

    def g(v):
        if v == 0.0:
            v = ulp ** (1.0 / p) if ulp else 1e-300
        lam = s + sign * v**p
        # take the Jacobian from the distance actually represented, otherwise
        # rounding of lam - s turns the constant leading term into noise
        d = abs(lam - s)
        if d == 0.0:
            d = ulp
            lam = s + sign * d
        return fn(lam) * p * d ** ((p - 1) / p)

    f = exact if near is not None and s != 0 else g
    return quad(f, 0.0, length ** (1.0 / p), epsabs=epsabs, epsrel=epsrel, limit=limit)
