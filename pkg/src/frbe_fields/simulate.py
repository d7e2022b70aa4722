"""Spectral (Riemann-sum) simulation of the limit and pre-limit fields.

Every field value is a linear functional of one noise draw, so the
simulators first build *loadings* ``L`` over the non-negative frequency
nodes and then apply them: ``U = L_re @ z_re + L_im @ z_im``.  Building the
loadings once and reusing them across seeds is what keeps large Monte Carlo
ensembles cheap.

Two representations are available:

``complex`` (default)
    ``U = sum_j e^{i l_j x} h_hat(l_j) E_j s_j W_j`` with Hermitian noise
    ``W_{-j} = conj(W_j)``.  Real by construction and its covariance is the
    stationary one, ``int cos(l (x - x')) ...``.
``cosine``
    ``U = sum_j cos(l_j x) h_hat(l_j) E_j s_j W_j`` with real mirrored noise
    ``W_{-j} = W_j``.  Its covariance is the stationary one evaluated at
    ``x - x'`` plus the same function at ``x + x'``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import (
    DomainError,
    LatticeMismatchError,
    PreconditionError,
    SingularityError,
    ToleranceError,
)
from .kernels import KernelSpec, kernel_transform
from .quadrature import singular_quad
from .spectral import (
    ModelParams,
    SpectralSpec,
    density_offset,
    field_constant,
    green_ft,
    singular_exponents,
    spectral_density,
)

FIELD_KINDS = ("limit_cyclic", "limit_origin", "prelimit")
_CHUNK = 500  # seeds per block in Monte Carlo loops


@dataclass(frozen=True)
class SimOptions:
    """Numerical choices shared by the simulators and the gap quadrature.

    ``quadrature="cell"`` replaces the point value of a singular spectral
    factor by its average over the node's cell, which keeps the Riemann sum
    unbiased next to integrable singularities; ``"node"`` evaluates at the
    node itself.
    """

    representation: str = "complex"
    quadrature: str = "cell"
    origin_constant: str = "density"
    singular_policy: str = "strict"
    tail_tolerance: float = 0.01

    def __post_init__(self):
        if self.representation not in ("complex", "cosine"):
            raise DomainError(f"representation must be complex|cosine, got {self.representation!r}")
        if self.quadrature not in ("cell", "node"):
            raise DomainError(f"quadrature must be cell|node, got {self.quadrature!r}")
        if self.origin_constant not in ("density", "literal"):
            raise DomainError(f"origin_constant must be density|literal, got {self.origin_constant!r}")
        if self.singular_policy not in ("strict", "zero"):
            raise DomainError(f"singular_policy must be strict|zero, got {self.singular_policy!r}")


@dataclass(frozen=True)
class FrequencyGrid:
    delta: float
    n_modes: int
    offset: float = 0.0

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"delta must be > 0, got {self.delta}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise DomainError(f"n_modes must be a positive integer, got {self.n_modes}")
        if self.offset not in (0, 0.5):
            raise DomainError(f"offset must be 0 or 0.5, got {self.offset}")
        object.__setattr__(self, "n_modes", int(self.n_modes))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def positive_nodes(self) -> np.ndarray:
        """Non-negative nodes, the ones that carry independent noise."""
        if self.offset == 0:
            return np.arange(self.n_modes + 1) * self.delta
        return (np.arange(self.n_modes) + 0.5) * self.delta

    @property
    def nodes(self) -> np.ndarray:
        pos = self.positive_nodes
        if self.offset == 0:
            return np.concatenate([-pos[:0:-1], pos])
        return np.concatenate([-pos[::-1], pos])

    @property
    def has_zero_node(self) -> bool:
        return self.offset == 0

    @property
    def half_width(self) -> float:
        """Right end of the last cell; the grid integrates over ``[-L, L]``."""
        return (self.n_modes + 0.5) * self.delta if self.offset == 0 else self.n_modes * self.delta

    def cells(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell ``[lo, hi]`` of each non-negative node (the zero node keeps its right half)."""
        pos = self.positive_nodes
        lo = np.maximum(pos - self.delta / 2, 0.0)
        return lo, pos + self.delta / 2

    def describe(self) -> dict:
        return {
            "delta": self.delta,
            "n_modes": self.n_modes,
            "offset": self.offset,
            "coverage": [-self.half_width, self.half_width],
            "n_nodes": int(self.nodes.size),
        }


def make_grid(delta: float, n_modes: int, offset: float = 0.0) -> FrequencyGrid:
    return FrequencyGrid(delta, n_modes, offset)


@dataclass(frozen=True, eq=False)
class NoiseDraw:
    """Unit normals attached to the non-negative nodes.

    ``z_re`` then ``z_im`` are drawn from a PCG64 stream seeded with ``seed``,
    so a given seed maps to the same increments whatever lattice is used.
    """

    seed: int
    delta: float
    z_re: np.ndarray
    z_im: np.ndarray

    @property
    def increments(self) -> np.ndarray:
        """Real ``N(0, delta)`` increments, one per non-negative node."""
        return math.sqrt(self.delta) * self.z_re

    def mirrored_increments(self, grid: FrequencyGrid) -> np.ndarray:
        """Increments over all nodes of ``grid`` with ``W(-l) = W(l)``.

        The zero cell's halves are mirror images, so its increment is doubled
        half-cell noise with variance ``2 delta``.
        """
        inc = self.increments
        if grid.has_zero_node:
            zero = math.sqrt(2.0) * inc[:1]
            return np.concatenate([inc[:0:-1], zero, inc[1:]])
        return np.concatenate([inc[::-1], inc])


def draw_noise(grid: FrequencyGrid, seed: int) -> NoiseDraw:
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    m = grid.positive_nodes.size
    z_re = rng.standard_normal(m)
    z_im = rng.standard_normal(m)
    return NoiseDraw(int(seed), grid.delta, z_re, z_im)


@dataclass(frozen=True)
class ScalingParams:
    rho3: float
    rho1: float
    rho2: float
    case: str

    def __post_init__(self):
        if not self.rho3 > 0:
            raise DomainError(f"rho3 must be > 0, got {self.rho3}")
        if self.case not in ("cyclic", "origin"):
            raise DomainError(f"case must be cyclic|origin, got {self.case!r}")

    @classmethod
    def for_model(cls, mp: ModelParams, sp: SpectralSpec, rho3: float = 1.0) -> "ScalingParams":
        case = sp.case
        rho1 = -rho3 / 2 if case == "cyclic" else -sp.kappa0 * rho3 / 2
        return cls(rho3, rho1, mp.alpha * rho3 / mp.beta, case)


@dataclass(frozen=True, eq=False)
class Provenance:
    model: ModelParams
    spectrum: SpectralSpec
    kernel: KernelSpec
    grid: FrequencyGrid
    seed: int | None
    field_kind: str
    epsilon: float | None = None
    rho3: float | None = None
    options: SimOptions = field(default_factory=SimOptions)
    tail_mass_fraction: float = 0.0

    def lattice_key(self) -> tuple:
        """Everything except the seed; samples of one ensemble must agree on it."""
        return (self.model, self.spectrum, self.kernel.describe(), self.grid, self.field_kind,
                self.epsilon, self.rho3, self.options)

    def to_dict(self) -> dict:
        return {
            "model": asdict(self.model),
            "spectrum": asdict(self.spectrum),
            "kernel": self.kernel.describe(),
            "grid": self.grid.describe(),
            "seed": self.seed,
            "field_kind": self.field_kind,
            "epsilon": self.epsilon,
            "rho3": self.rho3,
            "options": asdict(self.options),
            "tail_mass_fraction": self.tail_mass_fraction,
        }


@dataclass(frozen=True, eq=False)
class FieldSample:
    t_grid: np.ndarray
    x_grid: np.ndarray
    values: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        if self.values.shape != (len(self.t_grid), len(self.x_grid)):
            raise LatticeMismatchError("values shape does not match the lattice")
        if not np.all(np.isfinite(self.values)):
            raise ToleranceError("field values are not finite")


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_err: float


@dataclass(frozen=True, eq=False)
class Loadings:
    """Linear map from unit noise to field values on a lattice."""

    re: np.ndarray  # (n_t, n_x, n_nodes)
    im: np.ndarray
    t_grid: np.ndarray
    x_grid: np.ndarray
    provenance: Provenance

    def apply(self, noise: NoiseDraw) -> np.ndarray:
        if noise.z_re.size != self.re.shape[-1]:
            raise LatticeMismatchError("noise draw does not match the frequency grid")
        return self.re @ noise.z_re + self.im @ noise.z_im

    def apply_many(self, z_re: np.ndarray, z_im: np.ndarray) -> np.ndarray:
        """Values for a stack of draws, shape ``(M, n_t, n_x)``."""
        nt, nx, m = self.re.shape
        out = z_re @ self.re.reshape(nt * nx, m).T + z_im @ self.im.reshape(nt * nx, m).T
        return out.reshape(-1, nt, nx)


# -- spectral weights -----------------------------------------------------------

def _check_case(kind: str, sp: SpectralSpec) -> None:
    if kind == "limit_cyclic" and sp.A0 != 0:
        raise PreconditionError("the cyclic limit field needs A0 = 0")
    if kind == "limit_origin" and sp.A0 == 0:
        raise PreconditionError("the origin limit field needs A0 > 0")


def _check_scaling(sp: SpectralSpec, scaling: ScalingParams, eps: float) -> None:
    if scaling.case != sp.case:
        raise PreconditionError(f"scaling case {scaling.case!r} does not match spectrum case {sp.case!r}")
    if not 0 < eps <= 1:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")


def _prelimit_norm(sp: SpectralSpec, scaling: ScalingParams, eps: float) -> float:
    if sp.case == "cyclic":
        return 1.0
    return eps ** (-scaling.rho3 * (sp.kappa0 - 1))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def density_integrals(sp: SpectralSpec, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """``int_lo^hi f_xi(u) du`` for each non-negative interval.

    Intervals at or next to a singular frequency go to :func:`singular_quad`;
    the rest use 16-point Gauss-Legendre.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    width = hi - lo
    sing = np.array(sp.singular_points())
    near = np.zeros(lo.shape, dtype=bool)
    for s in sing:
        near |= (lo - width <= s) & (s <= hi + width)
    out = np.empty_like(lo)
    reg = ~near
    if reg.any():
        mid, half = (lo[reg] + hi[reg]) / 2, width[reg] / 2
        pts = mid[:, None] + half[:, None] * _GL_X[None, :]
        out[reg] = half * (spectral_density(sp, pts) @ _GL_W)
    expo = singular_exponents(sp)
    for i in np.flatnonzero(near):
        out[i] = singular_quad(lambda u: spectral_density(sp, u), lo[i], hi[i], expo,
                               epsabs=1e-15, epsrel=1e-11,
                               near=lambda s, off: density_offset(sp, s, off))[0]
    return out


def _weights_limit(kind: str, sp: SpectralSpec, grid: FrequencyGrid, opts: SimOptions) -> np.ndarray:
    pos = grid.positive_nodes
    if kind == "limit_cyclic":
        return np.ones_like(pos)
    k0 = sp.kappa0
    if opts.quadrature == "cell":
        lo, hi = grid.cells()
        avg = (hi**k0 - lo**k0) / (k0 * (hi - lo))
        return np.sqrt(avg)
    s = np.zeros_like(pos)
    nz = pos > 0
    if not nz.all() and opts.singular_policy == "strict":
        raise SingularityError("frequency node at 0 where |l|^(kappa0-1) is infinite; use offset 0.5")
    s[nz] = pos[nz] ** ((k0 - 1) / 2)
    return s


def _weights_prelimit(sp: SpectralSpec, grid: FrequencyGrid, opts: SimOptions,
                      scaling: ScalingParams, eps: float) -> np.ndarray:
    e = eps**scaling.rho3
    norm = _prelimit_norm(sp, scaling, eps)
    if opts.quadrature == "cell":
        lo, hi = grid.cells()
        avg = density_integrals(sp, e * lo, e * hi) / (e * (hi - lo))
        return np.sqrt(norm * avg)
    f = np.asarray(spectral_density(sp, e * grid.positive_nodes))
    bad = ~np.isfinite(f)
    if bad.any():
        if opts.singular_policy == "strict":
            raise SingularityError("a scaled node hits a spectral singularity; perturb the grid")
        f = np.where(bad, 0.0, f)
    return np.sqrt(norm * f)


# -- pointwise spectral factors (for quadrature) --------------------------------

def _limit_sigma(kind: str, sp: SpectralSpec, lam):
    lam = np.abs(np.asarray(lam, dtype=float))
    if kind == "limit_cyclic":
        return np.ones_like(lam)
    with np.errstate(divide="ignore"):
        return lam ** ((sp.kappa0 - 1) / 2)


def _scaled_singularities(sp: SpectralSpec, e: float, upto: float, point):
    """Singular points of ``l -> f_xi(e l)`` below ``upto`` and the matching exact-offset evaluator.

    ``point(l, density)`` is the integrand given the density value at ``e l``.
    """
    back = {s / e: s for s in singular_exponents(sp)}
    sing = {s / e: k for s, k in singular_exponents(sp).items() if s / e < upto}

    def near(s, off):
        return point(s + off, density_offset(sp, back[s], e * off))

    return sing, near


def _tail_fraction(kind, mp, sp, ks, grid, t, opts, scaling=None, eps=None) -> float:
    """Share of the spectral variance at time ``t`` lying outside the grid."""
    def point(l, weight):
        return float(kernel_transform(ks, l) ** 2 * green_ft(mp, t, l) ** 2 * weight)

    if kind == "prelimit":
        e = eps**scaling.rho3
        norm = _prelimit_norm(sp, scaling, eps)
        integrand = lambda l: point(l, norm * spectral_density(sp, e * l))  # noqa: E731
        sing, near = _scaled_singularities(sp, e, np.inf, lambda l, d: point(l, norm * d))
    else:
        integrand = lambda l: point(l, _limit_sigma(kind, sp, l) ** 2)  # noqa: E731
        sing = {0.0: sp.kappa0} if kind == "limit_origin" else {}
        near = None

    L = grid.half_width
    inside = singular_quad(integrand, 0.0, L, sing, epsrel=1e-8, near=near)[0]
    edges = [L] + sorted(s for s in sing if s > L)
    tail = sum(singular_quad(integrand, a, b, sing, epsrel=1e-8, near=near)[0] for a, b in zip(edges, edges[1:]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        tail += quad(integrand, edges[-1], np.inf, limit=200)[0]
    total = inside + tail
    return 0.0 if total == 0 else tail / total


# -- loadings -------------------------------------------------------------------

def _amplitudes(kind, mp, sp, ks, grid, t_grid, opts, scaling=None, eps=None) -> np.ndarray:
    pos = grid.positive_nodes
    h = np.asarray(kernel_transform(ks, pos), dtype=float)
    if kind == "prelimit":
        s = _weights_prelimit(sp, grid, opts, scaling, eps)
        c = 1.0
        bessel = eps ** (2 * scaling.rho3)
    else:
        s = _weights_limit(kind, sp, grid, opts)
        c = field_constant(sp, "cyclic" if kind == "limit_cyclic" else "origin", opts.origin_constant)
        bessel = 0.0
    E = np.stack([np.atleast_1d(green_ft(mp, float(t), pos, eps_scale=bessel)) for t in t_grid])
    return math.sqrt(c) * E * (h * s)[None, :]


def build_loadings(kind: str, mp: ModelParams, sp: SpectralSpec, ks: KernelSpec, grid: FrequencyGrid,
                   t_grid, x_grid, options: SimOptions | None = None,
                   scaling: ScalingParams | None = None, eps: float | None = None,
                   check_tail: bool = True) -> Loadings:
    """Loadings of ``kind`` (``limit_cyclic``, ``limit_origin`` or ``prelimit``) on a lattice."""
    opts = options or SimOptions()
    if kind not in FIELD_KINDS:
        raise DomainError(f"unknown field kind {kind!r}")
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if np.any(t_grid < 0):
        raise DomainError("times must be >= 0")
    if kind == "prelimit":
        if scaling is None or eps is None:
            raise PreconditionError("prelimit loadings need scaling and eps")
        _check_scaling(sp, scaling, eps)
    else:
        _check_case(kind, sp)
    amp = _amplitudes(kind, mp, sp, ks, grid, t_grid, opts, scaling, eps)
    pos = grid.positive_nodes
    mult = np.full(pos.size, 2.0)
    if opts.representation == "complex":
        scale = np.full(pos.size, math.sqrt(grid.delta / 2))
        if grid.has_zero_node:
            mult[0], scale[0] = 1.0, math.sqrt(grid.delta)
    else:
        scale = np.full(pos.size, math.sqrt(grid.delta))
        if grid.has_zero_node:
            # mirrored noise ties the two halves of the zero cell together: variance 2 delta
            mult[0], scale[0] = 1.0, math.sqrt(2 * grid.delta)
    phase = pos[None, :] * x_grid[:, None]
    coef = (amp * mult * scale)[:, None, :]
    re = coef * np.cos(phase)[None, :, :]
    if opts.representation == "complex":
        im = -coef * np.sin(phase)[None, :, :]
        if grid.has_zero_node:
            im[..., 0] = 0.0
    else:
        im = np.zeros_like(re)
    tail = 0.0
    if check_tail:
        tail = _tail_fraction(kind, mp, sp, ks, grid, float(t_grid.min()), opts, scaling, eps)
        if tail > opts.tail_tolerance:
            raise ToleranceError(
                f"{100 * tail:.2f}% of the spectral variance lies outside the grid "
                f"(limit {100 * opts.tail_tolerance:.2f}%); widen n_modes * delta")
    prov = Provenance(mp, sp, ks, grid, None, kind, eps, scaling.rho3 if scaling else None, opts, tail)
    return Loadings(re, im, t_grid, x_grid, prov)


def _sample(load: Loadings, noise: NoiseDraw) -> FieldSample:
    return FieldSample(load.t_grid, load.x_grid, load.apply(noise), replace(load.provenance, seed=noise.seed))


def simulate_limit_cyclic(mp, sp, ks, grid, noise, t_grid, x_grid, options=None) -> FieldSample:
    """Realisation of the cyclic-case limit field on the ``t_grid x x_grid`` lattice."""
    load = build_loadings("limit_cyclic", mp, sp, ks, grid, t_grid, x_grid, options)
    return _sample(load, noise)


def simulate_limit_origin(mp, sp, ks, grid, noise, t_grid, x_grid, options=None) -> FieldSample:
    """Realisation of the origin-case limit field (extra factor ``|l|^((kappa0-1)/2)``)."""
    load = build_loadings("limit_origin", mp, sp, ks, grid, t_grid, x_grid, options)
    return _sample(load, noise)


def simulate_prelimit_field(mp, sp, ks, grid, noise, scaling, eps, t_grid, x_grid, options=None) -> FieldSample:
    load = build_loadings("prelimit", mp, sp, ks, grid, t_grid, x_grid, options, scaling, eps)
    return _sample(load, noise)


def simulate_prelimit(mp, sp, ks, grid, noise, scaling, eps, t, x, options=None) -> float:
    """Rescaled pre-limit field ``U_eps(t, x)`` at one point."""
    return float(simulate_prelimit_field(mp, sp, ks, grid, noise, scaling, eps, [t], [x], options).values[0, 0])


def limit_kind(sp: SpectralSpec) -> str:
    return "limit_cyclic" if sp.case == "cyclic" else "limit_origin"


def draw_many(grid: FrequencyGrid, seeds, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Stacked unit normals for a list of seeds, shape ``(M, n_nodes)`` each."""
    seeds = [int(s) for s in seeds]

    def one(s):
        d = draw_noise(grid, s)
        return d.z_re, d.z_im

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            draws = list(ex.map(one, seeds))
    else:
        draws = [one(s) for s in seeds]
    if not draws:
        m = grid.positive_nodes.size
        return np.empty((0, m)), np.empty((0, m))
    return np.stack([d[0] for d in draws]), np.stack([d[1] for d in draws])


def simulate_ensemble(load: Loadings, seeds, threads: int = 1) -> list[FieldSample]:
    """One :class:`FieldSample` per seed; seed ``s`` gives the same field as ``draw_noise(grid, s)``."""
    seeds = [int(s) for s in seeds]
    z_re, z_im = draw_many(load.provenance.grid, seeds, threads)
    vals = load.apply_many(z_re, z_im)
    return [FieldSample(load.t_grid, load.x_grid, v, replace(load.provenance, seed=s))
            for s, v in zip(seeds, vals)]


def ensemble_values(ens) -> np.ndarray:
    """Stack an ensemble into ``(M, n_t, n_x)`` after checking the lattices agree."""
    if not ens:
        raise PreconditionError("empty ensemble")
    first = ens[0]
    key = first.provenance.lattice_key()
    for s in ens[1:]:
        if (s.values.shape != first.values.shape or not np.array_equal(s.t_grid, first.t_grid)
                or not np.array_equal(s.x_grid, first.x_grid) or s.provenance.lattice_key() != key):
            raise LatticeMismatchError("ensemble members differ in lattice or provenance")
    return np.stack([s.values for s in ens])


# -- mean-square gap ------------------------------------------------------------

def mean_square_gap(mp: ModelParams, sp: SpectralSpec, ks: KernelSpec, grid: FrequencyGrid,
                    scaling: ScalingParams, eps: float, t: float, x: float,
                    options: SimOptions | None = None, tol: float = 1e-10) -> float:
    """``E (U_eps(t,x) - U_0(t,x))^2`` by deterministic quadrature over the grid's band.

    The integral runs over ``[-L, L]`` with ``L = grid.half_width`` so that it is
    the exact expectation that a shared-noise Monte Carlo on ``grid`` estimates
    (up to the Riemann-sum error).
    """
    opts = options or SimOptions()
    if eps == 0:
        return 0.0
    _check_scaling(sp, scaling, eps)
    kind = limit_kind(sp)
    e = eps**scaling.rho3
    norm = _prelimit_norm(sp, scaling, eps)
    c = field_constant(sp, sp.case, opts.origin_constant)
    bessel = eps ** (2 * scaling.rho3)

    def point(lam, dens):
        h2 = kernel_transform(ks, lam) ** 2
        if opts.representation == "cosine":
            h2 = h2 * 2 * math.cos(lam * x) ** 2
        pre = green_ft(mp, t, lam, eps_scale=bessel) * math.sqrt(norm * dens)
        lim = math.sqrt(c) * green_ft(mp, t, lam) * float(_limit_sigma(kind, sp, lam))
        return h2 * (pre - lim) ** 2

    L = grid.half_width
    sing, near = _scaled_singularities(sp, e, L, point)
    total, err = singular_quad(lambda lam: point(lam, spectral_density(sp, e * lam)), 0.0, L, sing,
                               epsabs=1e-3 * tol, near=near)
    if err > max(tol, 1e-7 * total):
        raise ToleranceError(f"mean-square gap quadrature error {err:.2e} exceeds tolerance")
    return 2.0 * total


def gap_loadings(mp, sp, ks, grid, scaling, eps, t, x, options=None) -> Loadings:
    """Loadings of ``U_eps - U_0`` at one point for the shared-noise comparison."""
    opts = options or SimOptions()
    pre = build_loadings("prelimit", mp, sp, ks, grid, [t], [x], opts, scaling, eps, check_tail=False)
    lim = build_loadings(limit_kind(sp), mp, sp, ks, grid, [t], [x], opts, check_tail=False)
    return Loadings(pre.re - lim.re, pre.im - lim.im, pre.t_grid, pre.x_grid, pre.provenance)


def mc_mean_square_gap(mp, sp, ks, grid, scaling, eps, t, x, seeds, options=None,
                       threads: int = 1) -> MCEstimate:
    """Shared-noise Monte Carlo estimate of the mean-square gap with its standard error."""
    seeds = list(seeds)
    if len(seeds) < 2:
        raise PreconditionError("need at least two seeds")
    diff = gap_loadings(mp, sp, ks, grid, scaling, eps, t, x, options)
    sq = np.concatenate([
        diff.apply_many(*draw_many(grid, seeds[i:i + _CHUNK], threads))[:, 0, 0] ** 2
        for i in range(0, len(seeds), _CHUNK)
    ])
    return MCEstimate(float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(sq.size)))
