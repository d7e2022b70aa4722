import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from frbe_fields.covariance import covariance_limit
from frbe_fields.errors import (
    DomainError,
    LatticeMismatchError,
    PreconditionError,
    SingularityError,
    ToleranceError,
)
from frbe_fields.kernels import KernelSpec
from frbe_fields.simulate import (
    FieldSample,
    FrequencyGrid,
    ScalingParams,
    SimOptions,
    build_loadings,
    draw_many,
    draw_noise,
    ensemble_values,
    limit_kind,
    mc_mean_square_gap,
    mean_square_gap,
    simulate_ensemble,
    simulate_limit_cyclic,
    simulate_limit_origin,
    simulate_prelimit,
    simulate_prelimit_field,
)
from frbe_fields.spectral import ModelParams, example_spectrum

MP = ModelParams(alpha=1.0, beta=0.5, gamma_b=1.0, mu=1.0)
KS = KernelSpec(nu=0.5, a=1.0)
GRID = FrequencyGrid(0.01, 1000, 0.0)
GRID_MID = FrequencyGrid(0.01, 1000, 0.5)


def exact_cov(load):
    """Covariance matrix implied by the loadings (no sampling noise)."""
    n = load.re.shape[0] * load.re.shape[1]
    r = np.concatenate([load.re.reshape(n, -1), load.im.reshape(n, -1)], axis=1)
    return r @ r.T


class TestGrid:
    def test_nodes(self):
        assert GRID.nodes.size == 2001 and GRID.has_zero_node
        assert GRID.half_width == pytest.approx(10.005)
        assert GRID_MID.nodes.size == 2000 and not GRID_MID.has_zero_node
        assert GRID_MID.positive_nodes[0] == pytest.approx(0.005)
        assert GRID_MID.half_width == pytest.approx(10.0)

    def test_cells_tile_half_line(self):
        for g in (GRID, GRID_MID):
            lo, hi = g.cells()
            assert lo[0] == 0.0
            assert np.allclose(lo[1:], hi[:-1])
            assert hi[-1] == pytest.approx(g.half_width)

    @pytest.mark.parametrize("kw", [dict(delta=0), dict(n_modes=0), dict(n_modes=2.5), dict(offset=0.3)])
    def test_invalid(self, kw):
        args = dict(delta=0.01, n_modes=10, offset=0.0) | kw
        with pytest.raises(DomainError):
            FrequencyGrid(**args)

    def test_options_invalid(self):
        for kw in (dict(representation="x"), dict(quadrature="x"), dict(origin_constant="x"),
                   dict(singular_policy="x")):
            with pytest.raises(DomainError):
                SimOptions(**kw)


class TestNoise:
    def test_seed_determinism(self):
        a, b = draw_noise(GRID, 7), draw_noise(GRID, 7)
        assert np.array_equal(a.z_re, b.z_re) and np.array_equal(a.z_im, b.z_im)
        assert not np.array_equal(a.z_re, draw_noise(GRID, 8).z_re)

    def test_prefix_stable_across_grid_sizes(self):
        # node j gets the same normal whatever the number of modes
        small = draw_noise(FrequencyGrid(0.01, 10), 3)
        assert small.z_re.size == 11
        assert np.array_equal(small.z_re, draw_noise(FrequencyGrid(0.01, 10), 3).z_re)

    def test_draw_many_matches_single(self):
        z_re, z_im = draw_many(GRID, [4, 5, 6], threads=2)
        for row, s in enumerate([4, 5, 6]):
            d = draw_noise(GRID, s)
            assert np.array_equal(z_re[row], d.z_re) and np.array_equal(z_im[row], d.z_im)

    def test_mirrored(self):
        d = draw_noise(GRID, 1)
        m = d.mirrored_increments(GRID)
        assert m.size == GRID.nodes.size
        assert np.array_equal(m, m[::-1])
        assert m[1000] == pytest.approx(math.sqrt(2 * GRID.delta) * d.z_re[0])
        m2 = draw_noise(GRID_MID, 1).mirrored_increments(GRID_MID)
        assert m2.size == GRID_MID.nodes.size and np.array_equal(m2, m2[::-1])

    def test_mirrored_sum_reproduces_cosine_field(self):
        sp = example_spectrum("cyclic")
        opts = SimOptions(representation="cosine")
        grid = FrequencyGrid(0.05, 200, 0.0)
        load = build_loadings("limit_cyclic", MP, sp, KS, grid, [1.0], [3.0], opts)
        noise = draw_noise(grid, 11)
        direct = load.apply(noise)[0, 0]
        amp = load.re[0, 0] / np.cos(grid.positive_nodes * 3.0)
        per_node = amp / np.where(grid.positive_nodes == 0, math.sqrt(2 * grid.delta),
                                  2 * math.sqrt(grid.delta))
        full = np.concatenate([per_node[:0:-1], per_node])
        via_mirror = np.sum(np.cos(grid.nodes * 3.0) * full * noise.mirrored_increments(grid))
        assert via_mirror == pytest.approx(direct, rel=1e-12)


class TestLimitFields:
    def test_bit_identical_rerun(self):
        sp = example_spectrum("cyclic")
        a = simulate_limit_cyclic(MP, sp, KS, GRID, draw_noise(GRID, 5), [0.5, 1.0], [0.0, 20.0])
        b = simulate_limit_cyclic(MP, sp, KS, GRID, draw_noise(GRID, 5), [0.5, 1.0], [0.0, 20.0])
        assert np.array_equal(a.values, b.values)
        assert a.provenance.seed == 5 and a.provenance.field_kind == "limit_cyclic"
        assert a.provenance.tail_mass_fraction < 0.01

    def test_point_independent_of_lattice(self):
        sp = example_spectrum("cyclic")
        noise = draw_noise(GRID, 2)
        big = simulate_limit_cyclic(MP, sp, KS, GRID, noise, [0.5, 1.0, 1.5], np.linspace(0, 40, 9))
        one = simulate_limit_cyclic(MP, sp, KS, GRID, noise, [1.0], [20.0])
        assert one.values[0, 0] == pytest.approx(big.values[1, 4], rel=1e-12)

    def test_ensemble_equals_single_draws(self):
        sp = example_spectrum("cyclic")
        load = build_loadings("limit_cyclic", MP, sp, KS, GRID, [1.0], [5.0, 20.0])
        ens = simulate_ensemble(load, [3, 4], threads=2)
        single = simulate_limit_cyclic(MP, sp, KS, GRID, draw_noise(GRID, 4), [1.0], [5.0, 20.0])
        assert np.allclose(ens[1].values, single.values, rtol=1e-12, atol=0)
        assert ens[1].provenance.seed == 4

    def test_case_checks(self):
        with pytest.raises(PreconditionError):
            simulate_limit_cyclic(MP, example_spectrum("origin"), KS, GRID_MID, draw_noise(GRID_MID, 0), [1], [0])
        with pytest.raises(PreconditionError):
            simulate_limit_origin(MP, example_spectrum("cyclic"), KS, GRID, draw_noise(GRID, 0), [1], [0])

    def test_origin_node_rule_needs_offset(self):
        sp = example_spectrum("origin")
        node = SimOptions(quadrature="node")
        with pytest.raises(SingularityError):
            simulate_limit_origin(MP, sp, KS, GRID, draw_noise(GRID, 0), [1.0], [0.0], node)
        ok = simulate_limit_origin(MP, sp, KS, GRID_MID, draw_noise(GRID_MID, 0), [1.0], [0.0], node)
        assert np.isfinite(ok.values).all()
        # the cell rule averages the singular factor, so offset 0 is fine
        cell = simulate_limit_origin(MP, sp, KS, GRID, draw_noise(GRID, 0), [1.0], [0.0])
        assert np.isfinite(cell.values).all()

    def test_negative_time(self):
        with pytest.raises(DomainError):
            build_loadings("limit_cyclic", MP, example_spectrum("cyclic"), KS, GRID, [-1.0], [0.0])

    def test_tail_tolerance(self):
        narrow = FrequencyGrid(0.01, 50, 0.0)
        with pytest.raises(ToleranceError):
            build_loadings("limit_cyclic", MP, example_spectrum("cyclic"), KS, narrow, [0.0], [0.0])

    def test_lattice_mismatch(self):
        sp = example_spectrum("cyclic")
        load = build_loadings("limit_cyclic", MP, sp, KS, GRID, [1.0], [0.0])
        with pytest.raises(LatticeMismatchError):
            load.apply(draw_noise(GRID_MID, 0))
        a = simulate_ensemble(load, [1])[0]
        other = build_loadings("limit_cyclic", MP, sp, KS, GRID, [1.0], [1.0])
        b = simulate_ensemble(other, [2])[0]
        with pytest.raises(LatticeMismatchError):
            ensemble_values([a, b])
        with pytest.raises(PreconditionError):
            ensemble_values([])
        with pytest.raises(LatticeMismatchError):
            FieldSample(a.t_grid, a.x_grid, np.zeros((2, 2)), a.provenance)


class TestCovarianceOfLoadings:
    @pytest.mark.parametrize("case, grid", [("cyclic", GRID), ("origin", GRID_MID)])
    @pytest.mark.parametrize("rep", ["complex", "cosine"])
    def test_matches_quadrature(self, case, grid, rep):
        sp = example_spectrum(case)
        opts = SimOptions(representation=rep)
        load = build_loadings(limit_kind(sp), MP, sp, KS, grid, [0.5, 1.0], [1.0, 20.0], opts)
        cov = exact_cov(load)
        pts = [(t, x) for t in (0.5, 1.0) for x in (1.0, 20.0)]
        # Riemann-sum bias at delta = 0.01: tiny in the cyclic case, under 1% next to the origin singularity
        rel = 5e-3 if case == "cyclic" else 1.2e-2
        for i in range(4):
            for j in range(i, 4):
                q = covariance_limit(MP, sp, KS, *pts[i], *pts[j], representation=rep)
                assert cov[i, j] == pytest.approx(q, rel=rel, abs=1e-4)

    def test_complex_form_is_stationary(self):
        sp = example_spectrum("cyclic")
        load = build_loadings("limit_cyclic", MP, sp, KS, GRID, [1.0], [0.0, 3.0, 10.0, 13.0])
        cov = exact_cov(load)
        assert cov[0, 1] == pytest.approx(cov[2, 3], rel=1e-12)
        assert cov[0, 0] == pytest.approx(cov[3, 3], rel=1e-12)

    @pytest.mark.parametrize("case, grid", [("cyclic", GRID), ("origin", GRID_MID)])
    def test_variance_non_increasing_in_time(self, case, grid):
        sp = example_spectrum(case)
        t = np.linspace(0.0, 3.0, 13)
        load = build_loadings(limit_kind(sp), MP, sp, KS, grid, t, [20.0])
        var = np.diag(exact_cov(load))
        assert np.all(np.diff(var) <= 1e-15)

    def test_origin_constant_choice_scales_by_two(self):
        sp = example_spectrum("origin")
        a = build_loadings("limit_origin", MP, sp, KS, GRID_MID, [1.0], [20.0])
        b = build_loadings("limit_origin", MP, sp, KS, GRID_MID, [1.0], [20.0], SimOptions(origin_constant="literal"))
        assert exact_cov(b)[0, 0] == pytest.approx(2 * exact_cov(a)[0, 0], rel=1e-12)


class TestMonteCarlo:
    @pytest.mark.parametrize("case, grid", [("cyclic", GRID), ("origin", GRID_MID)])
    def test_moments(self, case, grid):
        sp = example_spectrum(case)
        load = build_loadings(limit_kind(sp), MP, sp, KS, grid, [1.0], [1.0, 20.0])
        vals = np.stack([s.values for s in simulate_ensemble(load, range(4000))])[:, 0, :]
        var = np.diag(exact_cov(load))
        m = vals.shape[0]
        for k in range(2):
            assert abs(vals[:, k].mean()) < 4 * math.sqrt(var[k] / m)
            assert vals[:, k].var(ddof=1) == pytest.approx(var[k], abs=4 * var[k] * math.sqrt(2 / m))
            skew, kurt = oracles.sample_moments(vals[:, k])
            assert abs(skew) < 4 * math.sqrt(6 / m) and abs(kurt) < 4 * math.sqrt(24 / m)


class TestPrelimit:
    @pytest.mark.parametrize("case, grid", [("cyclic", GRID), ("origin", GRID_MID)])
    def test_scalar_matches_field(self, case, grid):
        sp = example_spectrum(case)
        sc = ScalingParams.for_model(MP, sp)
        noise = draw_noise(grid, 9)
        f = simulate_prelimit_field(MP, sp, KS, grid, noise, sc, 0.5, [1.0], [3.0, 20.0])
        v = simulate_prelimit(MP, sp, KS, grid, noise, sc, 0.5, 1.0, 20.0)
        assert v == pytest.approx(f.values[0, 1], rel=1e-12)
        assert f.provenance.epsilon == 0.5 and f.provenance.field_kind == "prelimit"

    def test_scaling_params(self):
        sp = example_spectrum("origin")
        sc = ScalingParams.for_model(MP, sp, rho3=2.0)
        assert (sc.rho1, sc.rho2, sc.case) == (pytest.approx(-0.2), pytest.approx(4.0), "origin")
        assert ScalingParams.for_model(MP, example_spectrum("cyclic")).rho1 == -0.5
        with pytest.raises(DomainError):
            ScalingParams(0.0, 0, 0, "cyclic")

    def test_bad_eps_and_case(self):
        sp = example_spectrum("cyclic")
        sc = ScalingParams.for_model(MP, sp)
        for eps in (0.0, 1.5):
            with pytest.raises(DomainError):
                build_loadings("prelimit", MP, sp, KS, GRID, [1.0], [0.0], scaling=sc, eps=eps)
        with pytest.raises(PreconditionError):
            build_loadings("prelimit", MP, sp, KS, GRID, [1.0], [0.0])
        with pytest.raises(PreconditionError):
            build_loadings("prelimit", MP, example_spectrum("origin"), KS, GRID_MID, [1.0], [0.0],
                           scaling=sc, eps=0.5)


class TestGap:
    def test_zero_eps(self):
        sp = example_spectrum("cyclic")
        assert mean_square_gap(MP, sp, KS, GRID, ScalingParams.for_model(MP, sp), 0, 1.0, 20.0) == 0.0

    @pytest.mark.parametrize("case, grid", [("cyclic", GRID), ("origin", GRID_MID)])
    def test_decreasing(self, case, grid):
        sp = example_spectrum(case)
        sc = ScalingParams.for_model(MP, sp)
        r = [mean_square_gap(MP, sp, KS, grid, sc, 2.0**-k, 1.0, 20.0) for k in range(5)]
        assert all(a > b > 0 for a, b in zip(r, r[1:]))

    def test_frozen_values(self):
        sp = example_spectrum("cyclic")
        sc = ScalingParams.for_model(MP, sp)
        assert mean_square_gap(MP, sp, KS, GRID, sc, 1.0, 1.0, 20.0) == pytest.approx(0.05738974, rel=1e-6)

    def test_mc_agrees_on_fine_grid(self):
        sp = example_spectrum("cyclic")
        sc = ScalingParams.for_model(MP, sp)
        fine = FrequencyGrid(0.002, 5000, 0.0)
        q = mean_square_gap(MP, sp, KS, fine, sc, 0.5, 1.0, 20.0)
        mc = mc_mean_square_gap(MP, sp, KS, fine, sc, 0.5, 1.0, 20.0, range(2000))
        # Riemann bias at delta = 0.002 is about 1%, well inside 4 standard errors of 2000 draws
        assert abs(mc.estimate - q) < 4 * mc.std_err

    def test_mc_needs_two_seeds(self):
        sp = example_spectrum("cyclic")
        with pytest.raises(PreconditionError):
            mc_mean_square_gap(MP, sp, KS, GRID, ScalingParams.for_model(MP, sp), 0.5, 1.0, 20.0, [1])

    @given(st.floats(0.05, 1.0), st.floats(0.0, 3.0), st.floats(-30, 30))
    def test_nonnegative(self, eps, t, x):
        sp = example_spectrum("cyclic")
        sc = ScalingParams.for_model(MP, sp)
        assert mean_square_gap(MP, sp, KS, GRID, sc, eps, t, x, tol=1e-8) >= 0
