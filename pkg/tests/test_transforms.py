import math

import numpy as np
import pytest
from scipy.integrate import quad

from stiefel_xform.errors import AdmissibilityError, DimensionError, PoleError
from stiefel_xform.fields import (
    averaged_over_right,
    canonical_frame,
    constant,
    coordinate_square,
    make_field,
    minor_power,
    trace_quadratic,
)
from stiefel_xform.linalg import frame_completion, orth_complement_frame
from stiefel_xform.manifold import MCConfig, RandomSource, estimate, fiber_batch, sample_stiefel
from stiefel_xform.special import ConstantKind, ConstantSpec, paper_constant, scalar_mass_ratio
from stiefel_xform.transforms import (
    TransformKind,
    comp_radon,
    composite_cosine,
    cosine,
    dual_cosine,
    dual_cosine_of_funk,
    dual_funk,
    dual_sine,
    evaluate,
    funk,
    m_transform,
    normalized,
    q_transform,
    sine,
)


def cfg(samples=40_000, seed=101, **kw):
    return MCConfig(samples=samples, seed=seed, **kw)


def zscore(est, target, se_extra=0.0):
    se = math.hypot(est.se, se_extra)
    return abs(est.mean - target) / se if se else float("inf")


def axis(n, i):
    e = np.zeros((n, 1))
    e[i, 0] = 1.0
    return e


class TestFunk:
    def test_unit_field_exact(self):
        f = constant(4, 1)
        est = funk(f, sample_stiefel(4, 2, RandomSource(1, 0)), cfg(samples=1000))
        assert est.mean == 1.0 and est.se == 0.0

    def test_two_point_fiber_vanishes(self):
        f = coordinate_square(2, 1, i=0, j=0)
        est = funk(f, axis(2, 0), cfg(samples=1000))
        assert est.mean == 0.0

    def test_equatorial_average(self):
        # f = v1^2 averaged over the circle orthogonal to e3: quadrature gives 1/2
        oracle = quad(lambda t: np.cos(t) ** 2, 0, 2 * np.pi)[0] / (2 * np.pi)
        f = coordinate_square(3, 1, i=0, j=0)
        est = funk(f, axis(3, 2), cfg())
        assert zscore(est, oracle) <= 4.0

    def test_dimension_guard(self):
        f = constant(4, 3)
        with pytest.raises(DimensionError):
            funk(f, sample_stiefel(4, 2, RandomSource(1, 0)), cfg(samples=1000))


class TestDualFunk:
    def test_unit_field_exact(self):
        phi = constant(5, 2)
        est = dual_funk(phi, sample_stiefel(5, 1, RandomSource(2, 0)), cfg(samples=1000))
        assert est.mean == 1.0 and est.se == 0.0

    def test_equatorial_zero(self):
        phi = coordinate_square(3, 1, i=2, j=0)
        est = dual_funk(phi, axis(3, 2), cfg(samples=1000))
        assert est.mean == 0.0

    def test_minor_power_closed_form(self):
        n, m, k, alpha = 5, 2, 2, 3.0
        w0 = canonical_frame(n, m)
        phi = minor_power(n, k, p=(alpha - k) / 2.0, w=w0)
        v = sample_stiefel(n, m, RandomSource(7, 0)).mat
        est = dual_funk(phi, v, cfg(samples=60_000))
        c = paper_constant(ConstantSpec(ConstantKind.c_alpha_kja, n=n, m=m, k=k, alpha=alpha))
        target = c * np.linalg.det(np.eye(m) - w0.T @ v @ v.T @ w0) ** ((alpha - k) / 2.0)
        assert zscore(est, target) <= 4.0


class TestCosine:
    def test_flat_kernel_matches_plain_mean(self):
        f = trace_quadratic(4, 1, seed=2)
        u = sample_stiefel(4, 2, RandomSource(3, 0))
        c = cfg(samples=5000)
        flat = cosine(f, u, alpha=2.0, cfg=c)  # alpha = k: kernel is identically one

        def sampler(rng, size):
            from stiefel_xform.manifold import haar_stiefel_batch
            return haar_stiefel_batch(4, 1, rng, size)

        plain = estimate(f.eval_batch, sampler, c)
        assert flat.mean == plain.mean

    def test_sphere_mass(self):
        est = cosine(constant(3, 1), axis(3, 0), alpha=2.0, cfg=cfg(samples=100_000))
        assert zscore(est, 0.5) <= 4.0

    def test_rank_two_mass(self):
        u = canonical_frame(4, 2)
        est = cosine(constant(4, 2), u, alpha=3.0, cfg=cfg(samples=100_000))
        assert zscore(est, 1.0 / 3.0) <= 4.0

    def test_rank_guard(self):
        with pytest.raises(DimensionError):
            cosine(constant(4, 2), axis(4, 0), alpha=3.0, cfg=cfg(samples=1000))

    def test_convergence_guard_and_override(self):
        f = constant(3, 1)
        with pytest.raises(AdmissibilityError):
            cosine(f, axis(3, 0), alpha=0.0, cfg=cfg(samples=1000))
        est = cosine(f, axis(3, 0), alpha=0.5, cfg=cfg(samples=1000), unsafe=False)
        assert np.isfinite(est.mean)


class TestSine:
    def test_flat_kernel(self):
        f = trace_quadratic(5, 1, seed=4)
        u = sample_stiefel(5, 2, RandomSource(5, 0))
        est = sine(f, u, alpha=3.0, cfg=cfg(samples=5000))  # alpha = n-k: flat
        assert np.isfinite(est.mean)

    def test_mass_trivial_combination(self):
        # at alpha = 2, k = 2, n = 4 the kernel exponent vanishes and the
        # mass constant equals one
        u = sample_stiefel(4, 2, RandomSource(6, 0))
        est = sine(constant(4, 1), u, alpha=2.0, cfg=cfg(samples=2000))
        c2 = paper_constant(ConstantSpec(ConstantKind.c2_mass_sin, n=4, m=1, k=2, alpha=2.0))
        assert c2 == pytest.approx(1.0)
        assert est.mean == pytest.approx(1.0)

    def test_complement_route_agrees(self):
        f = trace_quadratic(5, 1, seed=8)
        u = sample_stiefel(5, 2, RandomSource(9, 0))
        direct = sine(f, u, alpha=2.0, cfg=cfg(samples=80_000, seed=11))
        routed = sine(f, u, alpha=2.0, cfg=cfg(samples=80_000, seed=12), via_complement=True)
        assert abs(direct.mean - routed.mean) <= 5.0 * math.hypot(direct.se, routed.se)

    def test_rank_guard(self):
        with pytest.raises(DimensionError):
            sine(constant(4, 2), canonical_frame(4, 3), alpha=3.0, cfg=cfg(samples=1000))


class TestEqualRankAliases:
    def test_q_flat_kernel(self):
        f = trace_quadratic(4, 1, seed=3)
        u = axis(4, 1)
        est = q_transform(f, u, alpha=3.0, cfg=cfg(samples=5000))  # alpha = n-m
        assert np.isfinite(est.mean)

    def test_m_transform_sphere(self):
        est = m_transform(constant(3, 1), axis(3, 0), alpha=2.0, cfg=cfg(samples=100_000))
        assert zscore(est, 0.5) <= 4.0

    def test_q_transform_inverse_sine_moment(self):
        # mean over the 3-sphere of (1 - (u.v)^2)^{-1/2}: quadrature oracle 4/pi
        num = quad(lambda t: np.sin(t), 0, np.pi)[0]
        den = quad(lambda t: np.sin(t) ** 2, 0, np.pi)[0]
        oracle = num / den
        est = q_transform(constant(4, 1), axis(4, 0), alpha=2.0, cfg=cfg(samples=100_000))
        assert oracle == pytest.approx(4.0 / math.pi, rel=1e-10)
        assert zscore(est, oracle) <= 4.0

    def test_q_dimension_guard(self):
        with pytest.raises(AdmissibilityError):
            q_transform(constant(3, 2), canonical_frame(3, 2), alpha=2.0, cfg=cfg(samples=1000))


class TestCompositeCosine:
    def test_zero_exponent(self):
        phi = trace_quadratic(4, 2, seed=5)
        v = sample_stiefel(4, 2, RandomSource(13, 0))
        c = cfg(samples=5000)
        est = composite_cosine(phi, v, np.zeros(2), c)

        def sampler(rng, size):
            from stiefel_xform.manifold import haar_stiefel_batch
            return haar_stiefel_batch(4, 2, rng, size)

        plain = estimate(phi.eval_batch, sampler, c)
        assert est.mean == plain.mean

    def test_diagonal_exponent_matches_mass(self):
        n, m, k, alpha = 4, 1, 2, 3.0
        v = sample_stiefel(n, m, RandomSource(14, 0))
        est = composite_cosine(constant(n, k), v, np.full(m, alpha - k), cfg(samples=80_000))
        want = scalar_mass_ratio(n, m, k, alpha - k)
        assert zscore(est, want) <= 4.0

    def test_vector_exponent_gamma_ratio(self):
        from stiefel_xform.special import composite_mass_ratio
        n, m, k = 4, 2, 3
        lam = np.array([1.5, 0.5])
        v = sample_stiefel(n, m, RandomSource(15, 0))
        est = composite_cosine(constant(n, k), v, lam, cfg(samples=80_000))
        want = composite_mass_ratio(n, m, k, lam)
        assert zscore(est, want) <= 4.0

    def test_convergence_guard(self):
        v = sample_stiefel(4, 2, RandomSource(16, 0))
        with pytest.raises(AdmissibilityError):
            composite_cosine(constant(4, 3), v, np.array([0.0, -4.0]), cfg(samples=1000))


class TestCompRadon:
    def test_equal_rank_is_identity(self):
        phi = trace_quadratic(5, 2, seed=6)
        v = sample_stiefel(5, 2, RandomSource(17, 0))
        est = comp_radon(phi, v, cfg(samples=1000))
        assert est.mean == pytest.approx(float(phi(v)), rel=1e-12)
        assert est.se == 0.0

    def test_unit_field(self):
        phi = constant(5, 2)
        v = sample_stiefel(5, 1, RandomSource(18, 0))
        est = comp_radon(phi, v, cfg(samples=1000))
        assert est.mean == 1.0 and est.se == 0.0

    def test_dimension_guard(self):
        with pytest.raises(DimensionError):
            comp_radon(constant(5, 1), sample_stiefel(5, 2, RandomSource(19, 0)), cfg(samples=1000))


class TestNormalized:
    def test_excluded_alpha(self):
        with pytest.raises(PoleError):
            normalized(TransformKind.Mcos, constant(3, 1), axis(3, 0), alpha=2.0, cfg=cfg(samples=1000))

    def test_scaling_matches_raw(self):
        f = constant(4, 1)
        u = axis(4, 0)
        c = cfg(samples=5000)
        coeff = paper_constant(ConstantSpec(ConstantKind.d_nm, n=4, m=1, alpha=1.0))
        raw = q_transform(f, u, alpha=1.0, cfg=c)
        norm = normalized(TransformKind.Qsin, f, u, alpha=1.0, cfg=c)
        assert norm.mean == pytest.approx(coeff * raw.mean, rel=1e-12)
        assert norm.se == pytest.approx(abs(coeff) * raw.se, rel=1e-12)
        assert np.isfinite(norm.mean)

    def test_no_normalization_for_fiber_average(self):
        with pytest.raises(AdmissibilityError):
            normalized(TransformKind.Funk, constant(4, 1), axis(4, 0), alpha=1.0, cfg=cfg(samples=1000))


class TestEvaluateDispatch:
    def test_all_kinds_run(self):
        c = cfg(samples=2000)
        n, m, k = 5, 1, 2
        u = sample_stiefel(n, k, RandomSource(20, 0))
        v = sample_stiefel(n, m, RandomSource(21, 0))
        f = constant(n, m)
        phi = constant(n, k)
        fm = constant(n, m)
        cases = [
            (TransformKind.Funk, f, u, {}),
            (TransformKind.DualFunk, phi, v, {}),
            (TransformKind.Cosine, f, u, {"alpha": 2.0}),
            (TransformKind.DualCosine, phi, v, {"alpha": 2.0}),
            (TransformKind.Sine, f, u, {"alpha": 2.0}),
            (TransformKind.DualSine, phi, v, {"alpha": 2.0}),
            (TransformKind.Mcos, fm, v, {"alpha": 2.0}),
            (TransformKind.Qsin, fm, v, {"alpha": 2.0}),
            (TransformKind.CompositeCosine, phi, v, {"lam": np.array([0.5])}),
            (TransformKind.CompRadon, phi, v, {}),
        ]
        for kind, field, point, kw in cases:
            est = evaluate(kind, field, point, c, **kw)
            assert np.isfinite(est.mean), kind

    def test_missing_alpha(self):
        with pytest.raises(AdmissibilityError):
            evaluate(TransformKind.Cosine, constant(4, 1), axis(4, 0), cfg(samples=1000))


class TestInvarianceProperties:
    def test_equivariance(self):
        n, m, k = 4, 1, 2
        g = sample_stiefel(n, n, RandomSource(22, 0)).mat
        f = trace_quadratic(n, m, seed=7)
        rotated = make_rotated(f, g)
        u = sample_stiefel(n, k, RandomSource(23, 0)).mat
        a = funk(rotated, u, cfg(samples=80_000, seed=31))
        b = funk(f, g @ u, cfg(samples=80_000, seed=32))
        assert abs(a.mean - b.mean) <= 5.0 * math.hypot(a.se, b.se)

    def test_completion_independence(self):
        n, m, k = 5, 1, 2
        f = trace_quadratic(n, m, seed=8)
        u = sample_stiefel(n, k, RandomSource(24, 0)).mat
        a = funk(f, u, cfg(samples=80_000, seed=33))
        w = orth_complement_frame(u, policy="random", rng=np.random.default_rng(5))
        b = estimate(f.eval_batch, lambda rng, size: fiber_batch(w, m, rng, size),
                     cfg(samples=80_000, seed=34))
        assert abs(a.mean - b.mean) <= 5.0 * math.hypot(a.se, b.se)

    def test_right_invariance_absorption(self):
        n, m, k = 5, 2, 2
        base = make_field("poly:seed=4", n, m)
        avg = averaged_over_right(base, draws=32)
        u = sample_stiefel(n, k, RandomSource(25, 0)).mat
        a = funk(base, u, cfg(samples=60_000, seed=35))
        b = funk(avg, u, cfg(samples=20_000, seed=36))
        assert abs(a.mean - b.mean) <= 5.0 * math.hypot(a.se, b.se)

    def test_completion_matrix_is_orthogonal(self):
        u = sample_stiefel(6, 2, RandomSource(26, 0)).mat
        g = frame_completion(u)
        assert np.max(np.abs(g.T @ g - np.eye(6))) <= 1e-10


def make_rotated(f, g):
    from stiefel_xform.fields import ScalarField

    return ScalarField(
        f"{f.name}@rot", f.n, f.m,
        lambda vs: f.eval_batch(np.einsum("ij,bjm->bim", g, vs)),
        right_invariant=False,
    )


class TestNestedComposition:
    def test_deterministic(self):
        f = trace_quadratic(4, 1, seed=9)
        v = sample_stiefel(4, 1, RandomSource(27, 0))
        c = cfg(samples=500, seed=40)
        a = dual_cosine_of_funk(f, v, 2.0, c, inner_samples=50, k=1)
        b = dual_cosine_of_funk(f, v, 2.0, c, inner_samples=50, k=1)
        assert (a.mean, a.se) == (b.mean, b.se)

    def test_unit_chain(self):
        # with a flat kernel (alpha = k) and f constant the chain returns one
        f = constant(4, 1)
        v = sample_stiefel(4, 1, RandomSource(28, 0))
        est = dual_cosine_of_funk(f, v, 1.0, cfg(samples=500), inner_samples=20, k=1)
        assert est.mean == pytest.approx(1.0)


class TestDualKernels:
    def test_dual_cosine_mass_value(self):
        n, m, k, alpha = 4, 1, 2, 1.5
        v = sample_stiefel(n, m, RandomSource(29, 0))
        est = dual_cosine(constant(n, k), v, alpha, cfg(samples=100_000))
        want = scalar_mass_ratio(n, m, k, alpha - k)
        assert zscore(est, want) <= 4.0

    def test_dual_sine_mass_value(self):
        n, m, k, alpha = 5, 1, 2, 2.0
        v = sample_stiefel(n, m, RandomSource(30, 0))
        est = dual_sine(constant(n, k), v, alpha, cfg(samples=100_000))
        want = scalar_mass_ratio(n, m, n - k, alpha + k - n)
        assert zscore(est, want) <= 4.0
