import numpy as np
import pytest

from stiefel_xform.fields import (
    ScalarField,
    averaged_over_right,
    canonical_frame,
    constant,
    coordinate_square,
    default_probe_fields,
    field_registry,
    make_field,
    minor_power,
    random_polynomial,
    trace_quadratic,
)
from stiefel_xform.manifold import RandomSource, haar_stiefel_batch


class TestRegistry:
    def test_names(self):
        names = field_registry()
        for name in ("const", "coord-square", "minor-power", "trace-quad", "poly"):
            assert name in names

    def test_parse_with_options(self):
        f = make_field("minor-power:p=0.5,w=canonical", 5, 2)
        assert f.name == "minor-power:p=0.5"
        assert f.right_invariant

    def test_parse_plain(self):
        f = make_field("const", 4, 1)
        assert float(f(canonical_frame(4, 1))) == 1.0

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            make_field("nope", 3, 1)

    def test_malformed_option(self):
        with pytest.raises(ValueError):
            make_field("minor-power:p", 3, 1)


class TestFields:
    def test_constant(self):
        f = constant(4, 2, 3.5)
        vs = haar_stiefel_batch(4, 2, RandomSource(1, 0).generator(), 5)
        assert np.allclose(f(vs), 3.5)

    def test_coordinate_square(self):
        f = coordinate_square(3, 1, i=2, j=0)
        v = canonical_frame(3, 1)
        assert float(f(v)) == 1.0

    def test_minor_power_canonical(self):
        f = minor_power(4, 2, p=1.0)
        v = canonical_frame(4, 2)
        assert float(f(v)) == pytest.approx(1.0)

    def test_minor_power_smaller_reference(self):
        # m-column reference against k-frames: gram taken on the reference side
        f = minor_power(5, 3, p=0.5, w=canonical_frame(5, 2))
        u = haar_stiefel_batch(5, 3, RandomSource(2, 0).generator(), 1)[0]
        assert np.isfinite(float(f(u)))

    def test_trace_quadratic_invariance(self):
        f = trace_quadratic(4, 2, seed=3)
        rng = RandomSource(5, 0).generator()
        v = haar_stiefel_batch(4, 2, rng, 1)[0]
        g = haar_stiefel_batch(2, 2, rng, 1)[0]
        assert float(f(v)) == pytest.approx(float(f(v @ g)), rel=1e-12)

    def test_random_polynomial_not_invariant(self):
        f = random_polynomial(4, 2, seed=1)
        assert not f.right_invariant

    def test_invariance_spot_check_rejects_lie(self):
        with pytest.raises(ValueError):
            ScalarField("lie", 4, 2, lambda vs: vs[:, 0, 0], right_invariant=True)

    def test_batched_and_single_agree(self):
        f = trace_quadratic(4, 2, seed=9)
        vs = haar_stiefel_batch(4, 2, RandomSource(3, 0).generator(), 4)
        batch = f(vs)
        singles = [float(f(vs[i])) for i in range(4)]
        assert np.allclose(batch, singles)

    def test_right_average_matches_on_invariant_field(self):
        base = minor_power(4, 2, p=1.0)
        avg = averaged_over_right(base, draws=8)
        vs = haar_stiefel_batch(4, 2, RandomSource(4, 0).generator(), 16)
        assert np.allclose(avg(vs), base(vs), rtol=1e-10)

    def test_probe_fields(self):
        probes = default_probe_fields(4, 2, 3)
        assert len(probes) == 3
        names = [p.name for p in probes]
        assert len(set(names)) == 3
