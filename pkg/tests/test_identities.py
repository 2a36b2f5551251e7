import json
import math

import pytest

from stiefel_xform.errors import AdmissibilityError, DegenerateFit, UnknownIdentity
from stiefel_xform.identities import (
    IdentityReport,
    _wls_fit,
    fit_constant,
    get_fixture,
    list_identities,
    verify,
)
from stiefel_xform.manifold import MCConfig, MCEstimate
from stiefel_xform.special import ConstantKind, ConstantSpec, paper_constant

FAST = MCConfig(samples=20_000, seed=42)
SMALL_NESTED = {"outer_samples": 1500, "inner_samples": 150}


class TestCatalog:
    def test_contains_expected_ids(self):
        ids = [entry["id"] for entry in list_identities()]
        for fid in ("ID-GTY", "ID-EXL", "ID-MASS-FUNK", "ID-ARN", "ID-ORES", "ID-BETA"):
            assert fid in ids

    def test_ids_unique(self):
        ids = [entry["id"] for entry in list_identities()]
        assert len(ids) == len(set(ids))
        assert len(ids) >= 20

    def test_stable_order(self):
        assert [e["id"] for e in list_identities()] == [e["id"] for e in list_identities()]

    def test_entries_have_docs(self):
        for entry in list_identities():
            assert entry["statement"]
            assert entry["guards"]
            assert entry["grid"]

    def test_unknown_identity(self):
        with pytest.raises(UnknownIdentity):
            verify("ID-NOPE", {}, FAST)

    def test_catalog_is_json_serializable(self):
        json.dumps(list_identities())


class TestVerify:
    def test_deterministic_reports(self):
        a = verify("ID-MASS-COS", SMALL_NESTED, FAST)
        b = verify("ID-MASS-COS", SMALL_NESTED, FAST)
        assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
        assert a.runtime_ms is None

    def test_timings_recorded_on_request(self):
        r = verify("ID-MASS-COS", SMALL_NESTED, FAST, timings=True)
        assert isinstance(r.runtime_ms, int)

    def test_report_shape(self):
        r = verify("ID-MASS-COS", {}, FAST)
        assert isinstance(r, IdentityReport)
        d = r.to_dict()
        for key in ("id", "params", "lhs", "rhs", "constant_paper", "constant_empirical",
                    "z_score", "verdict", "runtime_ms", "seed", "gated", "checks"):
            assert key in d

    def test_unknown_parameter_rejected(self):
        with pytest.raises(AdmissibilityError):
            verify("ID-MASS-COS", {"bogus": 1}, FAST)

    def test_mnv_reports_normalization_discrepancy(self):
        r = verify("ID-MNV", {}, FAST)
        sigma = paper_constant(ConstantSpec(ConstantKind.sigma_nm, n=5, m=2))
        assert r.extras["unnormalized_discrepancy_factor"] == pytest.approx(sigma)
        assert r.verdict == "pass"

    def test_exl_reports_printed_form(self):
        r = verify("ID-EXL", {}, FAST)
        assert r.verdict == "pass"
        # the printed prefactor disagrees with the normalization by Gm(m/2)/Gm(n/2)
        assert r.extras["used_over_printed"] == pytest.approx(0.5, rel=1e-9)

    def test_arn_audit_flags_constant(self):
        r = verify("ID-ARN", {}, MCConfig(samples=60_000, seed=42))
        assert r.verdict == "constant-mismatch"
        assert r.constant_empirical is not None
        fit = r.constant_empirical["value"]
        assert abs(fit / r.extras["constant_consistent"] - 1.0) <= 0.05
        assert r.extras["max_ratio_z"] <= 5.0

    def test_gated_flags(self):
        r1 = verify("ID-MKZE", {}, FAST)
        assert r1.gated
        r2 = verify("ID-MKZE", {"n": 5, "m": 2}, MCConfig(samples=40_000, seed=42))
        assert not r2.gated


BOUNDARY_CASES = {
    "ID-MASS-FUNK": {"n": 3, "m": 2, "k": 2},
    "ID-DUALITY": {"n": 3, "m": 2, "k": 2},
    "ID-MASS-COS": {"alpha": 0.0},
    "ID-MASS-COS-DUAL": {"k": 0},
    "ID-MASS-SIN": {"m": 4},
    "ID-MASS-SIN-DUAL": {"alpha": 0.0},
    "ID-AVG-SYM": {"m": 9},
    "ID-EXL": {"lam": (0.5, -3.0)},
    "ID-MNV": {"lam": -5.0},
    "ID-KJA": {"alpha": 1.0},
    "ID-PMZ": {"alpha": 0.0},
    "ID-GTY": {"alpha": 0.0},
    "ID-GTY7": {"alpha": 1.0},
    "ID-782": {"k": 5},
    "ID-782M": {"n": 3, "m": 2},
    "ID-GTY4": {"alpha": 2.0},
    "ID-782A": {"alpha": 1.0},
    "ID-ARN": {"k": 3},
    "ID-ROBP": {"m": 4},
    "ID-AKM-MASS": {"k": 5},
    "ID-TLAM-MASS": {"lam": (0.5, -3.0)},
    "ID-ORES": {"alpha": 2.0},
    "ID-POLAR": {"m": 5},
    "ID-BISTIEFEL": {"k": 4},
    "ID-EQ11": {"m": 3},
    "ID-BETA": {"alpha": 0.0},
    "ID-MKZE": {"n": 3, "m": 2},
    "ID-OONTR": {"alpha": 0.0},
}


class TestAdmissibility:
    def test_every_fixture_has_boundary_case(self):
        assert set(BOUNDARY_CASES) == {e["id"] for e in list_identities()}

    @pytest.mark.parametrize("fid", sorted(BOUNDARY_CASES))
    def test_boundary_rejected(self, fid):
        with pytest.raises(AdmissibilityError) as err:
            verify(fid, BOUNDARY_CASES[fid], FAST)
        assert err.value.guard


class TestFitConstant:
    def test_mass_cos_constant(self):
        value, (lo, hi) = fit_constant("ID-MASS-COS", {"n": 3, "m": 1, "k": 1, "alpha": 2.0},
                                       MCConfig(samples=60_000, seed=42))
        assert abs(value - 0.5) <= 0.02
        assert lo <= value <= hi

    def test_arn_constant_near_quarter_pi(self):
        value, _ = fit_constant("ID-ARN", {}, MCConfig(samples=60_000, seed=42))
        assert abs(value / (math.pi / 4) - 1.0) <= 0.05

    def test_unavailable_without_pair(self):
        with pytest.raises(AdmissibilityError):
            fit_constant("ID-BETA", {}, FAST)

    def test_wls_degenerate(self):
        zeros = [MCEstimate(0.0, 0.0, 10, 1)] * 3
        with pytest.raises(DegenerateFit):
            _wls_fit(zeros, zeros)

    def test_fit_deterministic(self):
        a = fit_constant("ID-MASS-COS", {}, FAST)
        b = fit_constant("ID-MASS-COS", {}, FAST)
        assert a == b


@pytest.mark.parametrize("entry", list_identities(), ids=lambda e: e["id"])
def test_default_grid_smoke(entry):
    """Every fixture passes (or audits) on its default grid at reduced cost."""
    cfg = MCConfig(samples=20_000, seed=42)
    for params in entry["grid"]:
        p = dict(params)
        if "lam" in p and isinstance(p["lam"], list):
            p["lam"] = tuple(p["lam"])
        p.setdefault("outer_samples", 1500)
        p.setdefault("inner_samples", 150)
        r = verify(entry["id"], p, cfg)
        if entry["id"] == "ID-ARN":
            assert r.verdict == "constant-mismatch"
        elif r.gated:
            assert r.verdict == "pass", (entry["id"], p, r.z_score)


def test_fixture_lookup():
    fx = get_fixture("ID-GTY")
    assert fx.fid == "ID-GTY"
    assert fx.constant_value({"n": 4, "m": 1, "k": 1, "alpha": 2.0}) == pytest.approx(0.5)


class TestProportionalityInvariant:
    """Every constant-bearing fixture with a per-field estimator fits its
    registered constant across three probe fields."""

    @pytest.mark.parametrize(
        "fid", sorted(e["id"] for e in list_identities() if get_fixture(e["id"]).pair is not None)
    )
    def test_fitted_constant_matches(self, fid):
        from stiefel_xform.identities import _arn_consistent

        fx = get_fixture(fid)
        params = {"outer_samples": 1500, "inner_samples": 150}
        cfg = MCConfig(samples=30_000, seed=42)
        value, (lo, hi) = fit_constant(fid, params, cfg)
        merged = dict(fx.defaults)
        merged.update(params)
        paper = fx.constant_value(merged)
        if fid == "ID-ARN":
            # the registered printed form is the audited outlier; the fit must
            # instead match the measure-consistent value
            paper = _arn_consistent(merged)
        se_fit = max((hi - lo) / (2 * 1.959964), 1e-12)
        assert abs(value - paper) <= max(5.0 * se_fit, 0.03 * abs(paper)), (value, paper)
