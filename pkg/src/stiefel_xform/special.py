"""Closed-form special functions of the positive definite cone.

The matrix gamma function of order m, its vector-exponent generalization, the
composite power function built from principal minor ratios, and a registry of
every explicit gamma-ratio constant used by the identity fixtures.

Evaluation is done in log space.  Arguments of the reflected coefficients
(the normalized-transform factors) can make individual scalar gamma factors
negative, so signs are tracked explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln, gammasgn

from .errors import AdmissibilityError, DomainError, NotPositiveDefinite, PoleError
from .linalg import cholesky_upper, principal_minors, solve_spd, spd_array

POLE_TOL = 1e-12
LOG_OVERFLOW = 700.0


def _check_poles(args: np.ndarray, context: str) -> None:
    for j, x in enumerate(args):
        if x <= POLE_TOL and abs(x - round(x)) <= POLE_TOL:
            raise PoleError(f"{context}: factor {j} at nonpositive integer argument {x:g}", factor=j)


def _signed_log_gamma_product(args: np.ndarray, log_prefix: float, context: str) -> tuple[float, float]:
    """(sign, log magnitude) of prefix * prod Gamma(args_j), pole-checked."""
    _check_poles(args, context)
    sign = float(np.prod(gammasgn(args)))
    log = log_prefix + float(np.sum(gammaln(args)))
    if abs(log) > LOG_OVERFLOW:
        raise DomainError(f"{context}: |log| = {abs(log):.1f} exceeds overflow guard {LOG_OVERFLOW}")
    return sign, log


def siegel_gamma_args(m: int, alpha: float) -> np.ndarray:
    return alpha - 0.5 * np.arange(m)


def signed_log_siegel_gamma(m: int, alpha: float) -> tuple[float, float]:
    """Sign and log magnitude of the order-m matrix gamma function."""
    if m < 1:
        raise DomainError(f"order must be >= 1, got {m}")
    prefix = m * (m - 1) / 4.0 * math.log(math.pi)
    return _signed_log_gamma_product(siegel_gamma_args(m, alpha), prefix, f"Gamma_{m}({alpha:g})")


def siegel_gamma(m: int, alpha: float) -> float:
    """Matrix gamma of order m: pi^{m(m-1)/4} prod_{j=0}^{m-1} Gamma(alpha - j/2)."""
    sign, log = signed_log_siegel_gamma(m, alpha)
    return sign * math.exp(log)


def log_siegel_gamma(m: int, alpha: float) -> float:
    """log of the matrix gamma; all factor arguments must be positive."""
    args = siegel_gamma_args(m, alpha)
    _check_poles(args, f"log Gamma_{m}({alpha:g})")
    if np.any(args <= 0.0):
        bad = int(np.argmax(args <= 0.0))
        raise DomainError(f"log Gamma_{m}({alpha:g}): factor {bad} has nonpositive argument")
    return m * (m - 1) / 4.0 * math.log(math.pi) + float(np.sum(gammaln(args)))


def composite_gamma_args(lam: np.ndarray) -> np.ndarray:
    j = np.arange(1, len(lam) + 1)
    return (np.asarray(lam, dtype=float) - j + 1.0) / 2.0


def signed_log_composite_gamma(lam) -> tuple[float, float]:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    m = len(lam)
    prefix = m * (m - 1) / 4.0 * math.log(math.pi)
    return _signed_log_gamma_product(composite_gamma_args(lam), prefix, f"Gamma_cone({lam})")


def composite_gamma(lam) -> float:
    """Vector-exponent gamma: pi^{m(m-1)/4} prod_j Gamma((lam_j - j + 1)/2).

    For a constant vector (a, ..., a) this equals the order-m matrix gamma
    at a/2.
    """
    sign, log = signed_log_composite_gamma(lam)
    return sign * math.exp(log)


def composite_convergence_region(lam) -> bool:
    """True when the defining cone integral converges: lam_j > j - 1 for all j."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    j = np.arange(1, len(lam) + 1)
    return bool(np.all(lam > j - 1))


def reverse_exponent(lam) -> np.ndarray:
    return np.asarray(lam, dtype=float)[::-1].copy()


def reverse_matrix(r) -> np.ndarray:
    """Reversal r* obtained by flipping both index orders."""
    arr = spd_array(r)
    return arr[::-1, ::-1].copy()


def composite_power(r, lam) -> float:
    """Power function of the cone: prod_i (minor_i / minor_{i-1})^{lam_i / 2}.

    Strictly positive for positive definite r; multiplicative along the
    Cholesky diagonal (equals prod_j t_jj^{lam_j} for r = t't) and reduces to
    det(r)^{a/2} for the constant vector (a, ..., a).
    """
    arr = spd_array(r)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if len(lam) != arr.shape[0]:
        raise DomainError(f"exponent length {len(lam)} != matrix order {arr.shape[0]}")
    minors = principal_minors(arr)
    ratios = minors / np.concatenate([[1.0], minors[:-1]])
    return float(np.prod(ratios ** (lam / 2.0)))


def composite_power_batch(grams: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Composite power of a (B, m, m) stack via batched Cholesky diagonals."""
    lam = np.asarray(lam, dtype=float)
    try:
        lower = np.linalg.cholesky(grams)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("degenerate draw: batch contains a non positive definite gram") from None
    diag = np.einsum("bii->bi", lower)
    return np.prod(diag ** lam, axis=1)


def inverse_spd(r) -> np.ndarray:
    arr = spd_array(r)
    return solve_spd(arr, np.eye(arr.shape[0]))


def cholesky_diag_power(r, lam) -> float:
    """prod_j t_jj^{lam_j} for r = t't; cross-check route for composite_power."""
    t = cholesky_upper(r)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return float(np.prod(np.diag(t) ** lam))


# ---------------------------------------------------------------------------
# Constant registry
# ---------------------------------------------------------------------------


class ConstantKind(str, Enum):
    """Every explicit closed-form constant exposed by the package."""

    sigma_nm = "sigma_nm"
    c1_mass_cos = "c1_mass_cos"
    c2_mass_sin = "c2_mass_sin"
    c_alpha_gty = "c_alpha_gty"
    ctilde_alpha_gty7 = "ctilde_alpha_gty7"
    c_nkm_782 = "c_nkm_782"
    c_nm_782m = "c_nm_782m"
    d_alpha_85b = "d_alpha_85b"
    dtilde_alpha_85b = "dtilde_alpha_85b"
    ctilde_arn = "ctilde_arn"
    kappa_k_ores = "kappa_k_ores"
    delta_nmk = "delta_nmk"
    d_nmk = "d_nmk"
    delta_nm = "delta_nm"
    d_nm = "d_nm"
    c_alpha_kja = "c_alpha_kja"
    mu_k_for1y = "mu_k_for1y"


@dataclass(frozen=True)
class ConstantSpec:
    """A constant kind together with its integer and real parameters."""

    kind: ConstantKind
    n: int | None = None
    m: int | None = None
    k: int | None = None
    alpha: float | None = None

    def params(self) -> dict:
        out: dict = {}
        for name in ("n", "m", "k", "alpha"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        return out


@dataclass(frozen=True)
class _KindInfo:
    params: tuple[str, ...]
    formula: str
    hard: str            # structural constraint, violation raises AdmissibilityError
    advisory: str        # convergence guard, violation only reported
    excluded: str = ""   # integer lattice on which the coefficient is undefined


_REGISTRY: dict[ConstantKind, _KindInfo] = {
    ConstantKind.sigma_nm: _KindInfo(
        ("n", "m"),
        "2^m pi^{nm/2} / Gm(n/2)",
        "1 <= m <= n",
        "",
    ),
    ConstantKind.c1_mass_cos: _KindInfo(
        ("n", "m", "k", "alpha"),
        "Gm(n/2) Gm(a/2) / (Gm(k/2) Gm((a+n-k)/2))",
        "1 <= m <= k <= n-1",
        "alpha > m-1",
    ),
    ConstantKind.c2_mass_sin: _KindInfo(
        ("n", "m", "k", "alpha"),
        "Gm(n/2) Gm(a/2) / (Gm((n-k)/2) Gm((a+k)/2))",
        "1 <= m <= n-k, 1 <= k <= n-1",
        "alpha > m-1",
    ),
    ConstantKind.c_alpha_gty: _KindInfo(
        ("n", "m", "k", "alpha"),
        "Gm((n-m)/2) Gm(a/2) / (Gm(k/2) Gm((a+n-m-k)/2))",
        "1 <= m <= k <= n-m",
        "alpha > m-1",
    ),
    ConstantKind.ctilde_alpha_gty7: _KindInfo(
        ("n", "m", "k", "alpha"),
        "Gm(m/2) Gm(a/2) / (Gm(k/2) Gm((a+m-k)/2))",
        "1 <= m <= k <= n-m",
        "alpha > k-1",
    ),
    ConstantKind.c_nkm_782: _KindInfo(
        ("n", "m", "k", "alpha"),
        "Gm((n-k)/2) Gm(a/2) / (Gm(m/2) Gm((a+n-k-m)/2))",
        "1 <= m, 1 <= k <= n-m",
        "alpha > m-1",
    ),
    ConstantKind.c_nm_782m: _KindInfo(
        ("n", "m", "alpha"),
        "Gm((n-m)/2) Gm(a/2) / (Gm(m/2) Gm((a+n-2m)/2))",
        "2m <= n",
        "alpha > m-1",
    ),
    ConstantKind.d_alpha_85b: _KindInfo(
        ("n", "m", "alpha"),
        "Gm(m/2) Gm(a/2) / (Gm((n-m)/2) Gm((a+2m-n)/2))",
        "2m <= n",
        "alpha > n-m-1",
    ),
    ConstantKind.dtilde_alpha_85b: _KindInfo(
        ("n", "m", "k", "alpha"),
        "Gm(m/2) Gm(a/2) / (Gm(k/2) Gm((a+m-k)/2))",
        "1 <= m <= k <= n-1",
        "alpha > k-1",
    ),
    ConstantKind.ctilde_arn: _KindInfo(
        ("n", "m", "k"),
        "2^m pi^{(n-m)m/2} Gm((n-k)/2) / (Gm(n/2) Gm((n-k-m)/2))",
        "1 <= k <= n-1, 1 <= m, 2m <= n-k",
        "",
    ),
    ConstantKind.kappa_k_ores: _KindInfo(
        ("n", "m", "k"),
        "Gm((n-m)/2) / Gm(k/2)",
        "1 <= m <= k <= n-m",
        "",
    ),
    ConstantKind.delta_nmk: _KindInfo(
        ("n", "m", "k", "alpha"),
        "Gm(m/2) Gm((k-a)/2) / (Gm(n/2) Gm(a/2))",
        "1 <= m <= k <= n-1",
        "",
        excluded="alpha + m - k in {1, 2, ...}",
    ),
    ConstantKind.d_nmk: _KindInfo(
        ("n", "m", "k", "alpha"),
        "Gm(k/2) Gm((n-k-a)/2) / (Gm(n/2) Gm(a/2))",
        "1 <= m <= n-k, 1 <= k <= n-1",
        "",
        excluded="alpha + k + m - n in {1, 2, ...}",
    ),
    ConstantKind.delta_nm: _KindInfo(
        ("n", "m", "alpha"),
        "Gm(m/2) Gm((m-a)/2) / (Gm(n/2) Gm(a/2))",
        "1 <= m <= n-1",
        "",
        excluded="alpha in {1, 2, ...}",
    ),
    ConstantKind.d_nm: _KindInfo(
        ("n", "m", "alpha"),
        "Gm(m/2) Gm((n-m-a)/2) / (Gm(n/2) Gm(a/2))",
        "2m <= n",
        "",
        excluded="alpha + 2m - n in {1, 2, ...}",
    ),
    ConstantKind.c_alpha_kja: _KindInfo(
        ("n", "m", "k", "alpha"),
        "Gm((n-m)/2) Gm(a/2) / (Gm(k/2) Gm((a+n-m-k)/2))",
        "1 <= m <= k <= n-m",
        "alpha > m-1",
    ),
    ConstantKind.mu_k_for1y: _KindInfo(
        ("n", "m", "k"),
        "Gm(m/2) / Gm((n-k)/2)",
        "1 <= m <= k <= n-1",
        "",
    ),
}


def _require(spec: ConstantSpec, *names: str) -> list:
    vals = []
    for name in names:
        val = getattr(spec, name)
        if val is None:
            raise AdmissibilityError(f"{spec.kind.value} requires parameter {name}", guard=name)
        vals.append(val)
    return vals


def _hard_check(cond: bool, kind: ConstantKind, guard: str) -> None:
    if not cond:
        raise AdmissibilityError(f"{kind.value}: constraint '{guard}' violated", guard=guard)


def _excluded_positive_integer(x: float, kind: ConstantKind, desc: str) -> None:
    if x > 0.5 and abs(x - round(x)) <= POLE_TOL:
        raise PoleError(f"{kind.value}: excluded value, {desc} (got {x:g})")


def _gm_ratio(m: int, num: list[float], den: list[float]) -> float:
    sign, log = 1.0, 0.0
    for a in num:
        s, l = signed_log_siegel_gamma(m, a)
        sign, log = sign * s, log + l
    for a in den:
        s, l = signed_log_siegel_gamma(m, a)
        sign, log = sign * s, log - l
    if abs(log) > LOG_OVERFLOW:
        raise DomainError(f"gamma ratio overflow: |log| = {abs(log):.1f}")
    return sign * math.exp(log)


def constant_warnings(spec: ConstantSpec) -> list[str]:
    """Advisory convergence guards violated by the parameters (not fatal)."""
    info = _REGISTRY[spec.kind]
    out: list[str] = []
    if info.advisory and spec.alpha is not None:
        m = spec.m or 1
        n = spec.n or 0
        k = spec.k
        bounds = {
            "alpha > m-1": m - 1,
            "alpha > k-1": (k or 1) - 1,
            "alpha > n-m-1": n - m - 1,
        }
        lo = bounds.get(info.advisory)
        if lo is not None and spec.alpha <= lo:
            out.append(f"outside absolute-convergence region: {info.advisory} fails (alpha = {spec.alpha:g})")
    return out


def paper_constant(spec: ConstantSpec) -> float:
    """Evaluate a registered closed-form constant.

    Structural constraints raise ``AdmissibilityError``; gamma poles and the
    per-kind excluded integer lattices raise ``PoleError``.  Convergence-type
    guards are advisory only; query them with :func:`constant_warnings`.
    """
    kind = spec.kind if isinstance(spec.kind, ConstantKind) else ConstantKind(spec.kind)
    spec = ConstantSpec(kind, spec.n, spec.m, spec.k, spec.alpha)
    if kind is ConstantKind.sigma_nm:
        n, m = _require(spec, "n", "m")
        _hard_check(1 <= m <= n, kind, "1 <= m <= n")
        log = m * math.log(2.0) + n * m / 2.0 * math.log(math.pi) - log_siegel_gamma(m, n / 2.0)
        return math.exp(log)
    if kind in (ConstantKind.c1_mass_cos,):
        n, m, k, a = _require(spec, "n", "m", "k", "alpha")
        _hard_check(1 <= m <= k <= n - 1, kind, "1 <= m <= k <= n-1")
        return _gm_ratio(m, [n / 2, a / 2], [k / 2, (a + n - k) / 2])
    if kind is ConstantKind.c2_mass_sin:
        n, m, k, a = _require(spec, "n", "m", "k", "alpha")
        _hard_check(1 <= k <= n - 1 and 1 <= m <= n - k, kind, "1 <= m <= n-k")
        return _gm_ratio(m, [n / 2, a / 2], [(n - k) / 2, (a + k) / 2])
    if kind in (ConstantKind.c_alpha_gty, ConstantKind.c_alpha_kja):
        n, m, k, a = _require(spec, "n", "m", "k", "alpha")
        _hard_check(1 <= m <= k <= n - m, kind, "1 <= m <= k <= n-m")
        return _gm_ratio(m, [(n - m) / 2, a / 2], [k / 2, (a + n - m - k) / 2])
    if kind in (ConstantKind.ctilde_alpha_gty7, ConstantKind.dtilde_alpha_85b):
        n, m, k, a = _require(spec, "n", "m", "k", "alpha")
        _hard_check(1 <= m <= k <= n - 1, kind, "1 <= m <= k <= n-1")
        return _gm_ratio(m, [m / 2, a / 2], [k / 2, (a + m - k) / 2])
    if kind is ConstantKind.c_nkm_782:
        n, m, k, a = _require(spec, "n", "m", "k", "alpha")
        _hard_check(1 <= m and 1 <= k <= n - m, kind, "1 <= k <= n-m")
        return _gm_ratio(m, [(n - k) / 2, a / 2], [m / 2, (a + n - k - m) / 2])
    if kind is ConstantKind.c_nm_782m:
        n, m, a = _require(spec, "n", "m", "alpha")
        _hard_check(2 * m <= n, kind, "2m <= n")
        return _gm_ratio(m, [(n - m) / 2, a / 2], [m / 2, (a + n - 2 * m) / 2])
    if kind is ConstantKind.d_alpha_85b:
        n, m, a = _require(spec, "n", "m", "alpha")
        _hard_check(2 * m <= n, kind, "2m <= n")
        return _gm_ratio(m, [m / 2, a / 2], [(n - m) / 2, (a + 2 * m - n) / 2])
    if kind is ConstantKind.ctilde_arn:
        n, m, k = _require(spec, "n", "m", "k")
        _hard_check(1 <= k <= n - 1 and 2 * m <= n - k, kind, "2m <= n-k")
        log = (
            m * math.log(2.0)
            + (n - m) * m / 2.0 * math.log(math.pi)
            + log_siegel_gamma(m, (n - k) / 2.0)
            - log_siegel_gamma(m, n / 2.0)
            - log_siegel_gamma(m, (n - k - m) / 2.0)
        )
        return math.exp(log)
    if kind is ConstantKind.kappa_k_ores:
        n, m, k = _require(spec, "n", "m", "k")
        _hard_check(1 <= m <= k <= n - m, kind, "1 <= m <= k <= n-m")
        return _gm_ratio(m, [(n - m) / 2], [k / 2])
    if kind is ConstantKind.delta_nmk:
        n, m, k, a = _require(spec, "n", "m", "k", "alpha")
        _hard_check(1 <= m <= k <= n - 1, kind, "1 <= m <= k <= n-1")
        _excluded_positive_integer(a + m - k, kind, "alpha + m - k in {1, 2, ...}")
        return _gm_ratio(m, [m / 2, (k - a) / 2], [n / 2, a / 2])
    if kind is ConstantKind.d_nmk:
        n, m, k, a = _require(spec, "n", "m", "k", "alpha")
        _hard_check(1 <= k <= n - 1 and 1 <= m <= n - k, kind, "1 <= m <= n-k")
        _excluded_positive_integer(a + k + m - n, kind, "alpha + k + m - n in {1, 2, ...}")
        return _gm_ratio(m, [k / 2, (n - k - a) / 2], [n / 2, a / 2])
    if kind is ConstantKind.delta_nm:
        n, m, a = _require(spec, "n", "m", "alpha")
        _hard_check(1 <= m <= n - 1, kind, "1 <= m <= n-1")
        _excluded_positive_integer(a, kind, "alpha in {1, 2, ...}")
        return _gm_ratio(m, [m / 2, (m - a) / 2], [n / 2, a / 2])
    if kind is ConstantKind.d_nm:
        n, m, a = _require(spec, "n", "m", "alpha")
        _hard_check(2 * m <= n, kind, "2m <= n")
        _excluded_positive_integer(a + 2 * m - n, kind, "alpha + 2m - n in {1, 2, ...}")
        return _gm_ratio(m, [m / 2, (n - m - a) / 2], [n / 2, a / 2])
    if kind is ConstantKind.mu_k_for1y:
        n, m, k = _require(spec, "n", "m", "k")
        _hard_check(1 <= m <= k <= n - 1, kind, "1 <= m <= k <= n-1")
        return _gm_ratio(m, [m / 2], [(n - k) / 2])
    raise AdmissibilityError(f"unknown constant kind {spec.kind!r}")


def composite_mass_ratio(n: int, m: int, k: int, lam) -> float:
    """Mean of the composite power kernel over either frame argument.

    Value of the moment integral of (v'uu'v)^lam under the invariant
    probability measure: Gm(n/2) Gc(lam + k) / (Gm(k/2) Gc(lam + n)), where
    Gc is the vector-exponent gamma.  Finite for lam_j > j - k - 1.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if len(lam) != m:
        raise DomainError(f"exponent length {len(lam)} != m = {m}")
    if not (1 <= m <= k <= n):
        raise AdmissibilityError("requires 1 <= m <= k <= n", guard="1 <= m <= k <= n")
    sign = 1.0
    log = log_siegel_gamma(m, n / 2.0) - log_siegel_gamma(m, k / 2.0)
    s1, l1 = signed_log_composite_gamma(lam + k)
    s2, l2 = signed_log_composite_gamma(lam + n)
    sign *= s1 * s2
    log += l1 - l2
    return sign * math.exp(log)


def scalar_mass_ratio(n: int, m: int, k: int, lam: float) -> float:
    """Diagonal-exponent specialization of :func:`composite_mass_ratio`.

    Mean of det(v'uu'v)^{lam/2}: Gm(n/2) Gm((lam+k)/2) / (Gm(k/2) Gm((lam+n)/2)).
    """
    return _gm_ratio(m, [n / 2, (lam + k) / 2], [k / 2, (lam + n) / 2])


def constant_registry() -> list[dict]:
    """Machine-readable description of every constant kind."""
    out = []
    for kind in ConstantKind:
        info = _REGISTRY[kind]
        out.append(
            {
                "kind": kind.value,
                "params": list(info.params),
                "formula": info.formula,
                "constraints": info.hard,
                "convergence_guard": info.advisory,
                "excluded": info.excluded,
            }
        )
    return out
