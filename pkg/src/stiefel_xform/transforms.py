"""Monte Carlo realizations of the integral transforms between Stiefel
manifolds.

Each operator maps an integrable field to its value at a point, estimated as
a sample mean against the invariant probability measure:

* the orthogonal-fiber average (``funk``) and its dual,
* the determinant-kernel cosine and sine families with their duals,
* the equal-rank specializations ``m_transform`` and ``q_transform``,
* the vector-exponent kernel transform ``composite_cosine``,
* the partial fiber average ``comp_radon``,
* the gamma-ratio normalized variants.

Kernels are guarded at the exact boundary of absolute convergence; callers
may override the guard for variance studies with ``unsafe=True``.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import AdmissibilityError, DimensionError, NonFiniteSample
from .fields import ScalarField
from .linalg import frame_array, orth_complement_frame
from .manifold import (
    MCConfig,
    MCEstimate,
    RandomSource,
    _block_sizes,
    complement_batch,
    derived_seed,
    estimate,
    fiber_batch,
    haar_stiefel_batch,
)
from .special import ConstantKind, ConstantSpec, composite_power_batch, paper_constant

_INNER_TAG = 0x1D


class TransformKind(str, Enum):
    Funk = "funk"
    DualFunk = "dual-funk"
    Cosine = "cosine"
    DualCosine = "dual-cosine"
    Sine = "sine"
    DualSine = "dual-sine"
    Mcos = "mcos"
    Qsin = "qsin"
    CompositeCosine = "composite-cosine"
    CompRadon = "comp-radon"


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


def gram_uv(u: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """(B, m, m) stack of v'uu'v for a fixed frame u and stacked frames v."""
    a = np.einsum("nk,bnm->bkm", u, vs)
    return np.einsum("bkm,bkl->bml", a, a)


def gram_vu(us: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(B, m, m) stack of v'uu'v for stacked frames u and a fixed frame v."""
    a = np.einsum("bnk,nm->bkm", us, v)
    return np.einsum("bkm,bkl->bml", a, a)


def _det_power(grams: np.ndarray, expo: float) -> np.ndarray:
    if expo == 0.0:
        return np.ones(grams.shape[0])
    # dets of gram stacks are nonnegative up to roundoff; |.| guards tiny negatives
    return np.abs(np.linalg.det(grams)) ** expo


def _check_alpha(alpha: float, m: int, unsafe: bool) -> None:
    if alpha <= m - 1 and not unsafe:
        raise AdmissibilityError(
            f"alpha > m-1 required for absolute convergence (alpha = {alpha:g}, m = {m})",
            guard="alpha > m-1",
        )


# ---------------------------------------------------------------------------
# Fiber averages
# ---------------------------------------------------------------------------


def funk(f: ScalarField, u, cfg: MCConfig) -> MCEstimate:
    """Average of f over the m-frames orthogonal to the k-frame u."""
    uarr = frame_array(u, n=f.n)
    n, k = uarr.shape
    if k + f.m > n:
        raise DimensionError(f"fiber requires k + m <= n, got k = {k}, m = {f.m}, n = {n}")
    w = orth_complement_frame(uarr)
    return estimate(f.eval_batch, lambda rng, size: fiber_batch(w, f.m, rng, size), cfg)


def dual_funk(phi: ScalarField, v, cfg: MCConfig) -> MCEstimate:
    """Average of phi over the k-frames orthogonal to the m-frame v."""
    varr = frame_array(v, n=phi.n)
    n, m = varr.shape
    if m + phi.m > n:
        raise DimensionError(f"fiber requires k + m <= n, got k = {phi.m}, m = {m}, n = {n}")
    w = orth_complement_frame(varr)
    return estimate(phi.eval_batch, lambda rng, size: fiber_batch(w, phi.m, rng, size), cfg)


def comp_radon(phi: ScalarField, v, cfg: MCConfig) -> MCEstimate:
    """Partial fiber average: the first k - m columns of the argument frame
    are averaged over the complement of v, the last m columns are pinned to v.

    Reduces to evaluation of phi at v itself when k = m.
    """
    varr = frame_array(v, n=phi.n)
    n, m = varr.shape
    k = phi.m
    if not (m <= k <= n - 1):
        raise DimensionError(f"requires m <= k <= n-1, got m = {m}, k = {k}, n = {n}")
    if k == m:
        return MCEstimate(float(phi(varr)), 0.0, cfg.samples, cfg.seed)
    w = orth_complement_frame(varr)

    def sampler(rng, size):
        a = haar_stiefel_batch(n - m, k - m, rng, size)
        left = np.einsum("nj,bjc->bnc", w, a)
        right = np.broadcast_to(varr, (size, n, m))
        return np.concatenate([left, right], axis=2)

    return estimate(phi.eval_batch, sampler, cfg)


# ---------------------------------------------------------------------------
# Determinant-kernel families
# ---------------------------------------------------------------------------


def cosine(f: ScalarField, u, alpha: float, cfg: MCConfig, unsafe: bool = False) -> MCEstimate:
    """det(v'uu'v)^{(alpha-k)/2} kernel against f over V_{n,m}."""
    uarr = frame_array(u, n=f.n)
    n, k = uarr.shape
    if f.m > k:
        raise DimensionError(f"cosine kernel vanishes identically for m > k (m = {f.m}, k = {k})")
    _check_alpha(alpha, f.m, unsafe)
    expo = (alpha - k) / 2.0

    def integrand(vs):
        return np.asarray(f.eval_batch(vs), dtype=float) * _det_power(gram_uv(uarr, vs), expo)

    return estimate(integrand, lambda rng, size: haar_stiefel_batch(n, f.m, rng, size), cfg)


def dual_cosine(phi: ScalarField, v, alpha: float, cfg: MCConfig, unsafe: bool = False) -> MCEstimate:
    """det(v'uu'v)^{(alpha-k)/2} kernel against phi over V_{n,k}."""
    varr = frame_array(v, n=phi.n)
    n, m = varr.shape
    k = phi.m
    if m > k:
        raise DimensionError(f"cosine kernel vanishes identically for m > k (m = {m}, k = {k})")
    _check_alpha(alpha, m, unsafe)
    expo = (alpha - k) / 2.0

    def integrand(us):
        return np.asarray(phi.eval_batch(us), dtype=float) * _det_power(gram_vu(us, varr), expo)

    return estimate(integrand, lambda rng, size: haar_stiefel_batch(n, k, rng, size), cfg)


def sine(f: ScalarField, u, alpha: float, cfg: MCConfig, unsafe: bool = False,
         via_complement: bool = False) -> MCEstimate:
    """det(I - v'uu'v)^{(alpha+k-n)/2} kernel against f over V_{n,m}.

    ``via_complement=True`` evaluates the equivalent cosine transform at an
    orthogonal complement frame of u (cross-check route).
    """
    uarr = frame_array(u, n=f.n)
    n, k = uarr.shape
    m = f.m
    if m > n - k:
        raise DimensionError(f"sine kernel vanishes identically for m > n-k (m = {m}, k = {k}, n = {n})")
    _check_alpha(alpha, m, unsafe)
    if via_complement:
        return cosine(f, orth_complement_frame(uarr), alpha, cfg, unsafe=unsafe)
    expo = (alpha + k - n) / 2.0
    eye = np.eye(m)

    def integrand(vs):
        return np.asarray(f.eval_batch(vs), dtype=float) * _det_power(eye - gram_uv(uarr, vs), expo)

    return estimate(integrand, lambda rng, size: haar_stiefel_batch(n, m, rng, size), cfg)


def dual_sine(phi: ScalarField, v, alpha: float, cfg: MCConfig, unsafe: bool = False) -> MCEstimate:
    """det(I - v'uu'v)^{(alpha+k-n)/2} kernel against phi over V_{n,k}."""
    varr = frame_array(v, n=phi.n)
    n, m = varr.shape
    k = phi.m
    if m > n - k:
        raise DimensionError(f"sine kernel vanishes identically for m > n-k (m = {m}, k = {k}, n = {n})")
    _check_alpha(alpha, m, unsafe)
    expo = (alpha + k - n) / 2.0
    eye = np.eye(m)

    def integrand(us):
        return np.asarray(phi.eval_batch(us), dtype=float) * _det_power(eye - gram_vu(us, varr), expo)

    return estimate(integrand, lambda rng, size: haar_stiefel_batch(n, k, rng, size), cfg)


def m_transform(f: ScalarField, u, alpha: float, cfg: MCConfig, unsafe: bool = False) -> MCEstimate:
    """Equal-rank cosine transform (point and argument both m-frames)."""
    uarr = frame_array(u, n=f.n, m=f.m)
    if not 1 <= f.m <= f.n - 1:
        raise DimensionError(f"requires 1 <= m <= n-1, got m = {f.m}, n = {f.n}")
    return cosine(f, uarr, alpha, cfg, unsafe=unsafe)


def q_transform(f: ScalarField, u, alpha: float, cfg: MCConfig, unsafe: bool = False) -> MCEstimate:
    """Equal-rank sine transform; requires 2m <= n."""
    uarr = frame_array(u, n=f.n, m=f.m)
    if 2 * f.m > f.n:
        raise AdmissibilityError(f"requires 2m <= n, got m = {f.m}, n = {f.n}", guard="2m <= n")
    return sine(f, uarr, alpha, cfg, unsafe=unsafe)


def composite_cosine(phi: ScalarField, v, lam, cfg: MCConfig, unsafe: bool = False) -> MCEstimate:
    """Vector-exponent kernel (v'uu'v)^lam against phi over V_{n,k}.

    Absolute convergence requires lam_j > j - k - 1 for every component.
    Degenerate draws where the gram fails to be positive definite abort the
    estimate as non-finite samples.
    """
    varr = frame_array(v, n=phi.n)
    n, m = varr.shape
    k = phi.m
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if m > k:
        raise DimensionError(f"kernel vanishes identically for m > k (m = {m}, k = {k})")
    if len(lam) != m:
        raise DimensionError(f"exponent length {len(lam)} != m = {m}")
    j = np.arange(1, m + 1)
    if np.any(lam <= j - k - 1) and not unsafe:
        raise AdmissibilityError(
            f"lam_j > j-k-1 required for absolute convergence (lam = {lam.tolist()}, k = {k})",
            guard="lam_j > j-k-1",
        )

    def integrand(us):
        try:
            kern = composite_power_batch(gram_vu(us, varr), lam)
        except Exception as exc:
            raise NonFiniteSample(f"degenerate kernel draw: {exc}") from exc
        return np.asarray(phi.eval_batch(us), dtype=float) * kern

    return estimate(integrand, lambda rng, size: haar_stiefel_batch(n, k, rng, size), cfg)


# ---------------------------------------------------------------------------
# Normalized variants
# ---------------------------------------------------------------------------

_NORMALIZERS = {
    TransformKind.Cosine: ConstantKind.delta_nmk,
    TransformKind.DualCosine: ConstantKind.delta_nmk,
    TransformKind.Sine: ConstantKind.d_nmk,
    TransformKind.DualSine: ConstantKind.d_nmk,
    TransformKind.Mcos: ConstantKind.delta_nm,
    TransformKind.Qsin: ConstantKind.d_nm,
}


def normalization_coefficient(kind: TransformKind, n: int, m: int, k: int | None, alpha: float) -> float:
    """Gamma-ratio prefactor of the normalized transform of the given kind."""
    kind = TransformKind(kind)
    if kind not in _NORMALIZERS:
        raise AdmissibilityError(f"no normalization defined for kind {kind.value!r}")
    ckind = _NORMALIZERS[kind]
    if ckind in (ConstantKind.delta_nm, ConstantKind.d_nm):
        return paper_constant(ConstantSpec(ckind, n=n, m=m, alpha=alpha))
    return paper_constant(ConstantSpec(ckind, n=n, m=m, k=k, alpha=alpha))


def normalized(kind: TransformKind, field: ScalarField, point, alpha: float, cfg: MCConfig,
               unsafe: bool = False) -> MCEstimate:
    """Normalized transform: the raw estimate scaled (mean and standard
    error alike) by the kind's gamma-ratio coefficient.

    Raises ``PoleError`` when alpha lies on the coefficient's excluded set.
    """
    kind = TransformKind(kind)
    raw = evaluate(kind, field, point, cfg, alpha=alpha, unsafe=unsafe)
    parr = frame_array(point)
    if kind in (TransformKind.Cosine, TransformKind.Sine):
        n, k, m = field.n, parr.shape[1], field.m
    elif kind in (TransformKind.DualCosine, TransformKind.DualSine):
        n, k, m = field.n, field.m, parr.shape[1]
    else:
        n, k, m = field.n, field.m, field.m
    coeff = normalization_coefficient(kind, n, m, k, alpha)
    return raw.scaled(coeff)


def evaluate(kind: TransformKind, field: ScalarField, point, cfg: MCConfig, alpha: float | None = None,
             lam=None, unsafe: bool = False) -> MCEstimate:
    """Dispatch a transform evaluation by kind (CLI entry point)."""
    kind = TransformKind(kind)
    if kind is TransformKind.Funk:
        return funk(field, point, cfg)
    if kind is TransformKind.DualFunk:
        return dual_funk(field, point, cfg)
    if kind is TransformKind.CompRadon:
        return comp_radon(field, point, cfg)
    if kind is TransformKind.CompositeCosine:
        if lam is None:
            raise AdmissibilityError("composite-cosine requires an exponent vector lam")
        return composite_cosine(field, point, lam, cfg, unsafe=unsafe)
    if alpha is None:
        raise AdmissibilityError(f"{kind.value} requires alpha")
    if kind is TransformKind.Cosine:
        return cosine(field, point, alpha, cfg, unsafe=unsafe)
    if kind is TransformKind.DualCosine:
        return dual_cosine(field, point, alpha, cfg, unsafe=unsafe)
    if kind is TransformKind.Sine:
        return sine(field, point, alpha, cfg, unsafe=unsafe)
    if kind is TransformKind.DualSine:
        return dual_sine(field, point, alpha, cfg, unsafe=unsafe)
    if kind is TransformKind.Mcos:
        return m_transform(field, point, alpha, cfg, unsafe=unsafe)
    if kind is TransformKind.Qsin:
        return q_transform(field, point, alpha, cfg, unsafe=unsafe)
    raise AdmissibilityError(f"unknown transform kind {kind!r}")


# ---------------------------------------------------------------------------
# Nested compositions
# ---------------------------------------------------------------------------


def nested_estimate(outer_sampler, prepare, outer_weight, inner_mean, cfg: MCConfig,
                    inner_samples: int) -> MCEstimate:
    """Two-stage estimator: outer draws weighted by a kernel, with an inner
    sample mean evaluated per outer draw.

    The inner stage of outer sample i uses the stream derived from
    (cfg.seed, i), so the composition is reproducible and the inner streams
    are mutually independent.  The reported standard error is taken over the
    outer values and therefore includes the inner noise.
    """
    sizes = _block_sizes(cfg.samples)
    count, mean, ssd = 0, 0.0, 0.0
    offset = 0
    for b, size in enumerate(sizes):
        rng = RandomSource(cfg.seed, b).generator()
        pts = outer_sampler(rng, size)
        aux = prepare(pts) if prepare is not None else pts
        weights = outer_weight(pts) if outer_weight is not None else np.ones(size)
        vals = np.empty(size)
        for i in range(size):
            inner_rng = RandomSource(derived_seed(cfg.seed, _INNER_TAG, offset + i), 0).generator()
            vals[i] = inner_mean(aux, i, inner_rng, inner_samples)
        vals = vals * weights
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmin(np.isfinite(vals)))
            raise NonFiniteSample(f"non-finite composition value at outer sample {offset + bad}",
                                  index=offset + bad)
        bmean = float(vals.mean())
        bssd = float(((vals - bmean) ** 2).sum())
        tot = count + size
        d = bmean - mean
        mean += d * size / tot
        ssd += bssd + d * d * count * size / tot
        count = tot
        offset += size
    se = float(np.sqrt(ssd / (count - 1) / count)) if count > 1 else 0.0
    return MCEstimate(mean, se, count, cfg.seed)


def dual_cosine_of_funk(f: ScalarField, v, alpha: float, cfg: MCConfig,
                        inner_samples: int = 1000, k: int | None = None,
                        unsafe: bool = False) -> MCEstimate:
    """Dual cosine transform applied to the fiber average of f, at the point v.

    Outer draws are k-frames with the determinant kernel against v; each
    inner stage averages f over the fiber orthogonal to the outer frame.
    """
    varr = frame_array(v, n=f.n)
    n, m = varr.shape
    kk = k if k is not None else m
    if m > kk:
        raise DimensionError(f"cosine kernel vanishes identically for m > k (m = {m}, k = {kk})")
    if kk + f.m > n:
        raise DimensionError(f"fiber requires k + m <= n (k = {kk}, m = {f.m}, n = {n})")
    _check_alpha(alpha, m, unsafe)
    expo = (alpha - kk) / 2.0

    def prepare(us):
        return complement_batch(us)

    def weight(us):
        return _det_power(gram_vu(us, varr), expo)

    def inner(ws, i, rng, ns):
        vs = fiber_batch(ws[i], f.m, rng, ns)
        return float(np.mean(f.eval_batch(vs)))

    return nested_estimate(
        lambda rng, size: haar_stiefel_batch(n, kk, rng, size), prepare, weight, inner, cfg, inner_samples
    )


def m_of_funk(f: ScalarField, v, beta: float, cfg: MCConfig, inner_samples: int = 1000,
              unsafe: bool = False) -> MCEstimate:
    """Equal-rank cosine transform of the equal-rank fiber average of f, at v."""
    varr = frame_array(v, n=f.n, m=f.m)
    n, m = varr.shape
    if 2 * m > n:
        raise DimensionError(f"equal-rank fiber requires 2m <= n (m = {m}, n = {n})")
    _check_alpha(beta, m, unsafe)
    expo = (beta - m) / 2.0

    def prepare(ws):
        return complement_batch(ws)

    def weight(ws):
        return _det_power(gram_vu(ws, varr), expo)

    def inner(comps, i, rng, ns):
        vs = fiber_batch(comps[i], m, rng, ns)
        return float(np.mean(f.eval_batch(vs)))

    return nested_estimate(
        lambda rng, size: haar_stiefel_batch(n, m, rng, size), prepare, weight, inner, cfg, inner_samples
    )


def funk_of_m(f: ScalarField, u, beta: float, cfg: MCConfig, inner_samples: int = 1000,
              unsafe: bool = False) -> MCEstimate:
    """Fiber average (over frames orthogonal to u) of the equal-rank cosine
    transform of f."""
    uarr = frame_array(u, n=f.n)
    n, k = uarr.shape
    m = f.m
    if k + m > n:
        raise DimensionError(f"fiber requires k + m <= n (k = {k}, m = {m}, n = {n})")
    _check_alpha(beta, m, unsafe)
    w = orth_complement_frame(uarr)
    expo = (beta - m) / 2.0

    def inner(pts, i, rng, ns):
        ws = haar_stiefel_batch(n, m, rng, ns)
        kern = _det_power(gram_uv(pts[i], ws), expo)
        return float(np.mean(np.asarray(f.eval_batch(ws), dtype=float) * kern))

    return nested_estimate(
        lambda rng, size: fiber_batch(w, m, rng, size), None, None, inner, cfg, inner_samples
    )


def dual_funk_of_funk(f: ScalarField, v, cfg: MCConfig, k: int) -> MCEstimate:
    """Back-projection chain: average f over two orthogonality steps.

    An outer k-frame u is drawn uniformly from the fiber orthogonal to v,
    then an m-frame orthogonal to u; this single unbiased chain realizes the
    dual fiber average of the fiber average of f without nesting.
    """
    varr = frame_array(v, n=f.n)
    n, m = varr.shape
    if m + k > n or k + f.m > n:
        raise DimensionError(f"chain requires m + k <= n and k + m <= n (m = {m}, k = {k}, n = {n})")
    wv = orth_complement_frame(varr)

    def sampler(rng, size):
        thetas = haar_stiefel_batch(n - m, k, rng, size)
        us = np.einsum("nj,bjk->bnk", wv, thetas)
        wus = complement_batch(us)
        oms = haar_stiefel_batch(n - k, f.m, rng, size)
        return np.einsum("bnj,bjm->bnm", wus, oms)

    return estimate(f.eval_batch, sampler, cfg)
