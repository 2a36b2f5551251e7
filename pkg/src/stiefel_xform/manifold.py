"""Haar-uniform sampling on orthogonal groups and Stiefel manifolds, and the
shared Monte Carlo estimation kernel.

Sampling is exact: QR of a standard Gaussian matrix with the sign of the
R diagonal forced positive gives the invariant distribution.  The estimator
splits work into fixed-size blocks, each drawing from its own counter-derived
random stream, so results depend only on (seed, samples) and shards merely
parallelize.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, NonFiniteSample, NotPositiveDefinite, OutOfRegion
from .linalg import Frame, frame_array, spd_array, spd_sqrt

BLOCK = 32768


@dataclass(frozen=True)
class RandomSource:
    """A reproducible random stream: (seed, stream) fully determine the draws.

    Distinct streams derived from the same seed are statistically
    independent (seed-sequence spawning).
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))


def derived_seed(seed: int, *keys: int) -> int:
    """A 64-bit seed deterministically derived from a base seed and tags."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(k) & (2**32 - 1) for k in keys))
    state = ss.generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo budget and tolerance settings."""

    samples: int = 200_000
    seed: int = 12345
    shards: int = 1
    z_tol: float = 4.0
    abs_tol: float = 1e-9

    def __post_init__(self):
        if self.samples < 100:
            raise ValueError(f"samples must be >= 100, got {self.samples}")
        if self.shards < 1:
            raise ValueError(f"shards must be >= 1, got {self.shards}")
        if not self.z_tol > 0:
            raise ValueError(f"z_tol must be positive, got {self.z_tol}")

    def with_(self, **kw) -> "MCConfig":
        base = {"samples": self.samples, "seed": self.seed, "shards": self.shards,
                "z_tol": self.z_tol, "abs_tol": self.abs_tol}
        base.update(kw)
        return MCConfig(**base)


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo mean with its standard error."""

    mean: float
    se: float
    samples: int
    seed: int

    def __post_init__(self):
        if self.se < 0:
            raise ValueError(f"standard error must be nonnegative, got {self.se}")
        if self.samples < 1:
            raise ValueError(f"sample count must be positive, got {self.samples}")

    def scaled(self, c: float) -> "MCEstimate":
        return MCEstimate(c * self.mean, abs(c) * self.se, self.samples, self.seed)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "se": self.se, "samples": self.samples, "seed": self.seed}


def exact_estimate(value: float, cfg: MCConfig | None = None) -> MCEstimate:
    """Wrap a closed-form or quadrature value as a zero-error estimate.

    The unit sample count marks a deterministic value, not a Monte Carlo mean.
    """
    return MCEstimate(float(value), 0.0, 1, cfg.seed if cfg else 0)


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def haar_stiefel_batch(n: int, m: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """(size, n, m) stack of invariant-uniform frames.

    Reduced QR of Gaussian matrices; multiplying each Q column by the sign of
    the corresponding R diagonal entry removes the sign ambiguity that would
    otherwise bias the distribution.
    """
    if not 1 <= m <= n:
        raise DimensionError(f"need 1 <= m <= n, got n = {n}, m = {m}")
    g = rng.standard_normal((size, n, m))
    q, r = np.linalg.qr(g)
    d = np.einsum("bjj->bj", r)
    signs = np.where(d < 0.0, -1.0, 1.0)
    return q * signs[:, None, :]


def complement_batch(us: np.ndarray) -> np.ndarray:
    """(B, n, n-k) orthonormal complements of a stack of (B, n, k) frames.

    Any measurable complement choice induces the same fiber distribution, so
    the complete-QR complement is used here for speed; the deterministic
    pivoted completion lives in :mod:`stiefel_xform.linalg`.
    """
    k = us.shape[2]
    q, _ = np.linalg.qr(us, mode="complete")
    return q[:, :, k:]


def sample_orthogonal(n: int, rand: RandomSource, size: int | None = None):
    """Invariant-uniform orthogonal matrices; a Frame when size is None."""
    rng = rand.generator()
    batch = haar_stiefel_batch(n, n, rng, size or 1)
    if size is None:
        return Frame(batch[0])
    return batch


def sample_stiefel(n: int, m: int, rand: RandomSource, size: int | None = None):
    """Invariant-uniform frames on V_{n,m}; a Frame when size is None."""
    rng = rand.generator()
    batch = haar_stiefel_batch(n, m, rng, size or 1)
    if size is None:
        return Frame(batch[0])
    return batch


def fiber_batch(w: np.ndarray, m: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform m-frames inside the column span of the complement frame w."""
    nk = w.shape[1]
    om = haar_stiefel_batch(nk, m, rng, size)
    return np.einsum("nj,bjm->bnm", w, om)


def sample_fiber(u, m: int, rand: RandomSource, size: int | None = None):
    """Uniform m-frames orthogonal to the k-frame u.

    The draw is w @ omega with w a fixed complement frame of u and omega
    invariant-uniform on V_{n-k,m}; the result does not depend on the
    complement choice in distribution.
    """
    arr = frame_array(u)
    n, k = arr.shape
    if k + m > n:
        raise DimensionError(f"fiber requires k + m <= n, got k = {k}, m = {m}, n = {n}")
    from .linalg import orth_complement_frame

    w = orth_complement_frame(arr)
    rng = rand.generator()
    batch = fiber_batch(w, m, rng, size or 1)
    if size is None:
        return Frame(batch[0])
    return batch


def bistiefel_compose(a, u) -> Frame:
    """Assemble the frame [a; u (I - a'a)^{1/2}] from a coordinate block a
    and a residual frame u."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    uarr = frame_array(u)
    m = a.shape[1]
    if uarr.shape[1] != m:
        raise DimensionError(f"block has {m} columns but residual frame has {uarr.shape[1]}")
    s = np.eye(m) - a.T @ a
    w = np.linalg.eigvalsh(0.5 * (s + s.T))
    if w[0] <= 0.0:
        raise OutOfRegion("I - a'a is not positive definite")
    return Frame(np.vstack([a, uarr @ spd_sqrt(s)]))


def bistiefel_weight(a, n: int, k: int, m: int) -> float:
    """Jacobian weight det(I - a'a)^{(n-k)/2 - (m+1)/2} of the block split."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape != (k, m):
        raise DimensionError(f"expected a {k} x {m} block, got {a.shape}")
    s = np.eye(m) - a.T @ a
    w = np.linalg.eigvalsh(0.5 * (s + s.T))
    if w[0] <= 0.0:
        raise OutOfRegion("I - a'a is not positive definite")
    delta = (n - k) / 2.0 - (m + 1) / 2.0
    return float(np.prod(w) ** delta)


def polar_weight(r, n: int, m: int) -> float:
    """Radial density 2^{-m} det(r)^{(n-m-1)/2} of the polar split."""
    arr = spd_array(r)
    if arr.shape[0] != m:
        raise DimensionError(f"expected an {m} x {m} matrix, got {arr.shape}")
    det = float(np.linalg.det(arr))
    if det <= 0.0:
        raise NotPositiveDefinite("polar weight needs a positive definite r")
    return 2.0 ** (-m) * det ** ((n - m - 1) / 2.0)


# ---------------------------------------------------------------------------
# Estimation kernel
# ---------------------------------------------------------------------------


def _merge(n1: int, m1: float, s1: float, n2: int, m2: float, s2: float) -> tuple[int, float, float]:
    # parallel Welford combine of (count, mean, sum of squared deviations)
    if n2 == 0:
        return n1, m1, s1
    if n1 == 0:
        return n2, m2, s2
    n = n1 + n2
    d = m2 - m1
    return n, m1 + d * n2 / n, s1 + s2 + d * d * n1 * n2 / n


def _block_sizes(total: int) -> list[int]:
    sizes = [BLOCK] * (total // BLOCK)
    if total % BLOCK:
        sizes.append(total % BLOCK)
    return sizes


def estimate(
    integrand: Callable,
    sampler: Callable[[np.random.Generator, int], object],
    cfg: MCConfig,
    max_workers: int | None = None,
) -> MCEstimate:
    """Mean and standard error of integrand(sampler draws) over cfg.samples.

    Work is split into fixed-size blocks; block b draws from the stream
    RandomSource(cfg.seed, b), and partial results are merged in block order.
    The value therefore depends only on (seed, samples); cfg.shards controls
    how blocks are grouped for parallel execution, not the result.

    Raises ``NonFiniteSample`` (with the global sample index) if the
    integrand produces NaN or infinity.
    """
    fn = getattr(integrand, "eval_batch", integrand)
    sizes = _block_sizes(cfg.samples)

    def run_block(b: int) -> tuple[int, float, float]:
        rng = RandomSource(cfg.seed, b).generator()
        points = sampler(rng, sizes[b])
        vals = np.asarray(fn(points), dtype=float)
        if vals.shape != (sizes[b],):
            raise DimensionError(f"integrand returned shape {vals.shape}, expected ({sizes[b]},)")
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmin(np.isfinite(vals)))
            offset = sum(sizes[:b])
            raise NonFiniteSample(f"non-finite integrand value at sample {offset + bad}", index=offset + bad)
        mean = float(vals.mean())
        return sizes[b], mean, float(((vals - mean) ** 2).sum())

    nblocks = len(sizes)
    workers = max_workers if max_workers and max_workers > 1 else min(cfg.shards, nblocks)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run_block, range(nblocks)))
    else:
        partials = [run_block(b) for b in range(nblocks)]

    count, mean, ssd = 0, 0.0, 0.0
    for part in partials:
        count, mean, ssd = _merge(count, mean, ssd, *part)
    se = float(np.sqrt(ssd / (count - 1) / count)) if count > 1 else 0.0
    return MCEstimate(mean, se, count, cfg.seed)
