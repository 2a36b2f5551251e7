"""Small dense real-matrix substrate.

Factorizations, principal minors, polar coordinates, and deterministic frame
completions for n x m matrices with n, m of desk scale (single digits).
Everything is value-semantic: functions never mutate their arguments, and the
wrapper types hold read-only copies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotPositiveDefinite, RankDeficient

FRAME_TOL = 1e-10
SYMMETRY_TOL = 1e-12
RANK_TOL = 1e-10


def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    arr = np.array(getattr(a, "mat", a), dtype=float, copy=True)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"{name} must be a nonempty 2-d array, got shape {arr.shape}")
    return arr


def max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass(frozen=True)
class Frame:
    """An n x m matrix with orthonormal columns (a point of V_{n,m}).

    Construction validates ``||v'v - I||_max <= tol`` and rejects otherwise;
    use :meth:`orthonormalize` to project a full-rank matrix onto the
    manifold first.
    """

    mat: np.ndarray
    tol: float = FRAME_TOL

    def __post_init__(self):
        arr = _as_matrix(self.mat, "frame")
        n, m = arr.shape
        if n < m:
            raise DimensionError(f"frame needs n >= m, got {n} x {m}")
        resid = max_abs(arr.T @ arr - np.eye(m))
        if resid > self.tol:
            raise RankDeficient(
                f"columns not orthonormal: ||v'v - I||_max = {resid:.3e} > {self.tol:.1e}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "mat", arr)

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    @property
    def m(self) -> int:
        return self.mat.shape[1]

    @classmethod
    def orthonormalize(cls, a, tol: float = FRAME_TOL) -> "Frame":
        """Nearest-frame projection of a full-column-rank matrix."""
        arr = _as_matrix(a, "frame")
        u, s, vt = np.linalg.svd(arr, full_matrices=False)
        if s[-1] <= RANK_TOL * s[0]:
            raise RankDeficient("matrix is rank deficient, no frame projection")
        return cls(u @ vt, tol=tol)


@dataclass(frozen=True)
class SpdMatrix:
    """A symmetric positive definite m x m matrix (a point of the cone)."""

    mat: np.ndarray

    def __post_init__(self):
        arr = _as_matrix(self.mat, "spd matrix")
        if arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"spd matrix must be square, got {arr.shape}")
        asym = max_abs(arr - arr.T)
        if asym > SYMMETRY_TOL * max(1.0, max_abs(arr)):
            raise NotPositiveDefinite(f"matrix not symmetric: max|r_ij - r_ji| = {asym:.3e}")
        arr = 0.5 * (arr + arr.T)
        try:
            np.linalg.cholesky(arr)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("matrix has a nonpositive eigenvalue") from None
        arr.setflags(write=False)
        object.__setattr__(self, "mat", arr)

    @property
    def m(self) -> int:
        return self.mat.shape[0]


def frame_array(v, n: int | None = None, m: int | None = None) -> np.ndarray:
    """Coerce a Frame or array to a validated (n, m) frame array."""
    arr = Frame(_as_matrix(v, "frame")).mat if not isinstance(v, Frame) else v.mat
    if n is not None and arr.shape[0] != n:
        raise DimensionError(f"expected {n} rows, got {arr.shape[0]}")
    if m is not None and arr.shape[1] != m:
        raise DimensionError(f"expected {m} columns, got {arr.shape[1]}")
    return arr


def spd_array(r) -> np.ndarray:
    return SpdMatrix(_as_matrix(r, "spd matrix")).mat if not isinstance(r, SpdMatrix) else r.mat


def gram(v) -> np.ndarray:
    """v'v, exactly symmetric by construction."""
    arr = _as_matrix(v, "matrix")
    g = arr.T @ arr
    return 0.5 * (g + g.T)


def cholesky_upper(r) -> np.ndarray:
    """Upper-triangular t with positive diagonal and t't = r."""
    arr = spd_array(r)
    try:
        lower = np.linalg.cholesky(arr)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("cholesky pivot <= 0") from None
    return lower.T.copy()


def principal_minors(r) -> np.ndarray:
    """Leading principal minors (det of the i x i top-left blocks), i = 1..m."""
    arr = spd_array(r)
    m = arr.shape[0]
    minors = np.array([np.linalg.det(arr[: i + 1, : i + 1]) for i in range(m)])
    if np.any(minors <= 0.0):
        bad = int(np.argmax(minors <= 0.0))
        raise NotPositiveDefinite(f"principal minor {bad + 1} is nonpositive")
    return minors


def spd_sqrt(r) -> np.ndarray:
    """Symmetric square root via eigendecomposition."""
    arr = spd_array(r)
    w, q = np.linalg.eigh(arr)
    if w[0] <= 0.0:
        raise NotPositiveDefinite("nonpositive eigenvalue in square root")
    return (q * np.sqrt(w)) @ q.T


def polar_decompose(x) -> tuple[Frame, SpdMatrix]:
    """Split x = v r^{1/2} with v a frame and r = x'x positive definite.

    r^{1/2} is the symmetric square root, so v = x (x'x)^{-1/2}.
    """
    arr = _as_matrix(x, "matrix")
    n, m = arr.shape
    if n < m:
        raise DimensionError(f"polar decomposition needs n >= m, got {n} x {m}")
    u, s, vt = np.linalg.svd(arr, full_matrices=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise RankDeficient(
            f"rank test failed: smallest singular value {s[-1]:.3e} <= {RANK_TOL:.0e} * largest"
        )
    v = u @ vt
    r = gram(arr)
    return Frame(v), SpdMatrix(r)


def _complement_columns(u: np.ndarray, order) -> np.ndarray:
    """Gram-Schmidt complement of span(u) built from standard basis vectors.

    Candidates are visited in ``order``; at each step the candidate with the
    largest residual norm is selected (ties resolved to the earliest), with a
    second orthogonalization pass for accuracy.
    """
    n, k = u.shape
    cols: list[np.ndarray] = []

    def residual(i: int) -> np.ndarray:
        w = np.zeros(n)
        w[i] = 1.0
        for _ in range(2):
            w = w - u @ (u.T @ w)
            for c in cols:
                w = w - c * (c @ w)
        return w

    remaining = list(order)
    for _ in range(n - k):
        best_i = None
        best_norm = -1.0
        best_w = None
        for i in remaining:
            w = residual(i)
            nw = float(np.linalg.norm(w))
            if nw > best_norm + 1e-12:
                best_i, best_norm, best_w = i, nw, w
        remaining.remove(best_i)
        cols.append(best_w / best_norm)
    return np.column_stack(cols) if cols else np.zeros((n, 0))


def orth_complement_frame(u, policy: str = "canonical", rng: np.random.Generator | None = None) -> np.ndarray:
    """An (n-k)-frame spanning the orthogonal complement of span(u).

    The default policy is deterministic: standard basis vectors in index
    order with largest-residual pivoting, so the canonical bottom-identity
    frame maps to the top-identity complement.  ``policy="random"`` permutes
    the candidate order using ``rng`` (integrals over the complement fiber
    are invariant under this choice).
    """
    arr = frame_array(u)
    n, k = arr.shape
    if k >= n:
        raise DimensionError(f"complement requires k < n, got k = {k}, n = {n}")
    if policy == "canonical":
        order = range(n)
    elif policy == "random":
        if rng is None:
            raise ValueError("random policy needs an rng")
        order = rng.permutation(n)
    else:
        raise ValueError(f"unknown completion policy {policy!r}")
    return _complement_columns(arr, order)


def frame_completion(u, policy: str = "canonical", rng: np.random.Generator | None = None) -> np.ndarray:
    """Orthogonal n x n matrix g with g u0 = u, u0 the bottom-identity frame.

    The last k columns of g equal u; the first n - k columns are the
    deterministic complement of span(u).
    """
    arr = frame_array(u)
    n, k = arr.shape
    if k == n:
        return arr.copy()
    comp = orth_complement_frame(arr, policy=policy, rng=rng)
    return np.hstack([comp, arr])


def solve_spd(r, b) -> np.ndarray:
    """Solve r x = b for symmetric positive definite r via Cholesky."""
    arr = spd_array(r)
    t = cholesky_upper(arr)
    y = np.linalg.solve(t.T, b)
    return np.linalg.solve(t, y)
