"""Evaluatable scalar fields on Stiefel manifolds and the built-in probe
library used by identity fixtures.

A field carries its manifold shape (n, m) and a vectorized evaluator over
(B, n, m) stacks.  Fields declaring right orthogonal invariance are
spot-checked at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import DimensionError
from .linalg import Frame
from .manifold import RandomSource, derived_seed, haar_stiefel_batch

_SPOT_CHECK_PAIRS = 100
_SPOT_CHECK_TOL = 1e-9
_SPOT_CHECK_SEED = 0x5F1E7D


@dataclass(frozen=True)
class ScalarField:
    """A named scalar function on V_{n,m} with a batched evaluator.

    ``right_invariant`` asserts f(v g) = f(v) for every orthogonal g acting
    on the right; the assertion is verified on random pairs when the field
    is built.
    """

    name: str
    n: int
    m: int
    eval_batch: Callable[[np.ndarray], np.ndarray]
    right_invariant: bool = False
    skip_invariance_check: bool = dc_field(default=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise DimensionError(f"field shape needs 1 <= m <= n, got ({self.n}, {self.m})")
        if self.right_invariant and not self.skip_invariance_check:
            self._spot_check()

    def _spot_check(self):
        rng = RandomSource(derived_seed(_SPOT_CHECK_SEED, self.n, self.m), 0).generator()
        vs = haar_stiefel_batch(self.n, self.m, rng, _SPOT_CHECK_PAIRS)
        gs = haar_stiefel_batch(self.m, self.m, rng, _SPOT_CHECK_PAIRS)
        base = np.asarray(self.eval_batch(vs), dtype=float)
        rotated = np.asarray(self.eval_batch(np.einsum("bnm,bmk->bnk", vs, gs)), dtype=float)
        err = np.max(np.abs(base - rotated) / np.maximum(1.0, np.abs(base)))
        if err > _SPOT_CHECK_TOL:
            raise ValueError(
                f"field {self.name!r} declared right-invariant but f(vg) deviates by {err:.2e}"
            )

    def __call__(self, v) -> float | np.ndarray:
        arr = v.mat if isinstance(v, Frame) else np.asarray(v, dtype=float)
        if arr.ndim == 2:
            return float(np.asarray(self.eval_batch(arr[None]))[0])
        return np.asarray(self.eval_batch(arr), dtype=float)


def canonical_frame(n: int, m: int) -> np.ndarray:
    """The bottom-identity frame: zeros on top, the identity in the last m rows."""
    v0 = np.zeros((n, m))
    v0[n - m:, :] = np.eye(m)
    return v0


def constant(n: int, m: int, c: float = 1.0) -> ScalarField:
    return ScalarField(f"const:c={c:g}", n, m, lambda vs: np.full(vs.shape[0], float(c)),
                       right_invariant=True, skip_invariance_check=True)


def coordinate_square(n: int, m: int, i: int = 0, j: int = 0) -> ScalarField:
    """f(v) = v_ij^2.  Not right-invariant for m > 1."""
    if not (0 <= i < n and 0 <= j < m):
        raise DimensionError(f"coordinate ({i}, {j}) outside a {n} x {m} frame")
    return ScalarField(
        f"coord-square:i={i},j={j}", n, m,
        lambda vs: vs[:, i, j] ** 2,
        right_invariant=(m == 1),
    )


def minor_power(n: int, m: int, p: float = 1.0, w: np.ndarray | str = "canonical",
                w_m: int | None = None) -> ScalarField:
    """f(v) = det(w'vv'w)^p for a reference frame w with at most m columns.

    Right-invariant by construction.  For k-frames v and an m-column w this
    is the minor-power kernel used by the dual transforms.
    """
    if isinstance(w, str):
        if w != "canonical":
            raise ValueError(f"unknown reference frame spec {w!r}")
        wm = w_m if w_m is not None else m
        wref = canonical_frame(n, wm)
    else:
        wref = np.asarray(w, dtype=float)
    if wref.shape[0] != n or wref.shape[1] > m:
        raise DimensionError(f"reference frame shape {wref.shape} incompatible with ({n}, {m})")

    def ev(vs: np.ndarray) -> np.ndarray:
        # gram of w'v on the w side, so the determinant stays generically nonzero
        a = np.einsum("nj,bnm->bjm", wref, vs)
        g = np.einsum("bjm,blm->bjl", a, a)
        d = np.abs(np.linalg.det(g))
        return d ** p

    return ScalarField(f"minor-power:p={p:g}", n, m, ev, right_invariant=True)


def trace_quadratic(n: int, m: int, a: np.ndarray | None = None, seed: int = 1) -> ScalarField:
    """f(v) = tr(v' A v) for a fixed symmetric A.  Right-invariant."""
    if a is None:
        rng = RandomSource(derived_seed(seed, 0xA11CE), 0).generator()
        g = rng.standard_normal((n, n))
        a = 0.5 * (g + g.T)
    a = np.asarray(a, dtype=float)
    if a.shape != (n, n):
        raise DimensionError(f"quadratic form must be {n} x {n}, got {a.shape}")
    return ScalarField(
        f"trace-quad:seed={seed}", n, m,
        lambda vs: np.einsum("bnm,nk,bkm->b", vs, a, vs),
        right_invariant=True,
    )


def random_polynomial(n: int, m: int, seed: int = 1) -> ScalarField:
    """A seeded degree-2 polynomial with linear, quadratic, and minor terms.

    Deliberately not right-invariant (the linear term breaks it); used where
    identities must hold for general integrable fields.
    """
    rng = RandomSource(derived_seed(seed, 0xB0B), 0).generator()
    lin = rng.standard_normal((n, m))
    g = rng.standard_normal((n, n))
    quad = 0.5 * (g + g.T)
    c0 = float(rng.standard_normal())
    wref = haar_stiefel_batch(n, m, rng, 1)[0]

    def ev(vs: np.ndarray) -> np.ndarray:
        linear = np.einsum("nm,bnm->b", lin, vs)
        quadr = np.einsum("bnm,nk,bkm->b", vs, quad, vs)
        a = np.einsum("nj,bnm->bjm", wref, vs)
        gmat = np.einsum("bjm,blm->bjl", a, a)
        return c0 + linear + quadr + np.abs(np.linalg.det(gmat))

    return ScalarField(f"poly:seed={seed}", n, m, ev, right_invariant=False)


def averaged_over_right(f: ScalarField, draws: int = 32, seed: int = 7) -> ScalarField:
    """The right-rotation average of f over a fixed set of orthogonal draws.

    Approximates the exact group average; with f integrable the fiber
    averages of f and of its group average agree.
    """
    rng = RandomSource(derived_seed(seed, 0xAE3), 0).generator()
    gs = haar_stiefel_batch(f.m, f.m, rng, draws)

    def ev(vs: np.ndarray) -> np.ndarray:
        acc = np.zeros(vs.shape[0])
        for g in gs:
            acc += np.asarray(f.eval_batch(vs @ g), dtype=float)
        return acc / draws

    return ScalarField(f"right-avg({f.name})", f.n, f.m, ev, right_invariant=False)


# ---------------------------------------------------------------------------
# Name registry
# ---------------------------------------------------------------------------

_BUILDERS = {
    "const": constant,
    "coord-square": coordinate_square,
    "minor-power": minor_power,
    "trace-quad": trace_quadratic,
    "poly": random_polynomial,
}


def field_registry() -> list[str]:
    """Names accepted by :func:`make_field`."""
    return sorted(_BUILDERS)


def _parse_value(raw: str):
    if raw == "canonical":
        return raw
    try:
        return int(raw)
    except ValueError:
        return float(raw)


def make_field(spec: str, n: int, m: int) -> ScalarField:
    """Build a probe field from a CLI-style spec string.

    Format: ``name`` or ``name:key=val,key=val``, e.g.
    ``minor-power:p=0.5,w=canonical`` or ``poly:seed=3``.
    """
    name, _, rest = spec.partition(":")
    if name not in _BUILDERS:
        raise ValueError(f"unknown field {name!r}; available: {', '.join(field_registry())}")
    kwargs = {}
    if rest:
        for part in rest.split(","):
            key, _, raw = part.partition("=")
            if not raw:
                raise ValueError(f"malformed field option {part!r}")
            kwargs[key.strip()] = _parse_value(raw.strip())
    return _BUILDERS[name](n, m, **kwargs)


def default_probe_fields(n: int, m: int, count: int = 3) -> list[ScalarField]:
    """Probe set mixing invariant and non-invariant fields for constant fits."""
    probes = [
        minor_power(n, m, p=1.0),
        trace_quadratic(n, m, seed=2),
        constant(n, m, 1.0),
        random_polynomial(n, m, seed=3),
        minor_power(n, m, p=0.5),
    ]
    return probes[:count]
