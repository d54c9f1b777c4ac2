"""Vectors, the five normed spaces, and modulus-of-convexity estimates.

Vectors are 1-indexed throughout: ``x.coord(1)`` is the first coordinate.
Storage is a plain float64 numpy array, so ``x.coords[0]`` is coordinate 1.

Norm kinds
----------
euclidean      finite-dimensional l2 on R^dim
lp             l^p on finitely supported sequences, p >= 1 (p = inf allowed)
convex-l1      sum |a_n| + sqrt(sum |a_n|^2 / 16^n); strictly but not
               uniformly convex
nested         l2 over blocks k of the l^(k+1) norm of (x_{2k-1}, x_{2k});
               convex, not uniformly convex
finite-l2      l2 restricted to eventually-zero sequences (incomplete space)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidEpsilon,
    NonFiniteCoordinate,
    OutOfRange,
    SpecParseError,
    UnsupportedVectorKind,
)

LN16 = math.log(16.0)

# Tail truncation tolerance for TailVectors carrying only a certificate.
DEFAULT_TAIL_TOL = 1e-15


class FiniteVector:
    """Finitely supported real vector with 1-based coordinates.

    Equality ignores trailing zeros, so ``FiniteVector([1, 2])`` equals
    ``FiniteVector([1, 2, 0, 0])``.
    """

    __slots__ = ("coords",)

    def __init__(self, coords):
        arr = np.array(coords, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0]) + 1
            raise NonFiniteCoordinate(f"coordinate {bad} is not finite")
        arr.flags.writeable = False
        self.coords = arr

    @classmethod
    def basis(cls, i: int, scale: float = 1.0) -> "FiniteVector":
        if i < 1:
            raise ValueError("basis index is 1-based")
        c = np.zeros(i)
        c[i - 1] = scale
        return cls(c)

    def coord(self, i: int) -> float:
        if i < 1:
            raise IndexError("coordinates are 1-indexed")
        return float(self.coords[i - 1]) if i <= len(self.coords) else 0.0

    def __len__(self):
        return len(self.coords)

    def support_size(self) -> int:
        nz = np.flatnonzero(self.coords)
        return int(nz[-1]) + 1 if nz.size else 0

    def trimmed(self) -> np.ndarray:
        return self.coords[: self.support_size()]

    def padded(self, length: int) -> np.ndarray:
        if length < len(self.coords):
            if np.any(self.coords[length:]):
                raise DimensionMismatch(
                    f"vector has support beyond index {length}"
                )
            return self.coords[:length].copy()
        out = np.zeros(length)
        out[: len(self.coords)] = self.coords
        return out

    def _aligned(self, other):
        other = as_finite(other)
        n = max(len(self.coords), len(other.coords))
        return self.padded(n), other.padded(n)

    def __add__(self, other):
        a, b = self._aligned(other)
        return FiniteVector(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._aligned(other)
        return FiniteVector(a - b)

    def __rsub__(self, other):
        a, b = self._aligned(other)
        return FiniteVector(b - a)

    def __neg__(self):
        return FiniteVector(-self.coords)

    def __mul__(self, scalar):
        return FiniteVector(self.coords * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return FiniteVector(self.coords / float(scalar))

    def __eq__(self, other):
        if not isinstance(other, (FiniteVector, TailVector)):
            return NotImplemented
        a, b = self._aligned(other)
        return bool(np.array_equal(a, b))

    def __hash__(self):
        return hash(tuple(self.trimmed().tolist()))

    def __repr__(self):
        return f"FiniteVector({self.trimmed().tolist()!r})"


@dataclass(frozen=True)
class TailVector:
    """Sequence given coordinate-wise.

    Either ``support`` (last possibly-nonzero index) or ``certificate``
    ``(K, bound_fn)`` must be given; the certificate promises
    ``|coord_fn(i)| <= bound_fn(i)`` for every ``i > K``.
    """

    coord_fn: Callable[[int], float]
    support: Optional[int] = None
    certificate: Optional[tuple] = None

    def __post_init__(self):
        if self.support is not None and self.support < 0:
            raise ValueError("support must be non-negative")

    def materialize(self, tail_tol: float = DEFAULT_TAIL_TOL) -> FiniteVector:
        if self.support is not None:
            return FiniteVector([self.coord_fn(i) for i in range(1, self.support + 1)])
        if self.certificate is None:
            raise UnsupportedVectorKind(
                "TailVector without support bound or tail certificate"
            )
        K, bound_fn = self.certificate
        vals = [self.coord_fn(i) for i in range(1, K + 1)]
        # extend until the certified bound drops under tail_tol * 2^-(i-K),
        # which caps the discarded mass at tail_tol for any l^p, p >= 1
        i = K + 1
        while bound_fn(i) > tail_tol * 2.0 ** (-(i - K)):
            vals.append(self.coord_fn(i))
            i += 1
            if i - K > 100_000:
                raise UnsupportedVectorKind("tail certificate decays too slowly")
        return FiniteVector(vals)

    def coord(self, i: int) -> float:
        if self.support is not None and i > self.support:
            return 0.0
        return float(self.coord_fn(i))


Vector = Union[FiniteVector, TailVector]


def as_finite(x) -> FiniteVector:
    if isinstance(x, FiniteVector):
        return x
    if isinstance(x, TailVector):
        return x.materialize()
    if isinstance(x, (list, tuple, np.ndarray)):
        return FiniteVector(x)
    raise UnsupportedVectorKind(f"cannot interpret {type(x).__name__} as a vector")


# ---------------------------------------------------------------------------
# spaces

EUCLIDEAN = "euclidean"
LP = "lp"
CONVEX_L1 = "convex-l1"
NESTED = "nested"
FINITE_L2 = "finite-l2"
KINDS = (EUCLIDEAN, LP, CONVEX_L1, NESTED, FINITE_L2)


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    dim: Optional[int] = None
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecParseError(f"unknown space kind {self.kind!r}")
        if self.kind == EUCLIDEAN and (self.dim is None or self.dim < 1):
            raise SpecParseError("euclidean space needs dim >= 1")
        if self.kind == LP and (self.p is None or not self.p >= 1):
            raise SpecParseError("lp space needs p >= 1")

    @classmethod
    def euclidean(cls, dim: int) -> "SpaceSpec":
        return cls(EUCLIDEAN, dim=int(dim))

    @classmethod
    def lp(cls, p: float) -> "SpaceSpec":
        return cls(LP, p=float(p))

    @classmethod
    def convex_l1(cls) -> "SpaceSpec":
        return cls(CONVEX_L1)

    @classmethod
    def nested(cls) -> "SpaceSpec":
        return cls(NESTED)

    @classmethod
    def finite_l2(cls) -> "SpaceSpec":
        return cls(FINITE_L2)

    @property
    def finite_dimensional(self) -> bool:
        return self.kind == EUCLIDEAN

    def __str__(self):
        if self.kind == EUCLIDEAN:
            return f"euclidean:{self.dim}"
        if self.kind == LP:
            return f"lp:{self.p:g}"
        return self.kind


def parse_space(text: str) -> SpaceSpec:
    """Parse ``euclidean:3``, ``lp:1.5``, ``convex-l1``, ``nested``, ``finite-l2``."""
    head, _, arg = text.strip().partition(":")
    try:
        if head == EUCLIDEAN:
            return SpaceSpec.euclidean(int(arg))
        if head == LP:
            return SpaceSpec.lp(float(arg))
    except ValueError as exc:
        raise SpecParseError(f"bad space parameter in {text!r}") from exc
    if head in (CONVEX_L1, NESTED, FINITE_L2) and not arg:
        return SpaceSpec(head)
    raise SpecParseError(f"unknown space {text!r}")


def _scaled_lp_rows(A: np.ndarray, p: float) -> np.ndarray:
    """Row-wise l^p norm of |A| with max-scaling against overflow."""
    A = np.abs(A)
    if A.shape[1] == 0:
        return np.zeros(A.shape[0])
    M = A.max(axis=1)
    if p == math.inf:
        return M
    safe = np.where(M > 0, M, 1.0)
    S = A / safe[:, None]
    return np.where(M > 0, M * np.sum(S**p, axis=1) ** (1.0 / p), 0.0)


def _weighted_l2_root(A: np.ndarray) -> np.ndarray:
    """sqrt(sum |a_i|^2 / 16^i) per row, i 1-based, via log-sum-exp.

    Log terms are 2 ln|a_i| - i ln 16; shifting by the row maximum keeps both
    huge coordinates and double-exponentially small weights in range.
    """
    idx = np.arange(1, A.shape[1] + 1, dtype=np.float64)
    absA = np.abs(A)
    nz = absA > 0
    with np.errstate(divide="ignore"):
        logs = np.where(nz, 2.0 * np.log(np.where(nz, absA, 1.0)) - idx * LN16, -np.inf)
    top = logs.max(axis=1) if A.shape[1] else np.full(A.shape[0], -np.inf)
    finite = np.isfinite(top)
    shift = np.where(finite, top, 0.0)
    with np.errstate(under="ignore"):
        s = np.sum(np.exp(logs - shift[:, None]), axis=1)
        root = np.exp(0.5 * shift) * np.sqrt(s)
    return np.where(finite, root, 0.0)


def _nested_block_norms(A: np.ndarray) -> np.ndarray:
    """Per-block l^(k+1) norms of (x_{2k-1}, x_{2k}); odd widths are zero-padded."""
    rows, width = A.shape
    if width % 2:
        A = np.concatenate([A, np.zeros((rows, 1))], axis=1)
    pairs = np.abs(A).reshape(rows, -1, 2)
    k = np.arange(1, pairs.shape[1] + 1, dtype=np.float64)
    q = k + 1.0
    big = pairs.max(axis=2)
    small = pairs.min(axis=2)
    safe = np.where(big > 0, big, 1.0)
    with np.errstate(under="ignore"):
        ratio_pow = (small / safe) ** q
        blocks = big * (1.0 + ratio_pow) ** (1.0 / q)
    return np.where(big > 0, blocks, 0.0)


def norms(space: SpaceSpec, X: np.ndarray) -> np.ndarray:
    """Norms of the rows of a 2-D array (row i is a vector, column j is coordinate j+1)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if not np.all(np.isfinite(X)):
        raise NonFiniteCoordinate("non-finite coordinate in norm argument")
    kind = space.kind
    if kind == EUCLIDEAN:
        if X.shape[1] > space.dim and np.any(X[:, space.dim:]):
            raise DimensionMismatch(
                f"vector has support beyond dimension {space.dim}"
            )
        return _scaled_lp_rows(X, 2.0)
    if kind == FINITE_L2:
        return _scaled_lp_rows(X, 2.0)
    if kind == LP:
        return _scaled_lp_rows(X, space.p)
    if kind == CONVEX_L1:
        return np.sum(np.abs(X), axis=1) + _weighted_l2_root(X)
    if kind == NESTED:
        return _scaled_lp_rows(_nested_block_norms(X), 2.0)
    raise UnsupportedVectorKind(kind)


def _coords_for(space: SpaceSpec, x) -> np.ndarray:
    if isinstance(x, TailVector):
        if space.kind == FINITE_L2 and x.support is None:
            raise UnsupportedVectorKind("finite-l2 requires an explicit support bound")
        x = x.materialize()
    return as_finite(x).coords


def norm(space: SpaceSpec, x) -> float:
    return float(norms(space, _coords_for(space, x))[0])


def stack(vectors: Sequence, width: Optional[int] = None) -> np.ndarray:
    """Zero-pad a list of vectors into a 2-D row array."""
    vs = [as_finite(v) for v in vectors]
    w = max([len(v) for v in vs] + [width or 0, 1])
    out = np.zeros((len(vs), w))
    for i, v in enumerate(vs):
        out[i, : len(v)] = v.coords
    return out


def direction_gap(space: SpaceSpec, x, y) -> float:
    """|| x/||x|| - y/||y|| ||."""
    a, b = _coords_for(space, x), _coords_for(space, y)
    w = max(len(a), len(b))
    A = np.zeros((2, w))
    A[0, : len(a)] = a
    A[1, : len(b)] = b
    nx, ny = norms(space, A)
    if nx == 0 or ny == 0:
        raise ValueError("direction gap undefined for a zero vector")
    return float(norms(space, A[0] / nx - A[1] / ny)[0])


# ---------------------------------------------------------------------------
# uniform convexity


def _check_epsilon(epsilon: float):
    if not (0.0 < epsilon <= 2.0):
        raise InvalidEpsilon(f"epsilon must lie in (0, 2], got {epsilon!r}")


def hilbert_modulus_closed_form(epsilon: float) -> float:
    """Modulus of convexity of any inner-product space of dimension >= 2."""
    _check_epsilon(epsilon)
    return 2.0 - math.sqrt(4.0 - epsilon * epsilon)


def gamma_from_delta(delta: float) -> float:
    if not (0.0 <= delta <= 2.0):
        raise OutOfRange(f"delta must lie in [0, 2], got {delta!r}")
    return 1.0 - delta / 2.0


@dataclass(frozen=True)
class ConvexityEstimate:
    """Upper bound ``delta_hat`` on the modulus of convexity at ``epsilon``.

    ``witness`` is the unit pair attaining ``||u+v|| = 2 - delta_hat`` or None
    when no eligible pair was seen (then ``delta_hat`` is 2, vacuously).
    """

    epsilon: float
    delta_hat: float
    witness: Optional[tuple] = None
    samples: int = 0
    witness_gap: Optional[float] = None

    @property
    def gamma(self) -> float:
        return 1.0 - self.delta_hat / 2.0

    def as_dict(self) -> dict:
        out = {
            "epsilon": self.epsilon,
            "delta_hat": self.delta_hat,
            "gamma": self.gamma,
            "samples": self.samples,
            "witness_gap": self.witness_gap,
        }
        if self.witness is not None:
            out["witness"] = {
                "u": self.witness[0].trimmed().tolist(),
                "v": self.witness[1].trimmed().tolist(),
            }
        return out


def _sampling_coords(space: SpaceSpec, dim: Optional[int], coords) -> list:
    if coords is not None:
        coords = [int(c) for c in coords]
        if not coords or min(coords) < 1:
            raise ValueError("coords must be a non-empty list of 1-based indices")
        if space.kind == EUCLIDEAN and max(coords) > space.dim:
            raise DimensionMismatch("sampling coordinate outside the space")
        return coords
    if dim is None:
        dim = space.dim if space.kind == EUCLIDEAN else 6
    if space.kind == EUCLIDEAN and dim > space.dim:
        raise DimensionMismatch("sampling dimension exceeds the space dimension")
    return list(range(1, dim + 1))


def sample_unit_pairs(space: SpaceSpec, budget: int, seed: int, dim=None, coords=None):
    """Seeded pool of ``budget`` unit pairs ``(U, V)`` as row arrays.

    Gaussian directions normalized in the space's own norm; only the listed
    1-based ``coords`` are populated.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    cols = _sampling_coords(space, dim, coords)
    width = max(cols)
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((2 * budget, len(cols)))
    P = np.zeros((2 * budget, width))
    P[:, np.array(cols) - 1] = G
    nrm = norms(space, P)
    nrm[nrm == 0] = 1.0
    P /= nrm[:, None]
    return P[:budget], P[budget:]


def _pool_best(space, U, V, epsilon):
    gaps = norms(space, U - V)
    sums = norms(space, U + V)
    eligible = gaps >= epsilon
    return gaps, sums, eligible


def _unit(space, x):
    n = norms(space, x)[0]
    return x / n if n > 0 else x


class _PairSearch:
    """Local refinement of a unit pair maximizing ||u+v|| subject to ||u-v|| >= eps."""

    def __init__(self, space, epsilon, free_cols):
        self.space = space
        self.eps = epsilon
        self.cols = free_cols

    def score(self, u, v):
        gap = norms(self.space, u - v)[0]
        if gap < self.eps:
            return None, gap
        return norms(self.space, u + v)[0], gap

    def chord(self, u, v, best):
        # pull v toward u along the chord until the gap constraint binds
        lo, hi = 0.0, 1.0
        for _ in range(60):
            t = 0.5 * (lo + hi)
            w = _unit(self.space, v + t * (u - v))
            if norms(self.space, u - w)[0] >= self.eps:
                lo = t
            else:
                hi = t
        w = _unit(self.space, v + lo * (u - v))
        s, _ = self.score(u, w)
        if s is not None and s > best:
            return w, s
        return v, best

    def refine(self, u, v, max_sweeps=200):
        best, _ = self.score(u, v)
        v, best = self.chord(u, v, best)
        h = 0.25
        for _ in range(max_sweeps):
            if h <= 1e-10:
                break
            improved = False
            for which in (0, 1):
                for c in self.cols:
                    for sgn in (1.0, -1.0):
                        x = (u if which == 0 else v).copy()
                        x[c - 1] += sgn * h
                        x = _unit(self.space, x)
                        cu, cv = (x, v) if which == 0 else (u, x)
                        s, _ = self.score(cu, cv)
                        if s is not None and s > best:
                            u, v, best = cu, cv, s
                            improved = True
            v2, best2 = self.chord(u, v, best)
            if best2 > best:
                v, best, improved = v2, best2, True
            if not improved:
                h *= 0.5
        return u, v, best


def _estimate_from_pool(space, U, V, epsilon, refine, top, free_cols):
    gaps, sums, eligible = _pool_best(space, U, V, epsilon)
    n = len(U)
    if not np.any(eligible):
        return ConvexityEstimate(epsilon, 2.0, None, n)
    idx = np.flatnonzero(eligible)
    order = idx[np.argsort(-sums[idx], kind="stable")]
    i = order[0]
    best_u, best_v, best_s = U[i], V[i], float(sums[i])
    if refine:
        search = _PairSearch(space, epsilon, free_cols)
        for j in order[:top]:
            u, v, s = search.refine(U[j].copy(), V[j].copy())
            if s > best_s:
                best_u, best_v, best_s = u, v, float(s)
    gap = float(norms(space, best_u - best_v)[0])
    delta_hat = max(0.0, 2.0 - best_s)
    return ConvexityEstimate(
        epsilon,
        delta_hat,
        (FiniteVector(best_u), FiniteVector(best_v)),
        n,
        gap,
    )


def modulus_of_convexity(
    space: SpaceSpec,
    epsilon: float,
    budget: int = 10_000,
    seed: int = 0,
    *,
    dim: Optional[int] = None,
    coords=None,
    refine: bool = True,
    top: int = 3,
) -> ConvexityEstimate:
    """Estimate delta(epsilon) from above by sampling unit pairs.

    A seeded pool of ``budget`` unit pairs is screened for ``||u - v|| >= eps``;
    the ``top`` best eligible pairs are then polished by coordinate descent
    and chord bisection toward the constraint boundary. For infinite-dimensional
    kinds the search lives in the first ``dim`` coordinates (default 6), or in
    the explicit 1-based ``coords``.
    """
    _check_epsilon(epsilon)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    cols = _sampling_coords(space, dim, coords)
    U, V = sample_unit_pairs(space, budget, seed, coords=cols)
    return _estimate_from_pool(space, U, V, epsilon, refine, top, cols)


def modulus_profile(space, epsilons, budget=10_000, seed=0, *, dim=None, coords=None,
                    refine=True, top=3) -> list:
    """Estimates for several epsilons on one shared pool, monotone in epsilon.

    A witness valid at eps is valid at every smaller eps, so each estimate
    takes the best witness over all grid points >= its own epsilon.
    """
    eps_sorted = sorted(float(e) for e in epsilons)
    for e in eps_sorted:
        _check_epsilon(e)
    cols = _sampling_coords(space, dim, coords)
    U, V = sample_unit_pairs(space, budget, seed, coords=cols)
    raw = [_estimate_from_pool(space, U, V, e, refine, top, cols) for e in eps_sorted]
    out = []
    for i, est in enumerate(raw):
        best = min(raw[i:], key=lambda r: r.delta_hat)
        out.append(ConvexityEstimate(est.epsilon, best.delta_hat, best.witness,
                                     est.samples, best.witness_gap))
    return out
