"""Inequality checkers: banded subadditivity scans, the geometric lemma
bound, and uniform-convexity probes on point sets.

Pairs are enumerated by anti-diagonal (fixed s = n + m) with n <= m; the
inequality is symmetric in (n, m), so each unordered pair is checked once.
"""

from __future__ import annotations

import enum
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import report as _report
from .errors import (
    GeneratorFailure,
    HypothesisViolated,
    InvalidEpsilon,
    SpecParseError,
    ZeroVectorInSet,
)
from .sequences import SequenceFamily
from .spaces import ConvexityEstimate, FiniteVector, SpaceSpec, as_finite, norms, stack

DEFAULT_TOLERANCE = 1e-9


class Verdict(str, enum.Enum):
    CONVERGENCE = "ConvergenceEvidence"
    DIVERGENCE = "DivergenceEvidence"
    LIMIT_ZERO = "LimitZeroEvidence"
    INCONCLUSIVE = "Inconclusive"


# ---------------------------------------------------------------------------
# bands

_SAFE_MATH = {
    name: getattr(np, name)
    for name in ("exp", "log", "log2", "log10", "sqrt", "floor", "ceil", "minimum", "maximum")
}
_SAFE_MATH.update(pi=math.pi, e=math.e)


@dataclass(frozen=True)
class ConstraintBand:
    """Index pairs on which subadditivity is asserted.

    ``kind`` is ``full``, ``ratio`` (lo*n <= m <= hi*n) or ``custom``.
    Custom bands take a vectorized ``membership(n, m) -> bool array``.
    Membership is symmetrized: a pair counts if either orientation is in.
    """

    kind: str = "full"
    lo: float = 0.0
    hi: float = math.inf
    membership: Optional[Callable] = field(default=None, compare=False)
    label: Optional[str] = None

    @classmethod
    def full(cls):
        return cls("full")

    @classmethod
    def ratio(cls, lo, hi):
        if not (0 <= lo <= hi):
            raise SpecParseError(f"ratio band needs 0 <= lo <= hi, got {lo}, {hi}")
        return cls("ratio", float(lo), float(hi))

    @classmethod
    def custom(cls, membership, label="custom"):
        return cls("custom", membership=membership, label=label)

    @classmethod
    def window(cls, expr: str):
        """n <= m <= f(n) with f given as an expression in ``n``."""
        code = compile(expr, "<band>", "eval")
        for name in code.co_names:
            if name not in _SAFE_MATH and name != "n":
                raise SpecParseError(f"name {name!r} not allowed in band expression")

        def member(n, m):
            f = eval(code, {"__builtins__": {}}, dict(_SAFE_MATH, n=np.asarray(n, dtype=float)))
            return (np.asarray(n) <= np.asarray(m)) & (np.asarray(m) <= f)

        return cls("custom", membership=member, label=f"window:{expr}")

    def _oriented(self, n, m):
        if self.kind == "full":
            return np.ones(np.shape(n), dtype=bool)
        if self.kind == "ratio":
            return (self.lo * n <= m) & (m <= self.hi * n)
        return np.asarray(self.membership(n, m), dtype=bool)

    def mask(self, n, m) -> np.ndarray:
        n = np.asarray(n)
        m = np.asarray(m)
        return self._oriented(n, m) | self._oriented(m, n)

    def contains(self, n, m) -> bool:
        return bool(self.mask(np.array([n]), np.array([m]))[0])

    def __str__(self):
        if self.kind == "full":
            return "full"
        if self.kind == "ratio":
            return f"ratio:{self.lo:g}:{self.hi:g}"
        return self.label or "custom"


def parse_band(text: str) -> ConstraintBand:
    text = text.strip()
    if text == "full":
        return ConstraintBand.full()
    head, _, rest = text.partition(":")
    if head == "ratio":
        parts = rest.split(":")
        if len(parts) != 2:
            raise SpecParseError(f"ratio band is ratio:<lo>:<hi>, got {text!r}")
        try:
            lo, hi = (float(_frac(p)) for p in parts)
        except ValueError as exc:
            raise SpecParseError(f"bad ratio band {text!r}") from exc
        return ConstraintBand.ratio(lo, hi)
    if head == "window" and rest:
        try:
            return ConstraintBand.window(rest)
        except SyntaxError as exc:
            raise SpecParseError(f"bad window expression {rest!r}") from exc
    raise SpecParseError(f"unknown band {text!r}")


def _frac(s):
    num, slash, den = s.partition("/")
    return float(num) / float(den) if slash else float(num)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class Violation:
    n: int
    m: int
    lhs: float
    rhs: float
    margin: float

    def as_dict(self):
        return {"n": self.n, "m": self.m, "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin}


@dataclass
class SubadditivityReport:
    family: str
    band: str
    max_sum: int
    tolerance: float
    pairs_checked: int
    violations: list
    max_margin: float = -math.inf
    worst_pair: Optional[tuple] = None
    stopped_early: bool = False
    elapsed: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        # elapsed wall time is deliberately left out: reports must be byte-stable
        return {
            "family": self.family,
            "band": self.band,
            "max_sum": self.max_sum,
            "tolerance": self.tolerance,
            "pairs_checked": self.pairs_checked,
            "violations": [v.as_dict() for v in self.violations],
            "max_margin": self.max_margin,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "stopped_early": self.stopped_early,
        }

    def to_json(self) -> str:
        return _report.dumps(self.as_dict())

    def to_csv(self) -> str:
        return _report.rows_to_csv(
            ["n", "m", "lhs", "rhs", "margin"],
            [(v.n, v.m, v.lhs, v.rhs, v.margin) for v in self.violations],
        )

    def summary(self) -> str:
        status = "OK" if self.ok else f"{len(self.violations)} violation(s)"
        line = (f"{self.family} band={self.band} max_sum={self.max_sum}: "
                f"{self.pairs_checked} pairs, {status}, max margin {self.max_margin:.3e}")
        if self.worst_pair:
            line += f" at {self.worst_pair}"
        return line


def default_workers() -> int:
    env = os.environ.get("FEKETE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass
class _Chunk:
    pairs: int = 0
    violations: list = field(default_factory=list)
    max_margin: float = -math.inf
    worst: Optional[tuple] = None
    hit: bool = False

    def merge(self, other):
        self.pairs += other.pairs
        self.violations.extend(other.violations)
        if other.worst is not None and (
            self.worst is None
            or other.max_margin > self.max_margin
            or (other.max_margin == self.max_margin and other.worst < self.worst)
        ):
            self.max_margin, self.worst = other.max_margin, other.worst
        self.hit = self.hit or other.hit
        return self


def _scan_range(s_values, band, tol, lhs_of, rhs_of, stop_at_first):
    acc = _Chunk()
    for s in s_values:
        n = np.arange(1, s // 2 + 1)
        m = s - n
        keep = band.mask(n, m)
        if not np.any(keep):
            continue
        n, m = n[keep], m[keep]
        lhs = lhs_of(s, n)
        rhs = rhs_of(n, m)
        margin = lhs - rhs
        acc.pairs += len(n)
        j = int(np.argmax(margin))
        part = _Chunk(worst=(int(n[j]), int(m[j])), max_margin=float(margin[j]))
        acc.merge(part)
        bad = np.flatnonzero(margin > tol)
        for i in bad:
            acc.violations.append(
                Violation(int(n[i]), int(m[i]), float(lhs[i]), float(rhs[i]), float(margin[i]))
            )
        if bad.size:
            acc.hit = True
            if stop_at_first:
                break
    return acc


def _run_scan(name, band, max_sum, tol, lhs_of, rhs_of, workers, stop_at_first):
    if max_sum < 2:
        raise ValueError("max_sum must be >= 2")
    if tol < 0:
        raise ValueError("tolerance must be >= 0")
    t0 = time.perf_counter()
    s_all = list(range(2, max_sum + 1))
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or stop_at_first:
        acc = _scan_range(s_all, band, tol, lhs_of, rhs_of, stop_at_first)
    else:
        # strided split balances the growing diagonal lengths
        chunks = [s_all[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda c: _scan_range(c, band, tol, lhs_of, rhs_of, False), chunks))
        acc = _Chunk()
        for p in parts:
            acc.merge(p)
    acc.violations.sort(key=lambda v: (v.n, v.m))
    return SubadditivityReport(
        family=name,
        band=str(band),
        max_sum=max_sum,
        tolerance=tol,
        pairs_checked=acc.pairs,
        violations=acc.violations,
        max_margin=acc.max_margin,
        worst_pair=acc.worst,
        stopped_early=bool(stop_at_first and acc.hit),
        elapsed=time.perf_counter() - t0,
    )


def check_subadditivity(
    family: SequenceFamily,
    band: ConstraintBand = ConstraintBand.full(),
    max_sum: int = 100,
    tolerance: float = DEFAULT_TOLERANCE,
    *,
    workers: Optional[int] = None,
    stop_at_first: bool = False,
) -> SubadditivityReport:
    """Scan ||v_{n+m}|| <= ||v_n + v_m|| over in-band pairs with n + m <= max_sum.

    A pair is a violation when ``lhs - rhs > tolerance``.
    """
    if max_sum < 2:
        raise ValueError("max_sum must be >= 2")
    V = family.matrix(max_sum)
    space = family.space
    totals = norms(space, V)

    def lhs_of(s, n):
        return np.full(len(n), totals[s - 1])

    def rhs_of(n, m):
        return norms(space, V[n - 1] + V[m - 1])

    return _run_scan(family.name, band, max_sum, tolerance, lhs_of, rhs_of, workers, stop_at_first)


def check_scalar_band_subadditivity(
    a: Callable[[int], float],
    band: ConstraintBand = ConstraintBand.full(),
    max_sum: int = 100,
    tolerance: float = DEFAULT_TOLERANCE,
    *,
    name: str = "scalar",
    workers: Optional[int] = None,
    stop_at_first: bool = False,
) -> SubadditivityReport:
    """Scan |a_{n+m}| <= |a_n + a_m| over in-band pairs."""
    vals = np.empty(max_sum)
    for i in range(1, max_sum + 1):
        try:
            vals[i - 1] = float(a(i))
        except Exception as exc:
            raise GeneratorFailure(name, i, exc) from exc

    def lhs_of(s, n):
        return np.full(len(n), abs(vals[s - 1]))

    def rhs_of(n, m):
        return np.abs(vals[n - 1] + vals[m - 1])

    return _run_scan(name, band, max_sum, tolerance, lhs_of, rhs_of, workers, stop_at_first)


# ---------------------------------------------------------------------------
# geometric lemma


@dataclass(frozen=True)
class LemmaMargin:
    lhs: float
    rhs: float
    margin: float
    direction_gap: float
    norm_ratio: float
    tolerance: float

    @property
    def satisfied(self) -> bool:
        return self.margin <= self.tolerance


def check_lemma_bound(space: SpaceSpec, u, v, gamma: float, tolerance: float = 1e-12) -> LemmaMargin:
    """Evaluate ||u + v|| <= ||u|| + gamma ||v|| for ||v|| <= 2||u||.

    The direction-gap hypothesis is not enforced (gamma is the caller's);
    it is reported so callers can match gamma to it.
    """
    A = stack([u, v])
    nu, nv = norms(space, A)
    if nu == 0 or nv == 0:
        raise HypothesisViolated("u and v must be non-zero")
    if nv > 2.0 * nu:
        raise HypothesisViolated(f"||v|| = {nv!r} exceeds 2||u|| = {2 * nu!r}")
    lhs = float(norms(space, A[0] + A[1])[0])
    rhs = float(nu + gamma * nv)
    gap = float(norms(space, A[0] / nu - A[1] / nv)[0])
    return LemmaMargin(lhs, rhs, lhs - rhs, gap, float(nv / nu), tolerance)


def lemma_bound_margins(space: SpaceSpec, U: np.ndarray, V: np.ndarray, gamma) -> dict:
    """Row-wise version of :func:`check_lemma_bound` for Monte-Carlo sweeps."""
    nu = norms(space, U)
    nv = norms(space, V)
    if np.any(nv > 2.0 * nu):
        raise HypothesisViolated("some rows have ||v|| > 2||u||")
    lhs = norms(space, U + V)
    rhs = nu + np.asarray(gamma) * nv
    gap = norms(space, U / nu[:, None] - V / nv[:, None])
    return {"lhs": lhs, "rhs": rhs, "margin": lhs - rhs, "gap": gap}


# ---------------------------------------------------------------------------
# uniform convexity of point sets


def _unit_rows(points, space):
    P = stack(points) if not isinstance(points, np.ndarray) else np.atleast_2d(points).astype(float)
    nr = norms(space, P)
    if np.any(nr == 0):
        raise ZeroVectorInSet(f"zero vector at position {int(np.flatnonzero(nr == 0)[0])}")
    return P / nr[:, None]


def _best_pair(U, space, epsilon):
    best, arg, count = -math.inf, None, 0
    for i in range(len(U) - 1):
        D = U[i + 1:]
        gaps = norms(space, U[i] - D)
        ok = gaps >= epsilon
        count += int(ok.sum())
        if not np.any(ok):
            continue
        sums = norms(space, U[i] + D[ok])
        j = int(np.argmax(sums))
        if sums[j] > best:
            best, arg = float(sums[j]), (i, i + 1 + int(np.flatnonzero(ok)[j]))
    return best, arg, count


def subset_uniform_convexity_probe(points, space: SpaceSpec, epsilon: float) -> ConvexityEstimate:
    """delta_hat = 2 - max ||u + v|| over unit pairs from ``points`` with ||u - v|| >= eps.

    Points are normalized first. With no eligible pair the set is uniformly
    convex by default and delta_hat is 2.
    """
    if not (0.0 < epsilon <= 2.0):
        raise InvalidEpsilon(f"epsilon must lie in (0, 2], got {epsilon!r}")
    U = _unit_rows(points, space)
    best, arg, count = _best_pair(U, space, epsilon)
    if arg is None:
        return ConvexityEstimate(epsilon, 2.0, None, 0)
    i, j = arg
    gap = float(norms(space, U[i] - U[j])[0])
    return ConvexityEstimate(
        epsilon, max(0.0, 2.0 - best), (FiniteVector(U[i]), FiniteVector(U[j])), count, gap
    )


# ---------------------------------------------------------------------------
# combined criterion

DIVERGENCE_DELTA = 1e-6
CONVERGENCE_DELTA = 1e-3
ZERO_GROWTH = 1e-12


@dataclass
class CriterionVerdict:
    family: str
    N: int
    growth_rate: float
    zero_indices: list
    subadditivity: SubadditivityReport
    profile: dict
    verdict: Verdict
    note: str

    def as_dict(self):
        return {
            "family": self.family,
            "N": self.N,
            "growth_rate": self.growth_rate,
            "zero_indices": self.zero_indices,
            "subadditive_prefix": self.subadditivity.ok,
            "subadditivity_pairs": self.subadditivity.pairs_checked,
            "profile": self.profile,
            "verdict": self.verdict.value,
            "note": self.note,
        }


def criterion_check(
    family: SequenceFamily,
    N: int,
    epsilon_grid=(0.25, 0.5, 1.0),
    tolerance: float = DEFAULT_TOLERANCE,
    workers: Optional[int] = None,
) -> CriterionVerdict:
    """Growth rate plus uniform-convexity probes of the normalized directions.

    The probe runs on prefixes of depth N/4, N/2 and N. Evidence only:
    delta_hat bounds the subset modulus from above.
    """
    sub = check_subadditivity(family, ConstraintBand.full(), max(N, 2), tolerance, workers=workers)
    V = family.matrix(N)
    nr = norms(family.space, V)
    idx = np.arange(1, N + 1)
    zeros = [int(i) for i in idx[nr == 0]]
    growth = float(np.min(nr / idx))
    if zeros or growth < ZERO_GROWTH:
        return CriterionVerdict(
            family.name, N, growth, zeros, sub, {}, Verdict.LIMIT_ZERO,
            "growth rate is zero; v_n/n tends to 0 (evidence)",
        )
    depths = sorted({max(2, N // 4), max(2, N // 2), N})
    profile = {}
    for eps in epsilon_grid:
        profile[format(eps, "g")] = {
            str(d): subset_uniform_convexity_probe(V[:d], family.space, eps).delta_hat
            for d in depths
        }
    final = [row[str(N)] for row in profile.values()]
    if any(d <= DIVERGENCE_DELTA for d in final):
        verdict = Verdict.DIVERGENCE
        note = "normalized directions are not a uniformly convex set (evidence)"
    elif all(d >= CONVERGENCE_DELTA for d in final):
        verdict = Verdict.CONVERGENCE
        note = "normalized directions look uniformly convex (evidence)"
    else:
        verdict = Verdict.INCONCLUSIVE
        note = "delta_hat between thresholds"
    if not sub.ok:
        note += "; subadditivity fails on the prefix, criterion hypothesis not met"
    return CriterionVerdict(family.name, N, growth, zeros, sub, profile, verdict, note)
