"""Executable diagnostics: growth rates, direction gaps, the inductive
bound chain, the planar-spiral inequalities, sign stabilization, and the
spectral-radius application of scalar Fekete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import report as _report
from .errors import BandViolation, ZeroVectorNormalization
from .sequences import SequenceFamily, spiral_angle, spiral_radius
from .spaces import gamma_from_delta, hilbert_modulus_closed_form, norms
from .verify import Verdict

CONVERGENCE_GAP = 0.01
DIVERGENCE_GAP = 0.5


# ---------------------------------------------------------------------------
# growth and directions


@dataclass
class LimitDiagnostics:
    family: str
    N: int
    window: float
    growth_inf: float
    growth_argmin: int
    growth_trailing: float
    direction_gap: float
    direction_gap_pair: Optional[tuple]
    window_gaps: list
    limit_estimate: list
    zero_indices: list
    n_delta: dict
    verdict: Verdict

    def as_dict(self):
        return {
            "family": self.family,
            "N": self.N,
            "window": self.window,
            "growth_rate": {
                "inf": self.growth_inf,
                "argmin": self.growth_argmin,
                "trailing": self.growth_trailing,
            },
            "direction_gap": {
                "max": self.direction_gap,
                "pair": list(self.direction_gap_pair) if self.direction_gap_pair else None,
                "dyadic_windows": [
                    {"n_lo": lo, "n_hi": hi, "max_gap": g} for lo, hi, g in self.window_gaps
                ],
            },
            "limit_estimate": self.limit_estimate,
            "zero_indices": self.zero_indices,
            "n_delta": self.n_delta,
            "verdict": self.verdict.value,
            "thresholds": {"convergence_gap": CONVERGENCE_GAP, "divergence_gap": DIVERGENCE_GAP},
        }

    def to_json(self):
        return _report.dumps(self.as_dict())


def _unit_rows(family, N):
    V = family.matrix(N)
    nr = norms(family.space, V)
    zero = nr == 0
    U = np.zeros_like(V)
    U[~zero] = V[~zero] / nr[~zero, None]
    return V, nr, U, zero


def _pair_gaps(space, U, valid, n, m_hi):
    """Max gap between unit row n and rows n..m_hi (1-based, inclusive)."""
    ms = np.arange(n, m_hi + 1)
    ms = ms[valid[ms - 1]]
    if not valid[n - 1] or ms.size == 0:
        return -1.0, None
    g = norms(space, U[ms - 1] - U[n - 1])
    j = int(np.argmax(g))
    return float(g[j]), (n, int(ms[j]))


def _dyadic_windows(N):
    out = []
    hi = N
    while hi >= 2 and len(out) < 3:
        lo = max(1, hi // 2)
        out.append((lo, hi))
        hi = lo - 1
    return out[::-1]


def limit_diagnostics(
    family: SequenceFamily, N: int, window: float = 4.0, deltas=(0.1, 0.01)
) -> LimitDiagnostics:
    """Growth rate L = inf ||v_n||/n and normalized direction gaps up to N.

    Gaps are taken over n <= m <= window*n, m <= N. The verdict uses the last
    three dyadic n-windows: all below CONVERGENCE_GAP in the final one gives
    ConvergenceEvidence, all above DIVERGENCE_GAP gives DivergenceEvidence.
    Zero vectors are skipped for normalization and listed in ``zero_indices``.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    space = family.space
    V, nr, U, zero = _unit_rows(family, N)
    idx = np.arange(1, N + 1)
    ratios = nr / idx
    j = int(np.argmin(ratios))
    L = float(ratios[j])
    valid = ~zero

    per_n = np.full(N + 1, -1.0)
    arg_n = [None] * (N + 1)
    for n in range(1, N + 1):
        hi = min(N, int(math.floor(window * n)))
        per_n[n], arg_n[n] = _pair_gaps(space, U, valid, n, hi)
    k = int(np.argmax(per_n))
    best = float(max(per_n[k], 0.0))
    windows = []
    for lo, hi in _dyadic_windows(N):
        seg = per_n[lo : hi + 1]
        windows.append((lo, hi, float(max(seg.max(), 0.0))))

    last = [g for _, _, g in windows]
    if windows and last[-1] < CONVERGENCE_GAP:
        verdict = Verdict.CONVERGENCE
    elif len(last) == 3 and min(last) > DIVERGENCE_GAP:
        verdict = Verdict.DIVERGENCE
    else:
        verdict = Verdict.INCONCLUSIVE
    if L == 0:
        verdict = Verdict.LIMIT_ZERO

    n_delta = {}
    for d in deltas:
        over = np.flatnonzero(nr > (1.0 + d) * L * idx)
        n_delta[format(d, "g")] = int(idx[over[-1]]) if over.size else 0

    return LimitDiagnostics(
        family=family.name,
        N=N,
        window=float(window),
        growth_inf=L,
        growth_argmin=int(j + 1),
        growth_trailing=float(ratios[-1]),
        direction_gap=best,
        direction_gap_pair=arg_n[k],
        window_gaps=windows,
        limit_estimate=(V[-1] / N).tolist(),
        zero_indices=[int(i) for i in idx[zero]],
        n_delta=n_delta,
        verdict=verdict,
    )


@dataclass(frozen=True)
class GapScan:
    family: str
    N_start: int
    N_end: int
    ratio: float
    max_gap: float
    pair: Optional[tuple]

    def as_dict(self):
        return {
            "family": self.family, "N_start": self.N_start, "N_end": self.N_end,
            "ratio": self.ratio, "max_gap": self.max_gap,
            "pair": list(self.pair) if self.pair else None,
        }


def proposition_gap_scan(family: SequenceFamily, N_start: int, N_end: int, ratio: float = 4.0) -> GapScan:
    """Max of ||v_n/||v_n|| - v_m/||v_m|| || over N_start <= n <= m <= min(ratio*n, N_end)."""
    if N_start < 1 or N_end < N_start:
        raise ValueError("need 1 <= N_start <= N_end")
    V, nr, U, zero = _unit_rows(family, N_end)
    bad = np.flatnonzero(zero[N_start - 1 :])
    if bad.size:
        raise ZeroVectorNormalization(int(bad[0]) + N_start)
    best, pair = 0.0, None
    valid = ~zero
    for n in range(N_start, N_end + 1):
        g, p = _pair_gaps(family.space, U, valid, n, min(N_end, int(math.floor(ratio * n))))
        if g > best:
            best, pair = g, p
    return GapScan(family.name, N_start, N_end, float(ratio), best, pair)


# ---------------------------------------------------------------------------
# inductive bound chain


@dataclass(frozen=True)
class TraceRow:
    r: int
    index: int
    actual: float
    bound: float
    slack: float
    gap: float
    gap_ok: bool
    ratio_ok: bool
    subadditive_ok: bool
    chain_ok: bool

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class BoundTrace:
    family: str
    n: int
    m: int
    gamma: float
    epsilon: Optional[float]
    rows: list = field(default_factory=list)

    @property
    def k(self):
        return len(self.rows)

    def as_dict(self):
        return {
            "family": self.family, "n": self.n, "m": self.m, "gamma": self.gamma,
            "epsilon": self.epsilon, "k": self.k, "rows": [r.as_dict() for r in self.rows],
        }

    def to_json(self):
        return _report.dumps(self.as_dict())


def euclidean_lemma_gamma(gap: float) -> float:
    """gamma for inner-product spaces at direction gap ``gap`` (gap in (0, 2])."""
    return gamma_from_delta(hilbert_modulus_closed_form(min(gap, 2.0)))


def inductive_bound_trace(
    family: SequenceFamily,
    n: int,
    m: int,
    gamma: float,
    epsilon: Optional[float] = None,
    tolerance: float = 1e-9,
) -> BoundTrace:
    """Rows r = 1..ceil(m/n) of ||v_{rn+m}|| against ||v_m|| + r*gamma*||v_n||.

    Step r applies the lemma to u = v_{(r-1)n+m}, v = v_n. Each row records
    whether that step's hypotheses hold (direction gap >= epsilon when given,
    ||v_n|| <= 2||u||, and subadditivity of the step); ``chain_ok`` is true
    when they hold at this row and every earlier one.
    """
    if not (m > n >= 1):
        raise ValueError("need m > n >= 1")
    if not (0 < gamma <= 1):
        raise ValueError("gamma must lie in (0, 1]")
    k = -(-m // n)
    top = k * n + m
    V = family.matrix(top)
    nr = norms(family.space, V)
    vn = V[n - 1]
    trace = BoundTrace(family.name, n, m, float(gamma), epsilon)
    chain = True
    for r in range(1, k + 1):
        prev = (r - 1) * n + m
        cur = r * n + m
        actual = float(nr[cur - 1])
        bound = float(nr[m - 1] + r * gamma * nr[n - 1])
        up = nr[prev - 1]
        gap = float(norms(family.space, vn / nr[n - 1] - V[prev - 1] / up)[0]) if up > 0 and nr[n - 1] > 0 else 0.0
        gap_ok = epsilon is None or gap >= epsilon
        ratio_ok = bool(nr[n - 1] <= 2.0 * up)
        sub_ok = bool(actual <= norms(family.space, vn + V[prev - 1])[0] + tolerance)
        chain = chain and gap_ok and ratio_ok and sub_ok
        trace.rows.append(TraceRow(r, cur, actual, bound, bound - actual, gap,
                                   bool(gap_ok), ratio_ok, sub_ok, chain))
    return trace


# ---------------------------------------------------------------------------
# planar spiral closed forms


def _radius_arr(n):
    n = np.asarray(n, dtype=np.float64)
    return n + n / np.sqrt(np.log(n + 1.0))


def _angle_arr(n):
    n = np.asarray(n, dtype=np.float64)
    return np.log(n) ** 0.25 / 100.0


def rn_margins(n: int, m) -> np.ndarray:
    """rhs - lhs of r_{n+m}^2 <= r_n^2 + r_m^2 + 2(1 - 1/(100 ln(n+1)^1.5)) r_n r_m.

    Evaluated in the factored form
    (r_n + r_m - r_{n+m})(r_n + r_m + r_{n+m}) - 2 r_n r_m / (100 ln(n+1)^1.5),
    which is algebraically identical and avoids cancelling squares.
    """
    m = np.atleast_1d(np.asarray(m, dtype=np.int64))
    if np.any(m < n) or np.any(m > 2 * n) or n < 1:
        raise BandViolation(f"need 1 <= n <= m <= 2n, got n={n}")
    rn = _radius_arr(n)
    rm = _radius_arr(m)
    rs = _radius_arr(n + m)
    lg = math.log(n + 1.0) ** 1.5
    return (rn + rm - rs) * (rn + rm + rs) - 2.0 * rn * rm / (100.0 * lg)


def rn_inequality_check(n: int, m: int) -> float:
    return float(rn_margins(n, [m])[0])


def rn_inequality_direct(n: int, m: int) -> float:
    """Unfactored rhs - lhs; kept as a cross-check of :func:`rn_margins`."""
    if not (1 <= n <= m <= 2 * n):
        raise BandViolation(f"need 1 <= n <= m <= 2n, got ({n}, {m})")
    rn, rm, rs = spiral_radius(n), spiral_radius(m), spiral_radius(n + m)
    c = 1.0 - 1.0 / (100.0 * math.log(n + 1.0) ** 1.5)
    return rn * rn + rm * rm + 2.0 * c * rn * rm - rs * rs


def log_doubling_margin(n: int) -> float:
    """2 ln(n+1) - ln(2n+1) >= 0."""
    return 2.0 * math.log(n + 1.0) - math.log(2.0 * n + 1.0)


@dataclass(frozen=True)
class ThetaMargin:
    n: int
    gap: float
    bound: float

    @property
    def lower_margin(self):
        return self.gap

    @property
    def upper_margin(self):
        return self.bound - self.gap

    @property
    def ok(self):
        return self.lower_margin >= 0 and self.upper_margin >= 0


def theta_margins(ns) -> tuple:
    """(theta_{2n} - theta_n, ln(n+1)^(-3/4) / 50) for an array of n."""
    ns = np.asarray(ns, dtype=np.float64)
    gap = _angle_arr(2 * ns) - _angle_arr(ns)
    bound = np.log(ns + 1.0) ** -0.75 / 50.0
    return gap, bound


def theta_bound_check(n: int) -> ThetaMargin:
    if n < 1:
        raise ValueError("n must be >= 1")
    gap = spiral_angle(2 * n) - spiral_angle(n)
    bound = math.log(n + 1.0) ** -0.75 / 50.0
    return ThetaMargin(n, gap, bound)


def cosine_chain(n: int, m: int) -> tuple:
    """The four terms of cos(dtheta) >= 1 - dtheta^2/2 >= 1 - (theta_2n - theta_n)^2/2
    >= 1 - ln(n+1)^(-3/2)/100 for n <= m <= 2n; should be non-increasing."""
    if not (1 <= n <= m <= 2 * n):
        raise BandViolation(f"need 1 <= n <= m <= 2n, got ({n}, {m})")
    d = spiral_angle(m) - spiral_angle(n)
    d2 = spiral_angle(2 * n) - spiral_angle(n)
    return (
        math.cos(d),
        1.0 - 0.5 * d * d,
        1.0 - 0.5 * d2 * d2,
        1.0 - math.log(n + 1.0) ** -1.5 / 100.0,
    )


# ---------------------------------------------------------------------------
# one-dimensional sign stabilization


def sign_stabilization_check(a: Callable[[int], float], N_max: int) -> Optional[int]:
    """Smallest N with a_n * a_{n+1} > 0 for every N <= n < N_max, else None."""
    if N_max < 2:
        raise ValueError("N_max must be >= 2")
    vals = [float(a(i)) for i in range(1, N_max + 1)]
    first = None
    for n in range(N_max - 1, 0, -1):
        if vals[n - 1] * vals[n] > 0:
            first = n
        else:
            break
    return first


# ---------------------------------------------------------------------------
# spectral radius


def _frexp_scale(M):
    """Power-of-two exponent that brings max|M| near 1; exact rescaling."""
    mx = float(np.max(np.abs(M)))
    if mx == 0:
        return 0
    return math.frexp(mx)[1]


def operator_norm(M: np.ndarray, seed: int = 0, tol: float = 1e-12,
                  max_iter: int = 10_000, restarts: int = 3) -> float:
    """Euclidean-induced norm by power iteration on M^T M.

    Several seeded starting vectors; the largest ||M x|| / ||x|| seen is returned,
    which is a lower bound converging to the true norm.
    """
    M = np.asarray(M, dtype=np.float64)
    if not np.any(M):
        return 0.0
    e = _frexp_scale(M)
    S = np.ldexp(M, -e)
    G = S.T @ S
    best = 0.0
    for r in range(restarts):
        rng = np.random.default_rng([int(seed), r])
        x = rng.standard_normal(S.shape[1])
        x /= np.linalg.norm(x)
        prev = 0.0
        for _ in range(max_iter):
            est = float(np.linalg.norm(S @ x))
            best = max(best, est)
            y = G @ x
            ny = np.linalg.norm(y)
            if ny == 0:
                break
            x = y / ny
            if abs(est - prev) <= tol * est:
                # polish: ||S x|| is non-decreasing along the iteration
                for _ in range(60):
                    nxt = float(np.linalg.norm(S @ x))
                    if nxt <= best:
                        break
                    best = nxt
                    x = G @ x
                    x /= np.linalg.norm(x)
                break
            prev = est
    return math.ldexp(best, e)


@dataclass
class SpectralReport:
    N: int
    log_norms: list
    roots: list
    running_inf: list
    nilpotent_at: Optional[int]
    radius_estimate: float

    def as_dict(self):
        return {
            "N": self.N,
            "log_norms": [None if math.isinf(x) else x for x in self.log_norms],
            "roots": self.roots,
            "running_inf": self.running_inf,
            "nilpotent_at": self.nilpotent_at,
            "radius_estimate": self.radius_estimate,
        }

    def to_json(self):
        return _report.dumps(self.as_dict())


def spectral_radius_demo(A, N: int, seed: int = 0) -> SpectralReport:
    """||A^n||^(1/n) for n = 1..N with its running infimum.

    Powers are carried with an exact power-of-two scale so large N does not
    overflow. Once A^n vanishes (nilpotent) every later term is 0 and the
    radius is reported as 0.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if not np.all(np.isfinite(A)):
        raise ValueError("A has non-finite entries")
    if N < 1:
        raise ValueError("N must be >= 1")
    P = np.eye(A.shape[0])
    log_scale = 0  # A^n = P * 2^log_scale
    logs, roots, inf, running = [], [], [], math.inf
    nil = None
    for n in range(1, N + 1):
        if nil is None:
            P = P @ A
            e = _frexp_scale(P)
            P = np.ldexp(P, -e)
            log_scale += e
            nrm = operator_norm(P, seed=seed)
            if nrm == 0:
                nil = n
        if nil is not None:
            logs.append(-math.inf)
            roots.append(0.0)
        else:
            # ||A^n|| = mant * 2^E with mant in [1, 2); exact powers of two stay exact
            mant, e2 = math.frexp(nrm)
            mant, E = 2.0 * mant, log_scale + e2 - 1
            logs.append(math.log(mant) + E * math.log(2.0))
            roots.append(mant ** (1.0 / n) * 2.0 ** (E / n))
        running = min(running, roots[-1])
        inf.append(running)
    return SpectralReport(N, logs, roots, inf, nil, 0.0 if nil else running)


def submultiplicativity_violations(rep: SpectralReport, tol: float = 1e-9) -> list:
    """Pairs (n, m), n <= m, n+m <= N with ln||A^{n+m}|| > ln||A^n|| + ln||A^m|| + tol."""
    L = np.array(rep.log_norms)
    out = []
    for n in range(1, rep.N // 2 + 1):
        ms = np.arange(n, rep.N - n + 1)
        if ms.size == 0:
            continue
        lhs = L[n + ms - 1]
        rhs = L[n - 1] + L[ms - 1]
        with np.errstate(invalid="ignore"):
            bad = (lhs > rhs + tol) & np.isfinite(lhs)
        out.extend((n, int(m)) for m in ms[bad])
    return out


def read_matrix_csv(path) -> np.ndarray:
    """Row-major CSV without header."""
    M = np.loadtxt(path, delimiter=",", ndmin=2)
    return M
