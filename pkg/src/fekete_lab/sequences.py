"""Deterministic vector sequences: the counterexamples and positive controls.

Family string grammar (used by the CLI)::

    spiral2d
    spiral2d-general:delta=<real>[,start=<int>]
    scaled-basis
    uc-witness
    incomplete[:loglog=natural|log10]
    nonconvex-alt
    linear:bound=<real>,seed=<int>
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import (
    GeneratorFailure,
    IndexBelowStart,
    NonUnitInput,
    SpecParseError,
)
from .spaces import FiniteVector, SpaceSpec, TailVector, as_finite, norm


def _check_index(n):
    if int(n) != n or n < 1:
        raise ValueError(f"indices are positive integers, got {n!r}")


# ---------------------------------------------------------------------------
# planar spiral


def spiral_radius(n: int) -> float:
    """r_n = n + n / sqrt(ln(n+1))."""
    return n + n / math.sqrt(math.log(n + 1))


def spiral_angle(n: int) -> float:
    """theta_n = (ln n)^(1/4) / 100; zero at n = 1."""
    return math.log(n) ** 0.25 / 100.0


def spiral2d(n: int) -> FiniteVector:
    _check_index(n)
    r, th = spiral_radius(n), spiral_angle(n)
    return FiniteVector([r * math.cos(th), r * math.sin(th)])


@dataclass(frozen=True)
class SpiralParams:
    """Generalized spiral r_n = n(1 + (ln n)^-delta), theta_n = (ln n)^delta.

    With ``baseline=True`` the radius/angle fall back to the fixed
    ``spiral_radius``/``spiral_angle`` pair and ``delta`` is ignored.
    """

    delta: float = 0.5
    baseline: bool = False
    start: int = 3

    def __post_init__(self):
        if not self.baseline and not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.start < 2:
            raise ValueError("start must be >= 2 so that ln n > 0")

    def radius(self, n):
        if self.baseline:
            return spiral_radius(n)
        return n * (1.0 + math.log(n) ** (-self.delta))

    def angle(self, n):
        if self.baseline:
            return spiral_angle(n)
        return math.log(n) ** self.delta


def spiral2d_general(n: int, params: SpiralParams = SpiralParams()) -> FiniteVector:
    _check_index(n)
    if not params.baseline and n < params.start:
        raise IndexBelowStart(f"n={n} is below start index {params.start}")
    r, th = params.radius(n), params.angle(n)
    return FiniteVector([r * math.cos(th), r * math.sin(th)])


def spiral2d_general_total(n: int, params: SpiralParams) -> FiniteVector:
    """Total extension on N: below ``start`` use the linear ray n * v_start / start."""
    if n >= params.start or params.baseline:
        return spiral2d_general(n, params)
    _check_index(n)
    return spiral2d_general(params.start, params) * (n / params.start)


# ---------------------------------------------------------------------------
# sequence spaces


def scaled_basis(n: int) -> TailVector:
    """v_n = n e_n."""
    _check_index(n)
    return TailVector(lambda i, n=n: float(n) if i == n else 0.0, support=n)


def uc_witness_pair(k: int):
    """(v_k, w_k) = (e_{2k-1} +- e_{2k}) / 2^(1/(k+1)), unit in the nested norm."""
    _check_index(k)
    a = 2.0 ** (-1.0 / (k + 1))

    def v(i, k=k):
        return a if i in (2 * k - 1, 2 * k) else 0.0

    def w(i, k=k):
        if i == 2 * k - 1:
            return a
        if i == 2 * k:
            return -a
        return 0.0

    return TailVector(v, support=2 * k), TailVector(w, support=2 * k)


def uc_witness_sequence(n: int) -> TailVector:
    """Interleave the witness pairs: n = 2k-1 -> v_k, n = 2k -> w_k."""
    _check_index(n)
    v, w = uc_witness_pair((n + 1) // 2)
    return v if n % 2 else w


@dataclass(frozen=True)
class IncompleteParams:
    loglog: str = "natural"

    def __post_init__(self):
        if self.loglog not in ("natural", "log10"):
            raise ValueError("loglog must be 'natural' or 'log10'")


def incomplete_c(n: int, params: IncompleteParams = IncompleteParams()) -> float:
    """c_n = n (1 + 10 / loglog(10 n))."""
    if params.loglog == "natural":
        ll = math.log(math.log(10.0 * n))
    else:
        # log10(log10(10)) = 0, so this variant is undefined at n = 1
        ll = math.log10(math.log10(10.0 * n))
    return n * (1.0 + 10.0 / ll)


def incomplete_space_seq(n: int, params: IncompleteParams = IncompleteParams()) -> TailVector:
    """v_{n,m} = c_n / 2^(2^m) for m <= n, zero afterwards."""
    _check_index(n)
    c = incomplete_c(n, params)

    def coord(m, c=c, n=n):
        if m > n:
            return 0.0
        # 2^m beyond the float exponent range underflows to an exact zero
        return math.ldexp(c, -(2**m)) if m < 64 else 0.0

    return TailVector(coord, support=n)


# ---------------------------------------------------------------------------
# controls


def nonconvex_alternating(n: int, u, v, space: SpaceSpec = SpaceSpec.lp(1)) -> FiniteVector:
    """n v for even n, n u for odd n (v_1 = u)."""
    _check_index(n)
    u, v = as_finite(u), as_finite(v)
    for name, x in (("u", u), ("v", v)):
        if abs(norm(space, x) - 1.0) > 1e-12:
            raise NonUnitInput(f"{name} is not a unit vector in {space}")
    if u == v:
        raise NonUnitInput("u and v must be distinct")
    return (v if n % 2 == 0 else u) * n


def _bounded_perturbation(n, bound, seed, direction):
    rho = np.random.default_rng([int(seed), int(n)]).uniform(0.5, 1.0)
    return direction * (bound * rho)


def linear_plus_bounded(n: int, w, bound: float, seed: int) -> FiniteVector:
    """n w + p_n with ||p_n|| <= bound.

    p_n is a seeded multiple (in [bound/2, bound]) of a fixed unit vector
    orthogonal to w, which keeps the family subadditive in any inner-product
    space: |p_{n+m}| <= bound <= |p_n + p_m|.
    """
    _check_index(n)
    if bound < 0:
        raise ValueError("bound must be >= 0")
    w = as_finite(w)
    c = w.coords
    if len(c) < 2:
        c = np.concatenate([c, np.zeros(2 - len(c))])
    d = _orthogonal_unit(c)
    return FiniteVector(n * c + _bounded_perturbation(n, bound, seed, d))


def _orthogonal_unit(c):
    nrm = np.linalg.norm(c)
    if nrm == 0:
        d = np.zeros(len(c))
        d[-1] = 1.0
        return d
    # Gram-Schmidt on the standard basis vector least aligned with c
    e = np.zeros(len(c))
    e[int(np.argmin(np.abs(c)))] = 1.0
    d = e - (e @ c) / (nrm * nrm) * c
    return d / np.linalg.norm(d)


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class SequenceFamily:
    name: str
    space: SpaceSpec
    generator: Callable[[int], object]
    params: Mapping = field(default_factory=dict)

    def __call__(self, n: int):
        return self.generator(n)

    def vector(self, n: int) -> FiniteVector:
        try:
            return as_finite(self.generator(n))
        except Exception as exc:
            raise GeneratorFailure(self.name, n, exc) from exc

    def matrix(self, N: int) -> np.ndarray:
        """Rows v_1 .. v_N, zero-padded to a common width."""
        vecs = [self.vector(n) for n in range(1, N + 1)]
        width = max([len(v) for v in vecs] + [1])
        out = np.zeros((N, width))
        for i, v in enumerate(vecs):
            out[i, : len(v)] = v.coords
        return out


def spiral_family() -> SequenceFamily:
    return SequenceFamily("spiral2d", SpaceSpec.euclidean(2), spiral2d)


def spiral_general_family(delta: float, start: int = 3) -> SequenceFamily:
    params = SpiralParams(delta=delta, start=start)
    return SequenceFamily(
        f"spiral2d-general:delta={delta:g},start={start}",
        SpaceSpec.euclidean(2),
        lambda n: spiral2d_general_total(n, params),
        {"delta": delta, "start": start},
    )


def scaled_basis_family() -> SequenceFamily:
    return SequenceFamily("scaled-basis", SpaceSpec.convex_l1(), scaled_basis)


def uc_witness_family() -> SequenceFamily:
    return SequenceFamily("uc-witness", SpaceSpec.nested(), uc_witness_sequence)


def incomplete_family(loglog: str = "natural") -> SequenceFamily:
    params = IncompleteParams(loglog)
    name = "incomplete" if loglog == "natural" else f"incomplete:loglog={loglog}"
    return SequenceFamily(
        name, SpaceSpec.finite_l2(),
        lambda n: incomplete_space_seq(n, params), {"loglog": loglog},
    )


NONCONVEX_U = FiniteVector([1.0, 0.0])
NONCONVEX_V = FiniteVector([0.0, 1.0])


def nonconvex_family(u=NONCONVEX_U, v=NONCONVEX_V, space=SpaceSpec.lp(1)) -> SequenceFamily:
    return SequenceFamily(
        "nonconvex-alt", space, lambda n: nonconvex_alternating(n, u, v, space)
    )


LINEAR_W = FiniteVector([1.0, 0.5])


def linear_family(bound: float = 1.0, seed: int = 0, w=LINEAR_W) -> SequenceFamily:
    w = as_finite(w)
    return SequenceFamily(
        f"linear:bound={bound:g},seed={seed}",
        SpaceSpec.euclidean(max(2, len(w))),
        lambda n: linear_plus_bounded(n, w, bound, seed),
        {"bound": bound, "seed": seed, "w": w.trimmed().tolist()},
    )


def _kv(arg: str, text: str) -> dict:
    out = {}
    if not arg:
        return out
    for item in arg.split(","):
        key, eq, val = item.partition("=")
        if not eq or not key:
            raise SpecParseError(f"expected key=value in {text!r}, got {item!r}")
        if key in out:
            raise SpecParseError(f"duplicate key {key!r} in {text!r}")
        out[key.strip()] = val.strip()
    return out


def _take(kv, allowed, text):
    unknown = set(kv) - set(allowed)
    if unknown:
        raise SpecParseError(f"unknown keys {sorted(unknown)} in {text!r}")


def parse_family(text: str) -> SequenceFamily:
    head, _, arg = text.strip().partition(":")
    kv = _kv(arg, text)
    try:
        if head == "spiral2d":
            _take(kv, (), text)
            return spiral_family()
        if head == "spiral2d-general":
            _take(kv, ("delta", "start"), text)
            if "delta" not in kv:
                raise SpecParseError("spiral2d-general needs delta=<real>")
            return spiral_general_family(float(kv["delta"]), int(kv.get("start", 3)))
        if head == "scaled-basis":
            _take(kv, (), text)
            return scaled_basis_family()
        if head == "uc-witness":
            _take(kv, (), text)
            return uc_witness_family()
        if head == "incomplete":
            _take(kv, ("loglog",), text)
            return incomplete_family(kv.get("loglog", "natural"))
        if head == "nonconvex-alt":
            _take(kv, (), text)
            return nonconvex_family()
        if head == "linear":
            _take(kv, ("bound", "seed"), text)
            return linear_family(float(kv.get("bound", 1.0)), int(kv.get("seed", 0)))
    except SpecParseError:
        raise
    except ValueError as exc:
        raise SpecParseError(f"bad parameter in {text!r}: {exc}") from exc
    raise SpecParseError(f"unknown family {text!r}")
