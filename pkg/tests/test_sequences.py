import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fekete_lab.errors import GeneratorFailure, IndexBelowStart, NonUnitInput, SpecParseError
from fekete_lab.sequences import (
    IncompleteParams,
    SpiralParams,
    incomplete_c,
    incomplete_space_seq,
    linear_plus_bounded,
    nonconvex_alternating,
    parse_family,
    scaled_basis,
    spiral2d,
    spiral2d_general,
    spiral_angle,
    spiral_general_family,
    spiral_radius,
    uc_witness_pair,
    uc_witness_sequence,
)
from fekete_lab.spaces import FiniteVector, SpaceSpec, norm, norms

mpmath.mp.dps = 40


def _mp_radius(n):
    n = mpmath.mpf(n)
    return n + n / mpmath.sqrt(mpmath.log(n + 1))


def test_spiral_first_terms_against_mpmath():
    assert spiral_radius(1) == pytest.approx(2.2011224087864498, rel=1e-15)
    assert spiral_angle(1) == 0.0
    for n in (1, 2, 7, 1000, 10**6):
        assert spiral_radius(n) == pytest.approx(float(_mp_radius(n)), rel=1e-14)
        th = mpmath.log(n) ** mpmath.mpf(0.25) / 100
        assert spiral_angle(n) == pytest.approx(float(th), rel=1e-14, abs=1e-300)


def test_spiral_vector_has_radius_and_angle():
    for n in (1, 5, 123, 99_999):
        v = spiral2d(n)
        assert norm(SpaceSpec.euclidean(2), v) == pytest.approx(spiral_radius(n), rel=1e-14)
        assert math.atan2(v.coord(2), v.coord(1)) == pytest.approx(spiral_angle(n), rel=1e-12, abs=1e-15)


def test_spiral_angle_closed_form_at_powers_of_two():
    for k in range(1, 61):
        assert spiral_angle(2**k) == pytest.approx((k * math.log(2)) ** 0.25 / 100, rel=1e-12)
    th = [spiral_angle(n) for n in range(1, 5000)]
    assert all(b > a for a, b in zip(th, th[1:]))


def test_spiral_radius_over_n_decreases_to_one():
    ratios = [spiral_radius(n) / n for n in range(1, 3000)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > 1.0


def test_generalized_spiral_values_and_start():
    p = SpiralParams(delta=0.5, start=3)
    v = spiral2d_general(3, p)
    r = 3 * (1 + math.log(3) ** -0.5)
    assert v.coord(1) == pytest.approx(r * math.cos(math.log(3) ** 0.5), rel=1e-14)
    assert math.atan2(v.coord(2), v.coord(1)) == pytest.approx(1.0481470739682, abs=1e-12)
    with pytest.raises(IndexBelowStart):
        spiral2d_general(2, p)
    base = SpiralParams(baseline=True)
    assert spiral2d_general(4, base) == spiral2d(4)
    fam = spiral_general_family(0.5)
    assert fam.vector(1) == spiral2d_general(3, p) * (1 / 3)
    with pytest.raises(ValueError):
        SpiralParams(delta=0.0)


def test_scaled_basis_norms_exact():
    X = SpaceSpec.convex_l1()
    assert norm(X, scaled_basis(1)) == 1.25
    assert norm(X, scaled_basis(2)) == 2.125
    for n in range(1, 60):
        assert norm(X, scaled_basis(n)) == pytest.approx(n + n / 4.0**n, rel=1e-15)
        assert scaled_basis(n).materialize() == FiniteVector.basis(n, n)


def test_scaled_basis_pair_sum_formula():
    X = SpaceSpec.convex_l1()
    for n, m in [(1, 2), (3, 7), (10, 40)]:
        s = scaled_basis(n).materialize() + scaled_basis(m).materialize()
        exact = n + m + math.sqrt(n * n / 16.0**n + m * m / 16.0**m)
        assert norm(X, s) == pytest.approx(exact, rel=1e-15)


@pytest.mark.parametrize("k", [1, 2, 10, 50])
def test_uc_witness_pairs(k):
    Y = SpaceSpec.nested()
    v, w = uc_witness_pair(k)
    assert norm(Y, v) == pytest.approx(1.0, abs=1e-12)
    assert norm(Y, w) == pytest.approx(1.0, abs=1e-12)
    vf, wf = v.materialize(), w.materialize()
    assert norm(Y, vf + wf) == pytest.approx(2 ** (1 - 1 / (k + 1)), abs=1e-12)
    assert norm(Y, vf - wf) == pytest.approx(2 ** (1 - 1 / (k + 1)), abs=1e-12)
    assert uc_witness_sequence(2 * k - 1).materialize() == vf
    assert uc_witness_sequence(2 * k).materialize() == wf


def test_incomplete_coefficients():
    assert incomplete_c(1) == pytest.approx(12.98994122707903, rel=1e-14)
    ref = mpmath.mpf(1) * (1 + 10 / mpmath.log(mpmath.log(10)))
    assert incomplete_c(1) == pytest.approx(float(ref), rel=1e-14)
    v1 = incomplete_space_seq(1).materialize()
    assert v1.coord(1) == pytest.approx(3.2474853067697578, rel=1e-15)
    assert len(v1.trimmed()) == 1
    with pytest.raises(ZeroDivisionError):
        incomplete_c(1, IncompleteParams("log10"))
    assert incomplete_c(2, IncompleteParams("log10")) > 0


def test_incomplete_coordinates_match_closed_form():
    for n in (3, 20, 100):
        v = incomplete_space_seq(n).materialize()
        c = incomplete_c(n)
        for m in range(1, n + 1):
            expected = float(mpmath.mpf(c) / n * mpmath.power(2, -(2**m)))
            got = v.coord(m) / n
            assert got == pytest.approx(expected, rel=1e-12, abs=0.0)
        assert v.coord(n + 1) == 0.0


def test_nonconvex_alternating():
    u, v = FiniteVector([1, 0]), FiniteVector([0, 1])
    assert nonconvex_alternating(1, u, v) == u
    assert nonconvex_alternating(4, u, v) == v * 4
    with pytest.raises(NonUnitInput):
        nonconvex_alternating(1, FiniteVector([2, 0]), v)
    with pytest.raises(NonUnitInput):
        nonconvex_alternating(1, u, u)


def test_linear_plus_bounded_deterministic_and_bounded():
    w = FiniteVector([1.0, 0.5])
    for n in (1, 7, 300):
        a = linear_plus_bounded(n, w, 2.0, seed=3)
        assert a == linear_plus_bounded(n, w, 2.0, seed=3)
        p = a - w * n
        assert 1.0 - 1e-12 <= np.linalg.norm(p.coords) <= 2.0 + 1e-12
        assert abs(p.coords @ w.coords) < 1e-12
    assert linear_plus_bounded(5, w, 0.0, 9) == w * 5


def test_family_matrix_and_failures():
    fam = parse_family("scaled-basis")
    M = fam.matrix(5)
    assert M.shape == (5, 5)
    assert np.array_equal(M, np.diag([1.0, 2, 3, 4, 5]))
    bad = parse_family("incomplete:loglog=log10")
    with pytest.raises(GeneratorFailure) as info:
        bad.vector(1)
    assert info.value.index == 1


@pytest.mark.parametrize(
    "text, name",
    [
        ("spiral2d", "spiral2d"),
        ("spiral2d-general:delta=0.5,start=4", "spiral2d-general:delta=0.5,start=4"),
        ("scaled-basis", "scaled-basis"),
        ("uc-witness", "uc-witness"),
        ("incomplete", "incomplete"),
        ("nonconvex-alt", "nonconvex-alt"),
        ("linear:bound=0,seed=1", "linear:bound=0,seed=1"),
    ],
)
def test_parse_family(text, name):
    assert parse_family(text).name == name
    assert parse_family(parse_family(text).name).name == name


@pytest.mark.parametrize(
    "text", ["spiral3d", "spiral2d:x=1", "spiral2d-general", "linear:bound", "linear:bound=a",
             "incomplete:loglog=ln", "linear:seed=1,seed=2"]
)
def test_parse_family_rejects(text):
    with pytest.raises(SpecParseError):
        parse_family(text)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5000))
def test_families_are_deterministic(n):
    for text in ("spiral2d", "scaled-basis", "uc-witness", "linear:bound=1,seed=4"):
        fam = parse_family(text)
        assert fam.vector(n) == fam.vector(n)


def test_uc_witness_family_rows_are_unit():
    fam = parse_family("uc-witness")
    assert np.allclose(norms(fam.space, fam.matrix(100)), 1.0, atol=1e-12)
