import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fekete_lab.analysis import (
    cosine_chain,
    euclidean_lemma_gamma,
    inductive_bound_trace,
    limit_diagnostics,
    log_doubling_margin,
    operator_norm,
    proposition_gap_scan,
    read_matrix_csv,
    rn_inequality_check,
    rn_inequality_direct,
    rn_margins,
    sign_stabilization_check,
    spectral_radius_demo,
    submultiplicativity_violations,
    theta_bound_check,
    theta_margins,
)
from fekete_lab.errors import BandViolation, ZeroVectorNormalization
from fekete_lab.sequences import SequenceFamily, parse_family
from fekete_lab.spaces import FiniteVector, SpaceSpec, norms
from fekete_lab.verify import ConstraintBand, Verdict, check_scalar_band_subadditivity, check_subadditivity

mpmath.mp.dps = 50
W = FiniteVector([1.0, 0.5])


def test_linear_family_diagnostics():
    d = limit_diagnostics(parse_family("linear:bound=1,seed=0"), 400)
    assert d.verdict is Verdict.CONVERGENCE
    assert d.growth_inf <= d.growth_trailing
    assert d.growth_trailing == pytest.approx(math.hypot(1, 0.5), abs=1e-2)
    assert np.allclose(d.limit_estimate, W.coords, atol=1e-2)


def test_scaled_basis_diagnostics_diverge():
    d = limit_diagnostics(parse_family("scaled-basis"), 100)
    assert d.verdict is Verdict.DIVERGENCE
    assert d.direction_gap == pytest.approx(2.0, abs=1e-6)
    assert all(g >= 2 - 1e-6 for _, _, g in d.window_gaps)


def test_spiral_growth_rate_closed_form():
    for N in (10, 100, 1000):
        d = limit_diagnostics(parse_family("spiral2d"), N)
        assert d.growth_inf == pytest.approx(1 + math.log(N + 1) ** -0.5, rel=1e-13)
        assert d.growth_argmin == N


def test_growth_inf_is_prefix_minimum_and_monotone():
    fam = parse_family("linear:bound=5,seed=2")
    prev = math.inf
    for N in (8, 16, 32, 64):
        d = limit_diagnostics(fam, N)
        nr = norms(fam.space, fam.matrix(N))
        assert d.growth_inf == np.min(nr / np.arange(1, N + 1))
        assert d.growth_inf <= prev
        prev = d.growth_inf


def test_fekete_lower_bound_on_subadditive_prefix():
    fam = parse_family("linear:bound=2,seed=1")
    N = 200
    assert check_subadditivity(fam, max_sum=N).ok
    L = limit_diagnostics(fam, N).growth_inf
    nr = norms(fam.space, fam.matrix(N))
    assert np.all(nr >= np.arange(1, N + 1) * L * (1 - 1e-15))


def test_zero_vectors_reported_and_skipped():
    u = FiniteVector([1.0, 0.0])
    fam = SequenceFamily("holes", SpaceSpec.euclidean(2),
                         lambda n: FiniteVector([0.0, 0.0]) if n == 3 else u * n)
    d = limit_diagnostics(fam, 20)
    assert d.zero_indices == [3]
    assert d.verdict is Verdict.LIMIT_ZERO
    with pytest.raises(ZeroVectorNormalization):
        proposition_gap_scan(fam, 2, 20)
    assert proposition_gap_scan(fam, 4, 20).max_gap == 0.0


def test_gap_scan_linear_bound():
    fam = SequenceFamily("ray", SpaceSpec.euclidean(2), lambda n: W * n)
    assert proposition_gap_scan(fam, 1, 200).max_gap == pytest.approx(0.0, abs=1e-15)
    bound, w = 1.0, math.hypot(1, 0.5)
    lin = parse_family("linear:bound=1,seed=0")
    prev = math.inf
    for start in (10, 20, 40, 80):
        g = proposition_gap_scan(lin, start, 4 * start).max_gap
        # |v_n/|v_n| - v_m/|v_m|| <= 2 bound / (n |w|) for orthogonal perturbations
        assert g <= 4 * bound / (start * w)
        assert g < prev
        prev = g


def test_gap_scan_contrapositive_on_general_spiral():
    fam = parse_family("spiral2d-general:delta=0.5")
    assert proposition_gap_scan(fam, 3, 400).max_gap > 0.5
    assert not check_subadditivity(fam, max_sum=400, stop_at_first=True).ok


def test_trace_scaled_basis_rows():
    t = inductive_bound_trace(parse_family("scaled-basis"), 1, 5, 1.0)
    assert t.k == 5 and [r.r for r in t.rows] == [1, 2, 3, 4, 5]
    for row in t.rows:
        j = row.r + 5
        assert row.actual == pytest.approx(j + j / 4.0**j, rel=1e-15)
        assert row.bound == pytest.approx(5 + 5 / 4.0**5 + row.r * 1.25, rel=1e-15)
        assert row.slack >= 0


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["spiral2d", "scaled-basis", "uc-witness", "linear:bound=3,seed=1", "nonconvex-alt"]),
       st.integers(1, 20), st.integers(1, 40))
def test_trace_gamma_one_never_negative_on_subadditive_chain(text, n, extra):
    t = inductive_bound_trace(parse_family(text), n, n + extra, 1.0)
    for row in t.rows:
        if row.chain_ok:
            assert row.slack >= -1e-9 * max(1.0, row.bound)


def test_spiral_trace_with_euclidean_gamma():
    fam = parse_family("spiral2d")
    gap = 0.001
    t = inductive_bound_trace(fam, 50, 130, euclidean_lemma_gamma(gap), epsilon=gap)
    assert t.k == 3
    flags = [row.chain_ok for row in t.rows]
    assert flags == sorted(flags, reverse=True)  # once broken, stays broken
    for row in t.rows:
        if row.chain_ok:
            assert row.slack >= -1e-9
        assert row.chain_ok <= (row.gap_ok and row.ratio_ok and row.subadditive_ok)


def test_rn_margins_against_mpmath():
    def mp_margin(n, m):
        r = lambda k: mpmath.mpf(k) + mpmath.mpf(k) / mpmath.sqrt(mpmath.log(k + 1))
        c = 1 - 1 / (100 * mpmath.log(n + 1) ** mpmath.mpf(1.5))
        return r(n) ** 2 + r(m) ** 2 + 2 * c * r(n) * r(m) - r(n + m) ** 2

    assert rn_inequality_check(1, 1) == pytest.approx(19.211848029273314 - 15.273473562507361, rel=1e-12)
    for n, m in [(1, 1), (1, 2), (7, 10), (100, 199), (2000, 4000), (10**4, 15_000)]:
        ref = float(mp_margin(n, m))
        assert rn_inequality_check(n, m) == pytest.approx(ref, rel=1e-9)
        assert rn_inequality_direct(n, m) == pytest.approx(ref, rel=1e-9)
    with pytest.raises(BandViolation):
        rn_inequality_check(5, 11)
    with pytest.raises(BandViolation):
        rn_margins(5, [4])


def test_log_doubling():
    assert all(log_doubling_margin(n) >= 0 for n in range(1, 10_000))


def test_theta_examples():
    t = theta_bound_check(1)
    assert t.gap == pytest.approx(0.009124443057840285, rel=1e-14)
    assert t.bound == pytest.approx(0.02632757750083982, rel=1e-14)
    assert t.ok
    gap, bound = theta_margins(np.arange(1, 10**6 + 1))
    assert np.all(gap >= 0) and np.all(gap <= bound)


def test_cosine_chain_is_non_increasing():
    for n in (1, 3, 50, 1000):
        for m in (n, (3 * n) // 2 or n, 2 * n):
            c = cosine_chain(n, m)
            assert all(b <= a + 1e-15 for a, b in zip(c, c[1:]))
    with pytest.raises(BandViolation):
        cosine_chain(3, 7)


def test_sign_stabilization_examples():
    assert sign_stabilization_check(lambda n: -n, 100) == 1
    assert sign_stabilization_check(lambda n: (-1) ** n * n, 100) is None
    assert sign_stabilization_check(lambda n: n if n >= 5 else -n, 100) == 5
    alt = check_scalar_band_subadditivity(lambda n: (-1) ** n * n, ConstraintBand.ratio(0.5, 2), 100)
    assert not alt.ok


def test_spectral_examples():
    diag = spectral_radius_demo(np.diag([2.0, 1.0]), 32)
    assert diag.roots == [2.0] * 32 and diag.radius_estimate == 2.0
    nil = spectral_radius_demo(np.array([[0.0, 1.0], [0.0, 0.0]]), 10)
    assert nil.nilpotent_at == 2 and nil.radius_estimate == 0.0 and nil.roots[1:] == [0.0] * 9
    sw = spectral_radius_demo(np.array([[0.0, 2.0], [1.0, 0.0]]), 64)
    assert abs(sw.running_inf[-1] - math.sqrt(2)) <= 1e-6
    assert submultiplicativity_violations(sw) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6))
def test_operator_norm_matches_svd(seed, d):
    M = np.random.default_rng(seed).standard_normal((d, d)) * 10.0 ** np.random.default_rng(seed).uniform(-3, 3)
    assert operator_norm(M) == pytest.approx(np.linalg.norm(M, ord=2), rel=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_submultiplicativity_on_random_matrices(seed):
    A = np.random.default_rng(seed).standard_normal((4, 4))
    rep = spectral_radius_demo(A, 40, seed=seed)
    assert submultiplicativity_violations(rep, 1e-9) == []
    assert rep.running_inf[-1] >= max(abs(np.linalg.eigvals(A))) - 1e-9


def test_read_matrix_csv(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("0,2\n1,0\n")
    assert np.array_equal(read_matrix_csv(p), [[0, 2], [1, 0]])
