import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from conftest import delta_configs, delta_prime_configs, symbolic
from deltaspec import negspec, spectra
from deltaspec.errors import KindMismatch, RegularityMismatch
from deltaspec.model import delta, delta_prime, primitive_V
from deltaspec.spectra import Piece, PiecewiseFn

FREE = delta([], [])


class TestPropagate:
    def test_free_hyperbolic(self):
        s = spectra.propagate(FREE, -1.0, 1.0)
        f, fp = s.unscaled()
        assert f == pytest.approx(math.sinh(1.0), rel=1e-14)
        assert fp == pytest.approx(math.cosh(1.0), rel=1e-14)

    def test_delta_jump_at_point(self):
        f, fp = spectra.propagate(delta([2.0], [-1.0]), 0.0, 2.0).unscaled()
        assert (f, fp) == pytest.approx((2.0, -1.0), abs=1e-14)

    def test_left_side_skips_jump(self):
        f, fp = spectra.propagate(delta([2.0], [-1.0]), 0.0, 2.0, side="-").unscaled()
        assert (f, fp) == pytest.approx((2.0, 1.0), abs=1e-14)

    def test_delta_prime_jump_at_point(self):
        f, fp = spectra.propagate(delta_prime([1.0], [-3.0]), 0.0, 1.0).unscaled()
        assert (f, fp) == pytest.approx((-2.0, 1.0), abs=1e-14)

    def test_neumann_point_flags_decoupling(self):
        s = spectra.propagate(delta_prime([1.0], [math.inf]), -1.0, 2.0)
        assert s.decoupled

    def test_trigonometric_cell(self):
        f, fp = spectra.propagate(FREE, 4.0, 1.0).unscaled()
        assert f == pytest.approx(math.sin(2.0) / 2, rel=1e-13)
        assert fp == pytest.approx(math.cos(2.0), rel=1e-13)

    def test_long_hyperbolic_stretch_keeps_log_scale(self):
        s = spectra.propagate(FREE, -1.0, 2000.0)
        assert math.isfinite(s.f) and s.log_scale == pytest.approx(2000.0 - 0.5 * math.log(2.0), rel=1e-12)


def _transfer(kind, ops, E):
    cols = []
    for start in ((1.0, 0.0), (0.0, 1.0)):
        f, fp, logs = spectra._run(kind, ops, np.array(E), start)
        w = math.exp(float(logs))
        cols.append((float(f) * w, float(fp) * w))
    return np.array(cols).T


class TestTransferDeterminant:
    @given(st.floats(0.01, 5.0), st.floats(-10.0, 10.0))
    def test_single_cell(self, length, E):
        m = _transfer(spectra.Kind.DELTA, [("cell", length, 0.0, 0.0)], E)
        assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-12 * max(1.0, np.abs(m).max() ** 2))

    @given(delta_configs(), st.floats(-10.0, 10.0))
    def test_delta_program(self, cfg, E):
        m = _transfer(cfg.kind, spectra._program(cfg, spectra.last_edge(cfg) + 0.5), E)
        assert abs(np.linalg.det(m) - 1.0) <= 1e-12 * max(1.0, np.abs(m).max() ** 2)

    @given(delta_prime_configs(), st.floats(-10.0, 10.0))
    def test_delta_prime_program(self, cfg, E):
        m = _transfer(cfg.kind, spectra._program(cfg, spectra.last_edge(cfg) + 0.5), E)
        assert abs(np.linalg.det(m) - 1.0) <= 1e-12 * max(1.0, np.abs(m).max() ** 2)


class TestZeroCount:
    def test_sine_on_zero_pi(self):
        assert spectra.zero_count(FREE, 4.0, (0.0, math.pi)) == 1

    def test_linear_solution_has_no_zeros(self):
        assert spectra.zero_count(FREE, 0.0, (0.0, 10.0)) == 0

    def test_tail_zero(self):
        assert spectra.zero_count(delta([2.0], [-1.0]), 0.0) == 1

    def test_many_sine_zeros(self):
        assert spectra.zero_count(FREE, 1.0, (0.0, 10.5 * math.pi)) == 10

    def test_rejects_delta_prime(self):
        with pytest.raises(KindMismatch):
            spectra.zero_count(delta_prime([1.0], [1.0]), 0.0)

    @given(delta_configs(), st.floats(1.0, 20.0))
    def test_monotone_in_energy(self, cfg, extra):
        L = spectra.last_edge(cfg) + extra
        counts = [spectra.zero_count(cfg, E, (0.0, L)) for E in np.linspace(-30.0, 30.0, 25)]
        assert counts == sorted(counts)


class TestKappaOracle:
    @pytest.mark.parametrize("points, alpha, expected", [
        ([], [], 0),
        ([2.0], [-1.0], 1),
        ([0.5], [-1.0], 0),
        ([1.0, 2.0], [-3.0, -3.0], 2),
    ])
    def test_examples(self, points, alpha, expected):
        cfg = delta(points, alpha)
        assert spectra.kappa_oracle_delta(cfg) == expected
        if points:
            assert negspec.kappa_minus_delta(cfg.support, cfg.strengths) == expected

    def test_needs_delta(self):
        with pytest.raises(KindMismatch):
            spectra.kappa_oracle_delta(delta_prime([1.0], [-1.0]))

    @given(delta_configs())
    def test_equals_M_matrix_and_secular(self, cfg):
        k = spectra.kappa_oracle_delta(cfg)
        assert k == negspec.kappa_minus_delta(cfg.support, cfg.strengths)
        assert k == spectra.secular_scan(cfg).count


class TestSecularScan:
    def test_single_delta_well(self):
        res = spectra.secular_scan(delta([2.0], [-1.0]))
        assert res.count == 1
        e = res.eigs[0]
        kappa = math.sqrt(-e.E)
        # A(kappa) = 0 means f'/f = -kappa beyond x = 2: 2 kappa = 1 - exp(-4 kappa)
        assert 2 * kappa == pytest.approx(1 - math.exp(-4 * kappa), abs=1e-12)
        assert e.E_low <= e.E <= e.E_high

    def test_delta_prime_attractive(self):
        assert spectra.secular_scan(delta_prime([1.0], [-1.0])).count == 1

    def test_delta_prime_repulsive(self):
        assert spectra.secular_scan(delta_prime([1.0], [2.0]), kappa_max=50.0).count == 0

    def test_neumann_points_split_segments(self):
        res = spectra.secular_scan(delta_prime([1.0, 2.0, 3.0], [-1.0, math.inf, -1.0]))
        assert res.count == 2 and res.flags

    def test_samples_cover_grid(self):
        res = spectra.secular_scan(delta([1.0], [-2.0]), grid_points=64)
        assert len(res.samples) == 64

    def test_eigenvalues_sorted(self):
        vals = spectra.secular_scan(delta([1.0, 2.0, 3.0], [-4.0, -4.0, -4.0])).values
        assert np.all(np.diff(vals) > 0)

    @given(delta_prime_configs())
    def test_delta_prime_count_is_negative_beta(self, cfg):
        try:
            count = spectra.secular_scan(cfg).count
        except spectra.SuspectClustering:
            return
        assert count == negspec.kappa_minus_delta_prime(cfg.strengths_values())


def _two_cell_determinant(k):
    # sin k (2 cos k + 10 sin k / k): Dirichlet at 0 and 2 with alpha = 10 at x = 1
    return 2 * math.cos(k) + 10 * math.sin(k) / k


class TestTruncatedEigs:
    def test_free_pi(self):
        vals = spectra.truncated_eigs(FREE, math.pi, 5).values
        assert vals == pytest.approx([1, 4, 9, 16, 25], abs=1e-8)

    def test_free_unit(self):
        vals = spectra.truncated_eigs(FREE, 1.0, 2).values
        assert vals == pytest.approx([math.pi**2, 4 * math.pi**2], rel=1e-10)

    def test_repulsive_delta_against_matching_determinant(self):
        k = brentq(_two_cell_determinant, math.pi / 2 + 1e-9, math.pi - 1e-9, xtol=1e-15)
        e = spectra.truncated_eigs(delta([1.0], [10.0]), 2.0, 1).eigs[0]
        assert e.E == pytest.approx(k * k, rel=1e-10)
        assert e.E_low <= k * k + 1e-9 and k * k - 1e-9 <= e.E_high

    def test_attractive_delta_negative_ground_state(self):
        e = spectra.truncated_eigs(delta([1.0], [-5.0]), 2.0, 1).eigs[0]
        # Dirichlet at 0 and 2, symmetric well: tanh(kappa) = 2 kappa / 5 for the even mode
        kappa = math.sqrt(-e.E)
        assert math.tanh(kappa) == pytest.approx(2 * kappa / 5, abs=1e-9)

    def test_delta_prime_free_limit(self):
        vals = spectra.truncated_eigs(delta_prime([1.0], [1e-12]), math.pi, 3).values
        assert vals == pytest.approx([1, 4, 9], abs=1e-6)

    def test_delta_prime_repulsive_against_matching_determinant(self):
        # f = sin kx on (0,1); jump f(1+) = f(1-) + beta f'(1); f(2) = 0
        def det(k):
            f1, fp1 = math.sin(k), k * math.cos(k)
            f1 += 2.0 * fp1
            return f1 * math.cos(k) + fp1 / k * math.sin(k)

        ks = np.linspace(0.05, 3.0, 3000)
        sign = np.sign([det(k) for k in ks])
        i = int(np.nonzero(sign[:-1] != sign[1:])[0][0])
        k = brentq(det, ks[i], ks[i + 1], xtol=1e-15)
        e = spectra.truncated_eigs(delta_prime([1.0], [2.0]), 2.0, 1).eigs[0]
        assert e.E == pytest.approx(k * k, rel=1e-9)

    def test_length_checked(self):
        with pytest.raises(ValueError):
            spectra.truncated_eigs(delta([2.0], [1.0]), 1.0, 1)


class TestQuasiDerivative:
    def test_free(self):
        a = spectra.propagate(FREE, -1.0, 1.0)
        b = spectra.quasi_derivative_propagate(FREE, -1.0, 1.0)
        assert b.unscaled() == pytest.approx(a.unscaled(), rel=1e-8)

    def test_single_delta(self):
        cfg = delta([1.0], [-1.0])
        a = spectra.propagate(cfg, 0.0, 2.0)
        b = spectra.quasi_derivative_propagate(cfg, 0.0, 2.0)
        assert b.unscaled() == pytest.approx(a.unscaled(), rel=1e-8)

    def test_quasi_derivative_continuous_across_point(self):
        cfg = delta([1.0], [-1.5])
        left = spectra.quasi_derivative_propagate(cfg, 2.0, 1.0 - 1e-9)
        right = spectra.quasi_derivative_propagate(cfg, 2.0, 1.0 + 1e-9)
        V = primitive_V(cfg)
        y1_left = left.fprime - V(1.0 - 1e-9) * left.f
        y1_right = right.fprime - V(1.0 + 1e-9) * right.f
        assert y1_left == pytest.approx(y1_right, abs=1e-7)

    def test_rejects_delta_prime(self):
        with pytest.raises(KindMismatch):
            spectra.quasi_derivative_propagate(delta_prime([1.0], [1.0]), 0.0, 2.0)

    @settings(max_examples=25)
    @given(delta_configs(), st.floats(-10.0, 10.0))
    def test_agrees_with_propagate(self, cfg, E):
        to = spectra.last_edge(cfg) + 1.0
        fa, pa = spectra.propagate(cfg, E, to).unscaled()
        fb, pb = spectra.quasi_derivative_propagate(cfg, E, to).unscaled()
        assert math.hypot(fa - fb, pa - pb) <= 1e-8 * math.hypot(fa, pa)


def _hat(nodes, values):
    """Continuous piecewise-linear function through ``(nodes, values)``."""
    pieces = []
    for (a, va), (b, vb) in zip(zip(nodes, values), zip(nodes[1:], values[1:])):
        pieces.append(Piece(a, b, "poly", (va, (vb - va) / (b - a))))
    return PiecewiseFn(tuple(pieces))


def _sawtooth(n_points):
    """Slope +-1 zigzag on pairs of gaps 1/k with cusps at the odd points and zeros at the even ones."""
    gaps = [1.0 / k for k in range(1, n_points // 2 + 2) for _ in range(2)]
    xs = np.concatenate(([0.0], np.cumsum(gaps)))
    pieces = [Piece(0.0, xs[1], "poly", (0.0, 1.0))]
    slope = -1.0
    for j in range(1, len(xs) - 2, 2):
        lo, hi = xs[j], xs[j + 2]
        pieces.append(Piece(lo, hi, "poly", (slope * (lo - xs[j + 1]), slope)))
        slope = -slope
    return PiecewiseFn(tuple(pieces)), xs


class TestEvalForm:
    @pytest.mark.parametrize("points, alpha", [([2.0], [-1.0]), ([1.0, 2.0, 3.5], [-3.0, 1.0, -2.0])])
    def test_half_line_bound_state(self, points, alpha):
        cfg = delta(points, alpha)
        for e in spectra.secular_scan(cfg).eigs:
            fn = spectra.eigenfunction(cfg, e.E)
            assert spectra.eval_form(cfg, fn) == pytest.approx(e.E * fn.norm_sq(), rel=1e-8)

    def test_truncated_delta_prime_eigenpair(self):
        cfg = delta_prime([1.0, 2.0], [-0.5, 1.5])
        for e in spectra.truncated_eigs(cfg, 3.0, 3).eigs:
            fn = spectra.eigenfunction(cfg, e.E, 3.0)
            assert spectra.eval_form(cfg, fn) == pytest.approx(e.E * fn.norm_sq(), rel=1e-8)

    def test_free_sine(self):
        fn = spectra.eigenfunction(FREE, 4.0, math.pi)
        assert spectra.eval_form(FREE, fn) == pytest.approx(4.0 * fn.norm_sq(), rel=1e-12)

    def test_discontinuous_function_rejected_for_delta(self):
        fn = PiecewiseFn((Piece(0.0, 1.0, "poly", (0.0, 1.0)), Piece(1.0, 2.0, "poly", (3.0, -3.0))))
        with pytest.raises(RegularityMismatch):
            spectra.eval_form(delta([0.5], [1.0]), fn)

    def test_delta_prime_jump_energy(self):
        # jump of 1 at x = 1 costs 1 / beta
        fn = PiecewiseFn((Piece(0.0, 1.0, "poly", (0.0,)), Piece(1.0, 2.0, "poly", (1.0, -1.0))))
        val = spectra.eval_form(delta_prime([1.0], [4.0]), fn)
        assert val == pytest.approx(1.0 + 0.25, rel=1e-14)

    def test_sawtooth_partial_sums(self):
        n = 400
        fn, xs = _sawtooth(n)
        pair = lambda e: {"rule": {"type": "interleaved", "odd": {"type": "expr", "expr": e},  # noqa: E731
                                   "even": {"type": "expr", "expr": e}}}
        cfg = symbolic("delta", {"gaps": pair("1/k")}, pair("-2*k"))
        parts = spectra.eval_form(cfg, fn, upto=n)
        norms = [p.norm_sq for p in parts]
        assert norms[-1] == pytest.approx(math.fsum(2.0 / (3.0 * k**3) for k in range(1, n // 2 + 1)), rel=1e-12)
        assert max(norms) < 2.0 / 3.0 * 1.2020569031595942
        kinetic = [p.kinetic for p in parts]
        assert kinetic == pytest.approx([p.x for p in parts], rel=1e-12)
        assert np.all(np.diff(kinetic) > 0)

    def test_example_negative_interactions_unbounded(self):
        a = 2.0
        cfg = symbolic(
            "delta",
            {"rule": {"type": "interleaved", "odd": {"type": "expr", "expr": "k"},
                      "even": {"type": "expr", "expr": "k+2^(-3*k)"}}},
            {"rule": {"type": "interleaved", "odd": {"type": "expr", "expr": "2^k"},
                      "even": {"type": "expr", "expr": "-2^k"}}},
        )
        fn = PiecewiseFn((Piece(0.0, math.inf, "exp", ((1.0, -math.log(a) / 2, 0.0),)),))
        parts = spectra.eval_form(cfg, fn, upto=40)
        inter = np.diff([0.0] + [p.interaction for p in parts])
        negative = -inter[1::2]
        # every negative term is 2^(-2^(-3k)) >= 2^(-1/8), so the sum grows linearly
        assert np.all(negative >= 2 ** -0.125 - 1e-12)
        assert negative == pytest.approx(2.0 ** -(2.0 ** (-3.0 * np.arange(1, 21))), rel=1e-12)

    @settings(max_examples=30)
    @given(delta_configs(max_points=4), st.lists(st.floats(-3.0, 3.0), min_size=6, max_size=6))
    def test_rayleigh_bound(self, cfg, inner):
        L = spectra.last_edge(cfg) + 1.0
        nodes = list(np.linspace(0.0, L, len(inner) + 2))
        values = [0.0] + inner + [0.0]
        if max(abs(v) for v in inner) < 1e-3:
            return
        fn = _hat(nodes, values)
        ground = spectra.truncated_eigs(cfg, L, 1).eigs[0].E
        ratio = spectra.eval_form(cfg, fn) / fn.norm_sq()
        assert ratio >= ground - 1e-8 * max(1.0, abs(ground))
