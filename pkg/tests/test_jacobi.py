import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deltaspec import jacobi, spectra
from deltaspec.errors import InsufficientSequence, NonPositiveBeta
from deltaspec.jacobi import ShiftConvention, SymTridiagonal
from deltaspec.model import Support, delta, delta_prime
from deltaspec.sequences import Finite

from conftest import alphas, betas


def unit_support(n):
    return Support.finite(range(1, n + 1))


class TestDeltaBuilder:
    def test_free_unit_gaps(self):
        m = jacobi.build_delta_jacobi(unit_support(4), Finite((0.0,) * 4), 3)
        assert m.diag == pytest.approx([1, 1, 1])
        assert m.offdiag == pytest.approx([0.5, 0.5])

    def test_single_row(self):
        m = jacobi.build_delta_jacobi(unit_support(2), Finite((-3.0,)), 1)
        assert m.diag == pytest.approx([-0.5])

    def test_row_scale_uses_both_gaps(self):
        m = jacobi.build_delta_jacobi(Support.finite([1, 4]), Finite((2.0,)), 1)
        assert m.diag[0] == pytest.approx((2 + 1 + 1 / 3) / 4)

    def test_short_support(self):
        with pytest.raises(InsufficientSequence):
            jacobi.build_delta_jacobi(unit_support(2), Finite((1.0, 1.0)), 2)

    @given(st.lists(st.floats(0.0, 5.0), min_size=1, max_size=30), st.integers(1, 40))
    def test_nonnegative_alpha_gives_no_negative_rows(self, alpha, pad):
        cfg = delta(range(1, len(alpha) + 1), alpha)
        n = len(alpha) + pad
        assert jacobi.inertia(jacobi.truncation_matrix(cfg, n)).kappa_minus == 0


class TestDeltaPrimeBuilder:
    def test_unit_data(self):
        m = jacobi.build_delta_prime_jacobi(unit_support(2), Finite((1.0, 1.0)), 4)
        assert m.diag == pytest.approx([1, 2, 2, 2])
        assert m.offdiag == pytest.approx([1, 1, 1])

    def test_neumann_points(self):
        m = jacobi.build_delta_prime_jacobi(unit_support(2), Finite((math.inf, math.inf)), 3)
        assert m.diag == pytest.approx([1, 1, 1])
        assert m.offdiag == pytest.approx([1, 0])

    def test_first_entry(self):
        m = jacobi.build_delta_prime_jacobi(Support.finite([2]), Finite((1.0,)), 1)
        assert m.diag == pytest.approx([0.25])

    @given(st.lists(betas, min_size=1, max_size=40), st.data())
    def test_even_truncation_counts_negative_beta(self, beta, data):
        gaps = data.draw(st.lists(st.floats(0.05, 5.0), min_size=len(beta), max_size=len(beta)))
        support = Support.finite(np.cumsum(gaps))
        m = jacobi.build_delta_prime_jacobi(support, Finite(tuple(beta)), 2 * len(beta))
        assert jacobi.dense_inertia(m.dense()).kappa_minus == sum(b < 0 for b in beta)


class TestFactorization:
    def test_unit_data(self):
        parts = jacobi.factor_delta_prime(unit_support(2), Finite((1.0, 1.0)), 4)
        assert parts.residual < 1e-12

    def test_smallest_size(self):
        parts = jacobi.factor_delta_prime(unit_support(1), Finite((1.0,)), 2)
        assert np.allclose(parts.D, np.eye(2)) and np.allclose(parts.R, np.eye(2))

    def test_convention_is_recorded(self):
        parts = jacobi.factor_delta_prime(unit_support(2), Finite((1.0, 2.0)), 4)
        assert parts.shift_convention in set(ShiftConvention)

    def test_large_random(self, rng):
        d = rng.uniform(0.1, 10, 100)
        beta = rng.uniform(0.1, 10, 100) * rng.choice([-1, 1], 100)
        parts = jacobi.factor_delta_prime(Support.finite(np.cumsum(d)), Finite(tuple(beta)), 200)
        assert parts.residual < 1e-12

    @given(st.integers(1, 100), st.integers(0, 2**32 - 1))
    def test_residual_over_entry_range(self, m, seed):
        r = np.random.default_rng(seed)
        d = np.exp(r.uniform(math.log(1e-3), math.log(1e3), m))
        beta = np.exp(r.uniform(math.log(1e-3), math.log(1e3), m)) * r.choice([-1, 1], m)
        parts = jacobi.factor_delta_prime(Support.finite(np.cumsum(d)), Finite(tuple(beta)), 2 * m)
        assert parts.residual < 1e-12
        assert np.allclose(np.diag(parts.R) ** 2, np.repeat(d, 2))


class TestKreinString:
    def test_two_points(self):
        lengths, masses = jacobi.krein_string_map(Support.finite([1, 3]), Finite((3.0, 4.0)))
        assert list(lengths) == [1, 3, 2, 4] and list(masses) == [1, 1, 2, 2]

    def test_one_point(self):
        lengths, masses = jacobi.krein_string_map(Support.finite([1]), Finite((1.0,)))
        assert list(lengths) == [1, 1] and list(masses) == [1, 1]

    def test_negative_beta(self):
        with pytest.raises(NonPositiveBeta):
            jacobi.krein_string_map(Support.finite([1]), Finite((-1.0,)))


class TestInertia:
    def test_positive_diagonal(self):
        assert jacobi.inertia(SymTridiagonal([1, 1], [0])) == jacobi.InertiaTriple(0, 0, 2)

    def test_scalar(self):
        assert jacobi.inertia(SymTridiagonal([-0.5], [])) == jacobi.InertiaTriple(1, 0, 0)

    def test_zero_pivot_fallback(self):
        assert jacobi.inertia(SymTridiagonal([0, 0], [1])) == jacobi.InertiaTriple(1, 0, 1)

    def test_singular_matrix_counts_zero(self):
        assert jacobi.inertia(SymTridiagonal([1, 1], [1])) == jacobi.InertiaTriple(0, 1, 1)

    @given(st.integers(1, 200), st.integers(0, 2**32 - 1), st.floats(-3, 3))
    def test_matches_eigendecomposition(self, n, seed, shift):
        r = np.random.default_rng(seed)
        m = SymTridiagonal(r.normal(size=n), r.normal(size=n - 1))
        ev = np.linalg.eigvalsh(m.dense() - shift * np.eye(n))
        tri = jacobi.inertia(m, shift)
        assert tri.size == n
        assert (tri.kappa_minus, tri.kappa_plus) == (int(np.sum(ev < 0)), int(np.sum(ev > 0)))

    def test_exact_zero_eigenvalue_is_counted(self):
        # path graph Laplacian: eigenvalue 0 with multiplicity 1
        n = 7
        diag = np.full(n, 2.0)
        diag[[0, -1]] = 1.0
        tri = jacobi.inertia(SymTridiagonal(diag, -np.ones(n - 1)))
        assert tri == jacobi.InertiaTriple(0, 1, n - 1)


class TestSweep:
    sizes = [2, 4, 8, 16, 32, 64]

    def test_single_attractive_point(self):
        cfg = delta([1], [-2.0])
        sweep = jacobi.truncation_sweep(cfg, self.sizes)
        assert sweep.stabilized and sweep.final == spectra.kappa_oracle_delta(cfg) == 1

    def test_threshold_strength_has_no_bound_state(self):
        # alpha * x = -1 is a zero-energy resonance, not an eigenvalue
        cfg = delta([1], [-1.0])
        sweep = jacobi.truncation_sweep(cfg, self.sizes)
        assert sweep.final == spectra.kappa_oracle_delta(cfg) == spectra.secular_scan(cfg).count == 0

    def test_no_interaction(self):
        sweep = jacobi.truncation_sweep(delta([1, 2], [0.0, 0.0]), self.sizes)
        assert all(k == 0 for _, k in sweep.rows)

    def test_delta_prime_one_negative(self):
        sweep = jacobi.truncation_sweep(delta_prime([1, 2, 3], [-1.0, 2.0, 0.5]), self.sizes)
        assert sweep.stabilized and sweep.final == 1

    @given(st.lists(alphas, min_size=1, max_size=8))
    def test_stabilizes_to_oracle(self, alpha):
        cfg = delta(range(1, len(alpha) + 1), alpha)
        sweep = jacobi.truncation_sweep(cfg, [16, 32, 64])
        assert sweep.stabilized and sweep.final == spectra.kappa_oracle_delta(cfg)
