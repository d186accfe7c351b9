import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deltaspec.errors import ConfigParse, KindMismatch, NonIncreasingSupport, UnknownAsymptotics, ZeroBetaStrength
from deltaspec.model import (
    Kind,
    Part,
    PiecewisePotential,
    Support,
    config_from_json,
    delta,
    delta_prime,
    primitive_V,
    spacings,
    validate,
    window_functional,
)
from deltaspec.sequences import Custom

from conftest import delta_configs, rule, symbolic


class TestValidate:
    def test_well_formed(self):
        validate(delta([1, 2], [-1, 3]))

    def test_decreasing_support(self):
        with pytest.raises(NonIncreasingSupport):
            validate(delta([2, 1], [1, 1]))

    def test_zero_beta(self):
        with pytest.raises(ZeroBetaStrength):
            validate(delta_prime([1], [0.0]))

    def test_json_rejects_unknown_keys(self):
        with pytest.raises(ConfigParse):
            config_from_json({"kind": "delta", "support": {"points": [1]}, "strengths": {"values": [1]}, "extra": 1})

    def test_json_rejects_inf_alpha(self):
        with pytest.raises(Exception):
            config_from_json({"kind": "delta", "support": {"points": [1]}, "strengths": {"values": ["inf"]}})

    def test_json_accepts_neumann_marker(self):
        cfg = config_from_json({"kind": "delta_prime", "support": {"points": [1]}, "strengths": {"values": ["inf"]}})
        assert math.isinf(cfg.strengths_values()[0])

    @pytest.mark.parametrize(
        "support, strengths",
        [
            ({"gaps": rule("1/k")}, rule("-(2*k+1)")),
            ({"gaps": rule("1/k")}, rule("k^3")),
            ({"gaps": rule("1/k")}, rule("-5*k")),
            ({"gaps": rule("1/k")}, rule("-1/k")),
        ],
    )
    def test_harmonic_family_configs_validate(self, support, strengths):
        cfg = symbolic("delta", support, strengths)
        assert cfg.kind is Kind.DELTA

    def test_interleaved_family_validates(self):
        support = {"rule": {"type": "interleaved", "odd": {"type": "expr", "expr": "k"},
                            "even": {"type": "expr", "expr": "k+2^(-3*k)"}}}
        strengths = {"rule": {"type": "interleaved", "odd": {"type": "expr", "expr": "2^k"},
                              "even": {"type": "expr", "expr": "-2^k"}}}
        cfg = symbolic("delta", support, strengths)
        assert cfg.support.x(4) == pytest.approx([1, 1 + 2**-3, 2, 2 + 2**-6])


class TestSpacings:
    def test_finite(self):
        s = spacings(Support.finite([1, 2, 4]))
        assert s.d == (1, 1, 2)
        assert (s.d_star, s.d_upper) == (1, 2)

    def test_square_root_rule(self):
        cfg = symbolic("delta", rule("sqrt(k)"), rule("1"))
        s = spacings(cfg.support)
        assert s.d_star == 0 and not s.d_star_positive

    def test_unit_rule(self):
        cfg = symbolic("delta", rule("k"), rule("1"))
        s = spacings(cfg.support)
        assert s.d_star == 1 and s.d_upper == 1

    @given(st.lists(st.fractions(min_value=Fraction(1, 100), max_value=10), min_size=1, max_size=10))
    def test_reconstruction_is_exact(self, gaps):
        pts = list(np.cumsum(gaps))
        s = spacings(Support.finite(pts))
        assert list(np.cumsum(s.d)) == pts


class TestWindows:
    def test_zero_potential(self):
        assert window_functional(PiecewisePotential(), 1.0).value == 0

    def test_constant_negative_potential(self):
        assert window_functional(PiecewisePotential.constant(-1.0), 1.0).value == pytest.approx(1.0)

    def test_interleaved_family_diverges(self):
        support = {"rule": {"type": "interleaved", "odd": {"type": "expr", "expr": "k"},
                            "even": {"type": "expr", "expr": "k+2^(-3*k)"}}}
        strengths = {"rule": {"type": "interleaved", "odd": {"type": "expr", "expr": "2^k"},
                              "even": {"type": "expr", "expr": "-2^k"}}}
        report = window_functional(symbolic("delta", support, strengths), 1.0, Part.NEGATIVE)
        assert report.status == "divergent"
        # the window starting at n carries the negative mass 2^n
        anchored = [(x, m) for x, m in report.witnesses if float(x).is_integer()]
        assert len(anchored) >= 3
        for x, mass in anchored:
            assert mass == pytest.approx(2.0**x)

    def test_custom_without_annotation(self):
        cfg = symbolic("delta", rule("k"), rule("1"))
        cfg = type(cfg)(cfg.kind, cfg.support, Custom(lambda n: -1.0), cfg.potential)
        with pytest.raises(UnknownAsymptotics):
            window_functional(cfg, 1.0)

    @given(delta_configs(), st.floats(0.1, 3.0), st.floats(0.0, 3.0))
    def test_monotone_in_width(self, cfg, w, extra):
        a = window_functional(cfg, w, Part.NEGATIVE).value
        b = window_functional(cfg, w + extra, Part.NEGATIVE).value
        assert b >= a - 1e-12


class TestPrimitiveV:
    def test_single_jump(self):
        V = primitive_V(delta([1], [-1]))
        assert V(0.5) == 0 and V(1.0) == 0 and V(1.5) == -1

    def test_potential_only(self):
        V = primitive_V(delta([], [], PiecewisePotential((3.0,), (2.0,), 0.0)))
        assert V(1.5) == pytest.approx(3.0) and V(10.0) == pytest.approx(6.0)

    def test_two_jumps(self):
        V = primitive_V(delta([1, 2], [1, 1]))
        assert [V(0.5), V(1.5), V(2.5)] == [0, 1, 2]

    def test_delta_prime_rejected(self):
        with pytest.raises(KindMismatch):
            primitive_V(delta_prime([1], [1.0]))

    @given(
        st.lists(st.floats(0.1, 3.0), min_size=1, max_size=6),
        st.lists(st.floats(0.0, 5.0), min_size=6, max_size=6),
        st.lists(st.floats(0.0, 4.0), min_size=2, max_size=2),
    )
    def test_monotone_for_nonnegative_data(self, gaps, alpha, qvals):
        pts = list(np.cumsum(gaps))
        pot = PiecewisePotential((1.0,), (qvals[0],), qvals[1])
        V = primitive_V(delta(pts, alpha[: len(pts)], pot))
        grid = np.linspace(0, pts[-1] + 2, 200)
        vals = [V(x) for x in grid]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
