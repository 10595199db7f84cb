from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cretanlab.errors import MixedRadicandError
from cretanlab.qfield import QuadExt, parse_quad, qx_add, qx_cmp, qx_inv, qx_mul, qx_to_float, squarefree_part


def q(a, b=0, d=1):
    return QuadExt(F(a), F(b), d)


class TestNormalization:
    def test_square_factor_folded(self):
        assert QuadExt(0, 1, 12) == QuadExt(0, 2, 3)
        assert QuadExt(0, 1, 12).radicand == 3

    @pytest.mark.parametrize("d", [0, 1, 4, 9])
    def test_rational_radicand_collapses(self, d):
        x = QuadExt(1, 2, d)
        assert x.radical_part == 0
        assert x.radicand == 1

    def test_reduced_rational(self):
        x = QuadExt(F(3, 6))
        assert (x.rational_part.numerator, x.rational_part.denominator) == (1, 2)
        assert QuadExt(0).rational_part.denominator == 1

    def test_squarefree_part(self):
        assert squarefree_part(72) == (6, 2)
        assert squarefree_part(13) == (1, 13)

    def test_negative_radicand_rejected(self):
        with pytest.raises(ValueError):
            QuadExt(0, 1, -3)


class TestArithmetic:
    def test_add(self):
        assert qx_add(q(F(1, 2)), q(F(1, 2), 1, 3)) == q(1, 1, 3)
        x = q(2, 5, 7)
        assert qx_add(x, 0) == x

    def test_sum_of_13_4_1_roots(self):
        assert q(F(3, 6), F(1, 6), 3) + q(F(3, 6), F(-1, 6), 3) == 1

    def test_mul(self):
        assert qx_mul(q(1, 1, 2), q(1, -1, 2)) == -1
        assert qx_mul(q(F(1, 2), F(1, 6), 3), q(F(1, 2), F(-1, 6), 3)) == F(1, 6)
        x = q(2, 5, 7)
        assert qx_mul(x, 1) == x

    def test_inv(self):
        assert qx_inv(2) == F(1, 2)
        assert qx_inv(q(1, 1, 2)) == q(-1, 1, 2)
        b = q(F(1, 2), F(-1, 6), 3)
        # 6 / (3 - sqrt(3)) = 6 (3 + sqrt(3)) / 6
        assert qx_inv(b) == q(3, 1, 3)
        assert b * qx_inv(b) == 1
        assert b * q(F(3, 2), F(1, 2), 3) == F(1, 2)

    def test_inv_zero(self):
        with pytest.raises(ZeroDivisionError):
            qx_inv(0)

    def test_mixed_radicands(self):
        with pytest.raises(MixedRadicandError):
            q(0, 1, 2) + q(0, 1, 3)
        with pytest.raises(MixedRadicandError):
            q(0, 1, 2) * q(0, 1, 3)
        # a rational operand mixes with anything
        assert q(0, 1, 2) + 3 == q(3, 1, 2)

    def test_pow(self):
        w = q(7, F(3, 2), 3)
        assert w**3 == w * w * w
        assert w**-1 == w.inverse()


class TestFloatAndCompare:
    def test_13_4_1_weights_to_float(self):
        assert qx_to_float(q(7, F(3, 2), 3)) == pytest.approx(9.5981, abs=5e-5)
        assert qx_to_float(q(7, F(-3, 2), 3)) == pytest.approx(4.4019, abs=5e-5)
        assert qx_to_float(F(-2, 3)) == pytest.approx(-0.666667, abs=1e-6)

    def test_cmp(self):
        assert qx_cmp(q(F(1, 2), F(1, 6), 3), 1) == -1
        assert qx_cmp(q(2, -1, 2), 1) == -1
        x = q(3, -2, 5)
        assert qx_cmp(x, x) == 0
        assert q(0, -1, 2) < -1 < q(-1, F(1, 10), 2)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            float(QuadExt(10**400))


class TestText:
    @pytest.mark.parametrize(
        "text, value",
        [
            ("-2/3", q(F(-2, 3))),
            ("7 + 3/2*sqrt(3)", q(7, F(3, 2), 3)),
            ("-1/2 - 1/6*sqrt(3)", q(F(-1, 2), F(-1, 6), 3)),
            ("sqrt(2)", q(0, 1, 2)),
            ("-sqrt(2)", q(0, -1, 2)),
            ("1 - sqrt(2)", q(1, -1, 2)),
            ("16", q(16)),
        ],
    )
    def test_roundtrip(self, text, value):
        assert str(value) == text
        assert parse_quad(text) == value

    def test_lenient_parse(self):
        assert parse_quad(" 1/2+1/2*sqrt(8) ") == q(F(1, 2), 1, 2)

    def test_bad_text(self):
        with pytest.raises(ValueError):
            parse_quad("sqrt(-2)")


fractions = st.fractions(min_value=-50, max_value=50, max_denominator=40)
radicands = st.sampled_from([2, 3, 5, 6, 7, 13])


@st.composite
def same_field(draw, count=3):
    d = draw(radicands)
    return [QuadExt(draw(fractions), draw(fractions), d) for _ in range(count)]


@given(same_field())
def test_ring_axioms(xs):
    a, b, c = xs
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a


@given(same_field(1))
def test_inverse_is_exact(xs):
    (a,) = xs
    if a:
        assert a * a.inverse() == 1


@given(same_field(2))
def test_cmp_agrees_with_float(xs):
    a, b = xs
    diff = float(a) - float(b)
    if abs(diff) > 1e-9:
        assert qx_cmp(a, b) == (1 if diff > 0 else -1)


@settings(max_examples=300)
@given(
    st.fractions(min_value=-(2**39), max_value=2**39, max_denominator=1000),
    st.fractions(min_value=-(2**39), max_value=2**39, max_denominator=1000),
    radicands,
)
def test_float_within_4_ulp(a, b, d):
    x = QuadExt(a, b, d)
    with mpmath.workprec(200):
        ref = mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator * mpmath.sqrt(d)
        got = float(x)
        if ref == 0:
            assert got == 0
        else:
            ulp = mpmath.mpf(2) ** (mpmath.floor(mpmath.log(abs(ref), 2)) - 52)
            assert abs(mpmath.mpf(got) - ref) <= 4 * ulp


@given(same_field(1))
def test_text_roundtrip_property(xs):
    (a,) = xs
    assert parse_quad(str(a)) == a
