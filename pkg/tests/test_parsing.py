"""Spec-string and expression grammar."""

from __future__ import annotations

from fractions import Fraction

import pytest

from weilgeo import weil
from weilgeo.parsing import (
    ExprError,
    SpecStringError,
    parse_expression,
    parse_spec_string,
)
from weilgeo.weil import DInfTrunc, Dk, DkOfN, DOfN, PowerDk, WeilElement


class TestSpecStrings:
    @pytest.mark.parametrize("text,expected", [
        ("D", Dk(1)),
        ("D_3", Dk(3)),
        ("D(2)", DOfN(2)),
        ("D_2(3)", DkOfN(2, 3)),
        ("D_2(1)", Dk(2)),
        ("(D_2)^3", PowerDk(2, 3)),
        ("Dinf(2,4)", DInfTrunc(2, 4)),
        (" D_2( 3 ) ", DkOfN(2, 3)),
    ])
    def test_valid(self, text, expected):
        assert parse_spec_string(text) == expected

    @pytest.mark.parametrize("text", ["", "E", "D_0", "D()", "D_2(0)",
                                      "(D_2)^0", "Dinf(2)", "D_2(3"])
    def test_invalid(self, text):
        with pytest.raises(SpecStringError):
            parse_spec_string(text)


class TestExpressions:
    def test_cross_term_dies(self):
        spec = parse_spec_string("D(2)")
        out = parse_expression("(1+x1)*(1+x2)", spec)
        assert weil.to_string(out) == "1 + x1 + x2"

    def test_cube_vanishes(self):
        spec = parse_spec_string("D_2(1)")
        out = parse_expression("x*x*x", spec)
        assert out.is_zero()
        assert weil.to_string(out) == "0"

    def test_integer_coefficients_exact(self):
        spec = parse_spec_string("D_2(2)")
        out = parse_expression("2*x1*x2 + 3", spec)
        assert out == WeilElement(spec, {(1, 1): Fraction(2), (0, 0): Fraction(3)})

    def test_nested_parentheses(self):
        spec = parse_spec_string("D_3")
        out = parse_expression("((x))*((x+1))", spec)
        x = weil.generator(spec, 1)
        assert out == x * (x + 1)

    def test_unclosed_parenthesis(self):
        spec = parse_spec_string("D(2)")
        with pytest.raises(ExprError) as err:
            parse_expression("x1*(", spec)
        assert err.value.column == 5
        assert "column 5" in str(err.value)

    def test_unknown_generator(self):
        spec = parse_spec_string("D(2)")
        with pytest.raises(ExprError) as err:
            parse_expression("x1 + x3", spec)
        assert err.value.column == 6

    def test_bad_character(self):
        spec = parse_spec_string("D")
        with pytest.raises(ExprError) as err:
            parse_expression("x - 1", spec)
        assert err.value.column == 3

    def test_trailing_garbage(self):
        spec = parse_spec_string("D")
        with pytest.raises(ExprError):
            parse_expression("x x", spec)

    def test_single_generator_named_x(self):
        spec = parse_spec_string("D")
        assert parse_expression("x", spec) == weil.generator(spec, 1)
        with pytest.raises(ExprError):
            parse_expression("x1", spec)

    def test_empty_expression(self):
        with pytest.raises(ExprError) as err:
            parse_expression("", parse_spec_string("D"))
        assert err.value.column == 1

    def test_bare_constant(self):
        spec = parse_spec_string("D(3)")
        assert parse_expression("7", spec) == WeilElement.constant(spec, Fraction(7))
