import numpy as np
import pytest

from hinfrecon import ParseError, parse_tf, realize


class TestParse:
    def test_first_order(self):
        expr = parse_tf("1/(s+1)")
        assert expr.numerator == (1.0,)
        assert expr.denominator == (1.0, 1.0)

    def test_bare_s(self):
        expr = parse_tf("s")
        assert expr.numerator == (0.0, 1.0)
        assert expr.denominator == (1.0,)

    def test_product_and_square(self):
        expr = parse_tf("(s+1)*(s+2)/((s+3)^2)")
        # polynomial-multiplication oracle
        num = np.polynomial.polynomial.polymul([1.0, 1.0], [2.0, 1.0])
        den = np.polynomial.polynomial.polymul([3.0, 1.0], [3.0, 1.0])
        assert np.allclose(expr.numerator, num)
        assert np.allclose(expr.denominator, den)
        assert expr.numerator == (2.0, 3.0, 1.0)
        assert expr.denominator == (9.0, 6.0, 1.0)

    def test_monic_normalization(self):
        expr = parse_tf("4/(2*s+2)")
        assert expr.denominator == (1.0, 1.0)
        assert expr.numerator == (2.0,)

    def test_numbers_with_exponents(self):
        expr = parse_tf("1.5e-2 + 2E+1*s")
        assert np.allclose(expr.numerator, (0.015, 20.0))

    def test_unary_minus(self):
        expr = parse_tf("-s + 1")
        assert expr.numerator == (1.0, -1.0)

    def test_syntax_error_reports_offset(self):
        with pytest.raises(ParseError) as info:
            parse_tf("1/(s+)")
        assert info.value.offset == 5

    def test_division_by_zero_polynomial(self):
        with pytest.raises(ParseError):
            parse_tf("1/(s-s)")

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse_tf("s+1 junk")

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse_tf("   ")

    def test_print_parse_idempotent(self, rng):
        cases = ["1/(s+1)", "(s+1)*(s+2)/((s+3)^2)", "2", "s^3/(s^3+1)",
                 "0.25*(s+0.5)/(s^2+1.4*s+1)"]
        for text in cases:
            e1 = parse_tf(text)
            e2 = parse_tf(e1.to_string())
            assert e1.numerator == e2.numerator
            assert e1.denominator == e2.denominator


class TestRealize:
    def test_constant(self):
        sys = realize(parse_tf("2"))
        assert sys.order == 0
        assert np.allclose(sys.D, [[2.0]])

    def test_first_order_canonical(self):
        sys = realize(parse_tf("1/(s+1)"))
        assert np.allclose(sys.A, [[-1.0]])
        assert np.allclose(sys.B, [[1.0]])
        assert np.allclose(sys.C, [[1.0]])
        assert np.allclose(sys.D, [[0.0]])
        assert sys.strictly_proper

    def test_proper_has_feedthrough(self):
        sys = realize(parse_tf("(s+2)/(s+1)"))
        assert np.allclose(sys.D, [[1.0]])
        assert not sys.strictly_proper

    def test_response_matches_polynomial_oracle(self, rng):
        texts = [
            "(s+1)/(s^2+1.4*s+1)",
            "(2*s^2+s+0.5)/(s^3+2*s^2+2*s+1)",
            "1/(s^3+3*s^2+3*s+1)",
        ]
        for text in texts:
            expr = parse_tf(text)
            sys = realize(expr)
            for w in rng.uniform(0.1, 10.0, 32):
                s = 1j * w
                n = sys.order
                want = expr.eval(s)
                got = (sys.C @ np.linalg.solve(
                    s * np.eye(n) - sys.A, sys.B) + sys.D)[0, 0]
                assert abs(got - want) < 1e-9 * max(1.0, abs(want))

    def test_improper_rejected(self):
        with pytest.raises(ValueError):
            realize(parse_tf("s^2/(s+1)"))

    def test_realize_random_parsed_inputs(self, rng):
        # realize preserves the transfer function for random proper fractions
        def poly_text(coeffs):
            parts = [repr(abs(coeffs[0]))]
            if coeffs[0] < 0:
                parts[0] = "0 - " + parts[0]
            for i, c in enumerate(coeffs[1:], start=1):
                op = " - " if c < 0 else " + "
                parts.append(f"{op}{abs(c)!r}*s^{i}")
            return "".join(parts)

        for _ in range(5):
            den = [float(v) for v in rng.uniform(0.5, 2.0, 4)]
            num = [float(v) for v in rng.uniform(-2.0, 2.0, 3)]
            text = f"({poly_text(num)})/({poly_text(den)})"
            expr = parse_tf(text)
            sys = realize(expr)
            for w in rng.uniform(0.1, 5.0, 8):
                s = 1j * w
                got = (sys.C @ np.linalg.solve(
                    s * np.eye(sys.order) - sys.A, sys.B) + sys.D)[0, 0]
                assert abs(got - expr.eval(s)) < 1e-9
