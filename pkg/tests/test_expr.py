"""Parser, evaluator, and dual-number tests for the expression language."""

import numpy as np
import numpy.testing as npt
import pytest

from phaseq import parse, to_source, wirtinger
from phaseq.errors import EvalError, ParseError

VARS2 = ("q1", "p1")


def _fd_gradient(expr, point, h=1e-7):
    out = []
    for k in range(len(point)):
        up = list(point)
        dn = list(point)
        up[k] += h
        dn[k] -= h
        out.append((expr.evaluate(up) - expr.evaluate(dn)) / (2 * h))
    return np.array(out)


def test_basic_arithmetic_values():
    e = parse("2*q1 + p1/4 - 1", VARS2)
    assert e.evaluate((3.0, 8.0)) == pytest.approx(7.0)
    e = parse("q1*p1 + q1^2", VARS2)
    assert e.evaluate((2.0, 5.0)) == pytest.approx(14.0)
    e = parse("exp(0) + sin(0) + cos(0)", VARS2)
    assert e.evaluate((0.0, 0.0)) == pytest.approx(2.0)


def test_imaginary_unit():
    e = parse("(q1 + i*p1) * (q1 - i*p1)", VARS2)
    assert e.evaluate((3.0, 4.0)) == pytest.approx(25.0 + 0.0j)
    e = parse("i^2", VARS2)
    assert e.evaluate((0.0, 0.0)) == pytest.approx(-1.0 + 0.0j)


def test_precedence_and_associativity():
    e = parse("2 + 3 * 4", VARS2)
    assert e.evaluate((0, 0)) == pytest.approx(14.0)
    # unary minus binds looser than the power
    e = parse("-q1^2", VARS2)
    assert e.evaluate((3.0, 0.0)) == pytest.approx(-9.0)
    # right-associative power with constant folding
    e = parse("q1^2^3", VARS2)
    assert e.evaluate((2.0, 0.0)) == pytest.approx(256.0)
    e = parse("q1^(1+1)", VARS2)
    assert e.evaluate((5.0, 0.0)) == pytest.approx(25.0)
    e = parse("2^-2", VARS2)
    assert e.evaluate((0.0, 0.0)) == pytest.approx(0.25)


def test_number_formats():
    e = parse("1.5e-3 + .5", VARS2)
    assert e.evaluate((0, 0)) == pytest.approx(0.5015)


def test_pretty_printer_round_trip():
    rng = np.random.default_rng(20)
    sources = [
        "q1 + p1*q1 - 2/p1",
        "-(q1 + p1)^3 * sin(q1)",
        "exp(q1*p1) - cos(q1)/(1 + p1^2)",
        "(q1 + i*p1)^2 - sqrt(2)*q1",
        "q1^-2 + p1^2^2",
    ]
    for src in sources:
        e = parse(src, VARS2)
        printed = to_source(e.ast)
        e2 = parse(printed, VARS2)
        for _ in range(10):
            pt = rng.uniform(0.3, 1.7, size=2)
            npt.assert_allclose(
                complex(e.evaluate(pt)), complex(e2.evaluate(pt)), rtol=1e-14
            )


def test_printer_parenthesizes_power_base():
    e = parse("(q1*p1)^2", VARS2)
    assert to_source(e.ast) == "(q1 * p1)^2"
    e2 = parse(to_source(e.ast), VARS2)
    assert e2.evaluate((2.0, 3.0)) == pytest.approx(36.0)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    sources = [
        "q1^3 - 2*q1*p1 + p1^2",
        "exp(q1) * sin(p1)",
        "cos(q1*p1) + q1/p1",
        "(q1 + i*p1)^3",
        "sqrt(q1) * p1",
    ]
    for src in sources:
        e = parse(src, VARS2)
        for _ in range(15):
            pt = rng.uniform(0.4, 1.6, size=2)
            dual = e.eval_dual(pt)
            assert dual.value == pytest.approx(e.evaluate(pt), rel=1e-13)
            fd = _fd_gradient(e, pt)
            npt.assert_allclose(dual.partials, fd, rtol=2e-6, atol=2e-7)


def test_batch_matches_scalar_eval():
    rng = np.random.default_rng(3)
    e = parse("exp(q1) * cos(p1) - q1^2 / (1 + p1^2)", VARS2)
    pts = rng.uniform(-1.0, 1.0, size=(40, 2))
    values, partials = e.eval_batch(pts, want_partials=True)
    for k in range(len(pts)):
        assert values[k] == pytest.approx(e.evaluate(pts[k]), rel=1e-13)
        npt.assert_allclose(partials[k], e.eval_dual(pts[k]).partials, rtol=1e-12)


def test_wirtinger_derivatives():
    hol = parse("(q1 + i*p1)^2", VARS2)
    d_w, d_wbar = wirtinger(hol, (0.7, -0.3))
    assert abs(d_wbar) < 1e-14
    assert d_w == pytest.approx(2 * (0.7 - 0.3j), rel=1e-13)
    anti = parse("q1 - i*p1", VARS2)
    d_w, d_wbar = wirtinger(anti, (0.2, 0.9))
    assert abs(d_w) < 1e-14
    assert d_wbar == pytest.approx(1.0)


def test_parse_error_messages():
    with pytest.raises(ParseError, match="unclosed parenthesis"):
        parse("(q1 + p1", VARS2)
    with pytest.raises(ParseError, match="undeclared identifier zz"):
        parse("q1 + zz", VARS2)
    with pytest.raises(ParseError, match="exponent must be a constant integer"):
        parse("q1^p1", VARS2)
    with pytest.raises(ParseError, match="requires parentheses"):
        parse("exp q1", VARS2)
    with pytest.raises(ParseError, match="unexpected token"):
        parse("2 q1", VARS2)
    with pytest.raises(ParseError, match="unexpected end of input"):
        parse("q1 +", VARS2)


def test_parse_error_carries_position():
    try:
        parse("q1 + zz", VARS2)
    except ParseError as exc:
        assert exc.position == 5
        assert "position 5" in str(exc)
    else:
        raise AssertionError("expected a parse error")


def test_variable_name_validation():
    with pytest.raises(ParseError, match="duplicate variable name"):
        parse("1", ("q1", "q1"))
    with pytest.raises(ParseError, match="reserved"):
        parse("1", ("i",))
    with pytest.raises(ParseError, match="reserved"):
        parse("1", ("sqrt",))
    with pytest.raises(ParseError, match="invalid variable name"):
        parse("1", ("2x",))


def test_eval_errors_report_lowest_point():
    e = parse("1/q1", ("q1",))
    pts = np.array([[2.0], [0.0], [1.0], [0.0]])
    with pytest.raises(EvalError, match=r"division by zero \(point index 1\)"):
        e.eval_batch(pts)
    try:
        e.eval_batch(pts)
    except EvalError as exc:
        assert exc.point_index == 1


def test_eval_error_kinds():
    with pytest.raises(EvalError, match="sqrt requires a positive real argument"):
        parse("sqrt(q1)", ("q1",)).eval_batch(np.array([[-1.0]]))
    with pytest.raises(EvalError, match="sqrt requires a positive real argument"):
        parse("sqrt(i*q1)", ("q1",)).eval_batch(np.array([[1.0]]))
    with pytest.raises(EvalError, match="zero raised to a negative power"):
        parse("q1^-1", ("q1",)).eval_batch(np.array([[1.0], [0.0]]))


def test_sqrt_positive_real_works():
    e = parse("sqrt(q1)", ("q1",))
    assert e.evaluate((9.0,)) == pytest.approx(3.0)
    d = e.eval_dual((4.0,))
    assert d.partials[0] == pytest.approx(0.25, rel=1e-12)


def test_expression_is_reusable():
    e = parse("q1^2 + p1", VARS2)
    first = e.evaluate((2.0, 1.0))
    _ = e.eval_batch(np.random.default_rng(0).uniform(size=(5, 2)))
    assert e.evaluate((2.0, 1.0)) == first
