import numpy as np
import pytest

from conftest import random_expression
from robinson.expr import (
    Chart, ParseError, EvalError, conj, diff, evaluate, free_symbols, parse_expr, sample_points,
    to_string, zero_verdict, is_zero_field, I, ONE, ZERO,
)


def test_parse_precedence_and_power_right_assoc():
    e = parse_expr("2^3^2")
    assert evaluate(e, {}).real[0] == pytest.approx(512.0)
    e = parse_expr("-x^2", None)
    assert evaluate(e, {"x": np.array([3.0])})[0] == pytest.approx(-9.0)


def test_parse_rejects_undeclared_identifier():
    ch = Chart.build([("u", 0, 1), ("x", 0, 1), ("y", 0, 1), ("v", 0, 1)])
    with pytest.raises(ParseError) as info:
        parse_expr("u + w", ch)
    assert info.value.position == 4


def test_parse_error_reports_column():
    with pytest.raises(ParseError, match="column"):
        parse_expr("sin(x")


def test_interning_makes_equal_trees_identical():
    a = parse_expr("x*y + sin(x)")
    b = parse_expr("sin(x) + y*x")
    assert a is b


def test_simplification_of_trivial_identities():
    x = parse_expr("x")
    assert (x - x) is ZERO
    assert (x / x) is ONE
    assert parse_expr("0*sin(x)") is ZERO


def test_conjugation_treats_symbols_as_real():
    e = parse_expr("x + i*y")
    assert conj(e) is parse_expr("x - i*y")
    assert conj(I * I) is parse_expr("-1")


def test_derivative_table_against_closed_forms():
    pts = {"x": np.array([0.3, -0.7]), "y": np.array([0.1, 0.4])}
    cases = {
        "sin(x*y)": "y*cos(x*y)",
        "exp(2*x)": "2*exp(2*x)",
        "ln(3+x)": "1/(3+x)",
        "sqrt(4+x)": "1/(2*sqrt(4+x))",
        "tan(x)": "sec(x)^2",
        "sec(x)": "sec(x)*tan(x)",
        "x^5": "5*x^4",
    }
    for src, ref in cases.items():
        got = evaluate(diff(parse_expr(src), "x"), pts)
        want = evaluate(parse_expr(ref), pts)
        assert np.allclose(got, want, rtol=1e-13), src


def test_derivatives_match_central_differences(rng):
    names = ["x", "y", "z"]
    h = 1e-5
    for _ in range(25):
        e = parse_expr(random_expression(rng, names, 3))
        p = {n: rng.uniform(-0.8, 0.8, size=3) for n in names}
        for n in names:
            d = evaluate(diff(e, n), p)
            hi = dict(p, **{n: p[n] + h})
            lo = dict(p, **{n: p[n] - h})
            fd = (evaluate(e, hi) - evaluate(e, lo)) / (2 * h)
            assert np.all(np.abs(d - fd) <= 1e-6 * (1 + np.abs(fd))), to_string(e)


def test_round_trip_through_to_string(rng):
    for _ in range(50):
        e = parse_expr(random_expression(rng, ["x", "y"], 4))
        assert parse_expr(to_string(e)) is e


def test_free_symbols():
    assert free_symbols(parse_expr("sin(x)*y + 3")) == {"x", "y"}


def test_division_by_zero_detected():
    with pytest.raises(EvalError):
        evaluate(parse_expr("1/x"), {"x": np.array([0.0])})


def test_sample_points_respect_guards_and_are_seeded():
    ch = Chart.build([("u", -1, 1), ("x", -1, 1), ("y", -1, 1), ("v", -1, 1)], guards=["x"])
    a = sample_points(ch, 6, seed=3)
    b = sample_points(ch, 6, seed=3)
    assert np.array_equal(a.values["x"], b.values["x"])
    assert np.all(np.abs(a.values["x"]) > 1e-6)


def test_zero_verdict_majority_rule():
    vals = np.array([0.0, 0.0, 1.0, 0.0])
    assert zero_verdict(vals).verdict == "mixed"
    assert zero_verdict(np.array([1.0, 2.0, 0.0])).verdict == "nonzero"
    assert zero_verdict(np.zeros((4, 2))).verdict == "zero"


def test_is_zero_field_on_identity():
    ch = Chart.build([("u", -1, 1), ("x", -1, 1), ("y", -1, 1), ("v", -1, 1)])
    s = sample_points(ch, 8, seed=0)
    e = parse_expr("sin(x)^2 + cos(x)^2 - 1", ch)
    assert is_zero_field([e], s, tol=1e-12).is_zero
