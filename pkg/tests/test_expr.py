import numpy as np
import pytest

from stefan_control.expr import (Bin, Call, ExprDomainError, ExprSyntaxError,
                                 Num, Unary, Var, evaluate, parse, to_string,
                                 variables)


def test_variable_identity():
    e = parse("x")
    assert evaluate(e, 3.0, 0.0) == 3.0


def test_mixed_expression():
    assert evaluate(parse("2*x+sin(t)"), 1.0, 0.0) == 2.0


def test_precedence_mul_over_add():
    assert evaluate(parse("1+2*3"), 0.0, 0.0) == 7.0


def test_power_of_negative_base():
    assert evaluate(parse("x^2"), -2.0, 0.0) == 4.0


def test_division_by_zero_is_domain_error():
    with pytest.raises(ExprDomainError) as err:
        evaluate(parse("1/x"), 0.0, 0.0)
    assert "1.0 / x" in str(err.value)


def test_exp_zero():
    assert evaluate(parse("exp(0)*5"), 0.0, 0.0) == 5.0


def test_sqrt_negative_is_domain_error():
    with pytest.raises(ExprDomainError):
        evaluate(parse("sqrt(x)"), -1.0, 0.0)


def test_power_binds_tighter_than_unary_minus():
    assert evaluate(parse("-2^2"), 0.0, 0.0) == -4.0


def test_power_right_associative():
    assert evaluate(parse("2^3^2"), 0.0, 0.0) == 512.0


def test_left_associativity():
    assert evaluate(parse("8-3-2"), 0.0, 0.0) == 3.0
    assert evaluate(parse("24/4/2"), 0.0, 0.0) == 3.0


def test_unary_minus_binds_tighter_than_mul():
    # -x^2 * 3 must read as (-(x^2))*3
    assert evaluate(parse("-x^2*3"), 2.0, 0.0) == -12.0


def test_min_max_abs_tanh():
    assert evaluate(parse("min(x, t)"), 2.0, 5.0) == 2.0
    assert evaluate(parse("max(x, t)"), 2.0, 5.0) == 5.0
    assert evaluate(parse("abs(x)"), -3.5, 0.0) == 3.5
    assert evaluate(parse("tanh(0)"), 0.0, 0.0) == 0.0


def test_unknown_identifier_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("y + 1")


def test_unknown_function_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("log(x)")


def test_arity_mismatch_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("sin(x, t)")
    with pytest.raises(ExprSyntaxError):
        parse("min(x)")


def test_no_implicit_multiplication():
    with pytest.raises(ExprSyntaxError):
        parse("2x")


def test_empty_source_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("   ")


def test_syntax_error_carries_offset():
    with pytest.raises(ExprSyntaxError) as err:
        parse("1 + @")
    assert err.value.offset == 4


def test_scientific_literals():
    assert evaluate(parse("1.5e-3"), 0.0, 0.0) == 1.5e-3


def test_array_broadcasting():
    e = parse("x*t + 1")
    x = np.linspace(0, 1, 5)
    out = evaluate(e, x, 2.0)
    assert np.allclose(out, x * 2.0 + 1.0)


def test_eval_is_pure():
    e = parse("sin(x)^2 + exp(-t)*x/3")
    a = evaluate(e, 0.7342, 1.991)
    b = evaluate(e, 0.7342, 1.991)
    assert a == b  # bit-identical


def _random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        choice = rng.integers(0, 3)
        if choice == 0:
            # the parser never yields negative literals (unary minus does)
            return Num(float(rng.integers(0, 10)))
        return Var("x" if choice == 1 else "t")
    kind = rng.integers(0, 3)
    if kind == 0:
        return Unary("-", _random_tree(rng, depth - 1))
    if kind == 1:
        op = ["+", "-", "*", "^"][rng.integers(0, 4)]
        left = _random_tree(rng, depth - 1)
        right = _random_tree(rng, depth - 1)
        if op == "^":  # keep powers tame and well defined
            right = Num(float(rng.integers(0, 3)))
        return Bin(op, left, right)
    name = ["sin", "cos", "tanh", "abs"][rng.integers(0, 4)]
    return Call(name, (_random_tree(rng, depth - 1),))


def test_print_parse_round_trip_property():
    rng = np.random.default_rng(42)
    for _ in range(300):
        tree = _random_tree(rng, 4)
        printed = to_string(tree)
        reparsed = parse(printed)
        assert reparsed == tree, printed
        x, t = rng.uniform(-2, 2, size=2)
        assert evaluate(reparsed, x, t) == evaluate(tree, x, t)


def test_round_trip_is_stable():
    e = parse("-(x + 1)^2 * min(t, 3) / (2 - x)")
    assert parse(to_string(parse(to_string(e)))) == e


def test_variables_reported():
    assert variables(parse("sin(t)*2")) == {"t"}
    assert variables(parse("x + t")) == {"x", "t"}
    assert variables(parse("3")) == set()
