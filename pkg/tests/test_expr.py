import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilferbvp.expr import (
    MAX_NESTING,
    BinOp,
    Call,
    EvalError,
    Neg,
    Number,
    ParseError,
    UnknownIdentifierError,
    Variable,
    compile_rhs,
    evaluate,
    is_constant,
    parse,
    to_source,
)

REF = "(1/32)*(sqrt(t)+log(t))*(abs(x)/(2+abs(x)))"


# {{{ parsing


def test_reference_ast():
    e = parse(REF)
    assert isinstance(e, BinOp) and e.op == "*"
    assert e.left.op == "*"
    assert e.left.left == BinOp("/", Number(1.0), Number(32.0))
    assert e.right == BinOp(
        "/",
        Call("abs", Variable("x")),
        BinOp("+", Number(2.0), Call("abs", Variable("x"))),
    )


def test_zero():
    e = parse("0")
    assert e == Number(0.0)
    assert is_constant(e)
    assert evaluate(e, 2.0, 3.0) == 0.0


@pytest.mark.parametrize(
    "source, value",
    [
        ("2^3^2", 512.0),
        ("-2^2", -4.0),
        ("2^-1", 0.5),
        ("8/4/2", 1.0),
        ("10-4-3", 3.0),
        ("2+3*4", 14.0),
        ("(2+3)*4", 20.0),
        ("-3*-2", 6.0),
        ("--1", 1.0),
        ("1.5e2", 150.0),
        (".5", 0.5),
        (" 1 +\t2\n", 3.0),
        ("exp(0)+cos(0)+sin(0)", 2.0),
    ],
)
def test_precedence_and_literals(source, value):
    assert evaluate(parse(source), 1.0, 1.0) == value


def test_offsets():
    e = parse("t + x*2")
    assert e.offset == 2
    assert e.right.offset == 5
    assert e.right.left.offset == 4


@pytest.mark.parametrize(
    "source, offset",
    [
        ("", 0),
        ("   ", 0),
        ("1 +", 3),
        ("(1", 2),
        ("1)", 1),
        ("1 $ 2", 2),
        ("sqrt 2", 5),
        ("2 3", 2),
        ("*2", 0),
        ("1e999", 0),
    ],
)
def test_syntax_errors(source, offset):
    with pytest.raises(ParseError) as info:
        parse(source)
    assert info.value.offset == offset
    assert str(offset) in str(info.value)


def test_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse("1 +")
    assert "number" in info.value.expected


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as info:
        parse("t + y")
    assert info.value.offset == 4
    assert "t" in info.value.expected and "log" in info.value.expected


def test_non_ascii_offset_is_in_bytes():
    with pytest.raises(ParseError) as info:
        parse("t + é")
    assert info.value.offset == 4


def test_nesting_limit():
    parse("(" * MAX_NESTING + "1" + ")" * MAX_NESTING)
    with pytest.raises(ParseError):
        parse("(" * (MAX_NESTING + 1) + "1" + ")" * (MAX_NESTING + 1))
    with pytest.raises(ParseError):
        parse("-" * 1000 + "1")
    with pytest.raises(ParseError):
        parse("+".join(["1"] * 500))


def test_non_string_source():
    with pytest.raises(TypeError):
        parse(3)


# }}}


# {{{ evaluation


def test_reference_values():
    f = compile_rhs(REF)
    assert f(math.e, 0.0) == 0.0
    assert f(1.0, 2.0) == 0.015625
    assert f.source == REF
    assert evaluate(parse("t*x"), 2.0, 3.0) == 6.0


def test_vectorised():
    f = compile_rhs("t*x + 1")
    t = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(f(t, 2.0), [3.0, 5.0, 7.0])
    assert f(t, np.zeros((2, 1))).shape == (2, 3)
    assert isinstance(compile_rhs("1")(t, 0.0), np.ndarray)


@pytest.mark.parametrize(
    "source, t, x, offset",
    [
        ("log(x)", 1.0, 0.0, 0),
        ("1 + sqrt(x)", 1.0, -1.0, 4),
        ("t / x", 1.0, 0.0, 2),
        ("exp(exp(x))", 1.0, 100.0, 0),
        ("x ^ 0.5", 1.0, -4.0, 2),
    ],
)
def test_eval_errors(source, t, x, offset):
    with pytest.raises(EvalError) as info:
        evaluate(parse(source), t, x)
    assert info.value.offset == offset
    assert info.value.node.offset == offset


def test_eval_error_on_any_array_element():
    with pytest.raises(EvalError):
        evaluate(parse("log(x)"), 1.0, np.array([1.0, -1.0]))


def test_deterministic():
    e = parse("sin(t)*exp(x)/(1+t^2)")
    assert evaluate(e, 1.3, 0.7) == evaluate(e, 1.3, 0.7)


def test_node_eval():
    assert parse("t - x").eval(5.0, 2.0) == 3.0
    assert Neg(Number(2.0)).eval(0.0, 0.0) == -2.0


# }}}


# {{{ round trip


def random_expr(rng: random.Random, depth: int) -> str:
    if depth == 0 or rng.random() < 0.2:
        return rng.choice(["t", "x", str(rng.randint(0, 9)), f"{rng.uniform(0, 5):.3f}"])
    kind = rng.random()
    if kind < 0.5:
        op = rng.choice("+-*/^")
        return f"{random_expr(rng, depth - 1)} {op} {random_expr(rng, depth - 1)}"
    if kind < 0.65:
        return f"-{random_expr(rng, depth - 1)}"
    if kind < 0.85:
        fn = rng.choice(["log", "exp", "sqrt", "abs", "sin", "cos"])
        return f"{fn}({random_expr(rng, depth - 1)})"
    return f"({random_expr(rng, depth - 1)})"


def round_trip_corpus():
    rng = random.Random(11)
    return [REF, "0", "2^3^2", "-t^2"] + [random_expr(rng, 4) for _ in range(46)]


@pytest.mark.parametrize("source", round_trip_corpus())
def test_round_trip(source):
    e = parse(source)
    assert parse(to_source(e)) == e


# }}}


# {{{ fuzzing

ALPHABET = "0123456789.eE+-*/^() \ttxlogexpsqrtabsincoé$_,"


@settings(max_examples=400, deadline=None)
@given(st.text(alphabet=ALPHABET, max_size=1024))
def test_fuzz_structured_errors_only(source):
    if len(source.encode("utf-8")) > 1024:
        return
    try:
        e = parse(source)
    except ParseError as err:
        assert 0 <= err.offset <= len(source.encode("utf-8"))
        return
    try:
        evaluate(e, 1.5, -0.5)
    except EvalError as err:
        assert 0 <= err.offset < len(source.encode("utf-8"))


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=1024))
def test_fuzz_arbitrary_bytes(data):
    source = data.decode("utf-8", errors="replace")
    try:
        parse(source)
    except ParseError:
        pass


# }}}
