import pytest

from logic.formula import (
    Compare, Congruence, Const, Difference, Exists, Neg, Scale, Sum, Var, alpha_equivalent, canonical,
    free_vars, linearize, quantifier_depth, render, substitute,
)
from logic.evaluate import evaluate
from logic.parser import parse
from logic.random_formulas import FormulaFactory
from errors import InvalidModulusError


def test_linearize_collects_coefficients_and_constant():
    atom = parse("2*x - y + 3 >= 0")
    assert linearize(atom.lhs) == ({"x": 2, "y": -1}, 3)


def test_linearize_drops_cancelled_variables():
    atom = parse("x - x + -4 = 0")
    assert linearize(atom.lhs) == ({}, -4)


def test_free_vars_in_first_appearance_order():
    assert free_vars(parse("y > 0 & E u. x = 2*u + y")) == ["y", "x"]


def test_bound_variable_is_not_free():
    assert free_vars(parse("E x. x = 1")) == []
    assert free_vars(parse("x = 0 & E x. x = 1")) == ["x"]


def test_quantifier_depth():
    assert quantifier_depth(parse("x = 0")) == 0
    assert quantifier_depth(parse("E y. A z. x = y + z")) == 2
    assert quantifier_depth(parse("(E y. x = y) & (E z. x = z)")) == 1


def test_substitute_only_touches_free_occurrences():
    f = parse("x + y = 3 & E x. x = y")
    g = substitute(f, "x", 1)
    assert free_vars(g) == ["y"]
    assert evaluate(g, {"y": 2})
    assert not evaluate(g, {"y": 3})


def test_congruence_rejects_zero_modulus():
    with pytest.raises(InvalidModulusError):
        Congruence(Var("x"), 0, 1)


def test_congruence_normalizes_residue():
    assert Congruence(Var("x"), 3, -1).residue == 2


def test_compare_rejects_unknown_comparator():
    with pytest.raises(ValueError):
        Compare(Var("x"), "=>", Const(0))


def test_alpha_equivalence_ignores_bound_names():
    assert alpha_equivalent(parse("E y. x = 2*y"), parse("E z. x = 2*z"))
    assert not alpha_equivalent(parse("E y. x = 2*y"), parse("E y. x = 3*y"))
    assert not alpha_equivalent(parse("E y. x = 2*y"), parse("E y. z = 2*y"))


def test_canonical_names_in_binding_order():
    f = canonical(parse("E a. A b. a = b"))
    assert isinstance(f, Exists)
    assert f.var.name == "_0"
    assert f.body.var.name == "_1"


def test_render_parenthesizes_operands():
    assert render(parse("x = 1 | y = 2 & x >= 0")) == "(x = 1) | ((y = 2) & (x >= 0))"
    assert render(parse("E y. x = 2*y")) == "E y. (x = 2*y)"
    assert render(parse("x % 3 = 2")) == "x % 3 = 2"


def test_render_keeps_compound_terms_grouped():
    x, y = Var("x"), Var("y")
    negated = Compare(Neg(Sum(x, Const(1))), "<=", y)
    assert render(negated) == "-(x + 1) <= y"
    assert parse(render(negated)) == negated
    nested = Compare(Difference(x, Sum(y, Const(2))), "=", Const(0))
    assert render(nested) == "x - (y + 2) = 0"
    assert parse(render(nested)) == nested
    assert parse("x = -(3*y)") == Compare(x, "=", Neg(Scale(3, y)))
    assert render(parse("-x + -2 < 0")) == "-x + -2 < 0"


def test_render_renames_shadowing_binders():
    text = render(parse("x = 0 & E x. x = 1"))
    assert text == "(x = 0) & (E x_1. (x_1 = 1))"


@pytest.mark.parametrize("seed", range(5))
def test_render_then_parse_is_alpha_equivalent(seed):
    factory = FormulaFactory(seed)
    for _ in range(40):
        f = factory.formula(["x", "y"], 4)
        assert alpha_equivalent(parse(render(f)), f), render(f)
