import random

import numpy as np
import pytest

from errors import DimensionMismatchError, ResourceLimitExceeded
from logic import cells
from logic.cells import (
    QFNF, Cell, Inequality, ModularConstraint, equivalent_on_window, normalize_cell, qf_evaluate,
    qf_evaluate_window, rationally_feasible,
)
from logic.formula import Var
from logic.qe import eliminate
from logic.random_formulas import FormulaFactory
from models.point_sets import checkerboard, example31, example32, singleton_origin
from models.raster import Grid, grid_border, grid_section
from models.window import Window

XY = ("x", "y")
SQUARE = Window.centered(20, 2)


def _random_qfnfs(count: int, seed: int = 7):
    factory = FormulaFactory(seed, max_coefficient=3)
    scope = [Var("x"), Var("y")]
    for _ in range(count):
        yield eliminate(factory.boolean(scope, 2), XY)


def test_normalize_divides_by_gcd_and_rounds_up():
    cell = normalize_cell(2, [((2, 4), 3)], [], 1)
    assert cell.inequalities == (Inequality((1, 2), 2),)


def test_normalize_keeps_tightest_bound():
    cell = normalize_cell(1, [((1,), 0), ((1,), 4)], [], 1)
    assert cell.inequalities == (Inequality((1,), 4),)


def test_normalize_detects_opposite_bounds():
    assert normalize_cell(1, [((1,), 3), ((-1,), -2)], [], 1) is None


def test_normalize_reduces_congruences():
    cell = normalize_cell(1, [], [((7,), 9)], 4)
    assert cell.congruences == (ModularConstraint((3,), 1),)
    assert normalize_cell(1, [], [((4,), 1)], 4) is None


def test_rational_infeasibility():
    # x >= y + 1, y >= z + 1, z >= x + 1
    rows = [((1, -1, 0), 1), ((0, 1, -1), 1), ((-1, 0, 1), 1)]
    assert not rationally_feasible(rows, 3)
    assert rationally_feasible(rows[:2], 3)


def test_unconstrained_cell_absorbs_others():
    q = QFNF.build(XY, 1, [normalize_cell(2, [((1, 0), 0)], [], 1), Cell(2)])
    assert q.cells == (Cell(2),)
    assert q.to_text() == "dim=2 vars=x,y J=1\ncell: true"


def test_text_form_lists_coefficients_in_variable_order():
    q = QFNF.build(XY, 2, [normalize_cell(2, [((2, 1), 3)], [((1, 0), 1)], 2)])
    assert q.to_text() == "dim=2 vars=x,y J=2\ncell: 2x+1y>=3 ; 1x+0y=1 (mod 2)"


def test_everything_and_nothing():
    assert qf_evaluate(QFNF.everything(XY), (5, -3))
    assert not qf_evaluate(QFNF.nothing(XY), (0, 0))


def test_point_dimension_is_checked():
    with pytest.raises(DimensionMismatchError):
        qf_evaluate(QFNF.everything(XY), (1,))


def test_union_intersection_complement():
    even = eliminate_text("E k. x = 2*k")
    triple = eliminate_text("E k. x = 3*k")
    window = Window(((-12, 12),))
    both = qf_evaluate_window(cells.intersect(even, triple), window)
    either = qf_evaluate_window(cells.union(even, triple), window)
    odd = qf_evaluate_window(cells.complement(even), window)
    xs = np.arange(-12, 13)
    assert np.array_equal(both, xs % 6 == 0)
    assert np.array_equal(either, (xs % 2 == 0) | (xs % 3 == 0))
    assert np.array_equal(odd, xs % 2 == 1)


def eliminate_text(text: str) -> QFNF:
    from logic.parser import parse
    return eliminate(parse(text), ["x"])


def test_intersection_cap():
    q = QFNF.build(("x",), 1, [normalize_cell(1, [((1,), k)], [], 1) for k in range(3)] +
                   [normalize_cell(1, [((-1,), k)], [], 1) for k in range(3)])
    with pytest.raises(ResourceLimitExceeded):
        cells.intersect(q, q, max_cells=4)


def test_translate_moves_every_member():
    q = example31().qfnf
    moved = cells.translate(q, (3, -2))
    for p in Window.cube(-6, 6, 2).points():
        assert qf_evaluate(moved, p) == qf_evaluate(q, (p[0] - 3, p[1] + 2))


def test_equivalence_reports_smallest_counterexample():
    board = checkerboard().qfnf
    shifted = cells.translate(board, (1, 0))
    result = equivalent_on_window(board, shifted, Window.cube(-3, 3, 2))
    assert not result.equivalent
    assert result.counterexample == (0, 0)
    assert equivalent_on_window(board, cells.translate(board, (1, 1)), SQUARE).equivalent


def test_border_requires_nonzero_direction():
    with pytest.raises(ValueError):
        cells.border(example31().qfnf, (0, 0))


@pytest.mark.parametrize("make", [example31, example32, checkerboard, lambda: singleton_origin(2)])
@pytest.mark.parametrize("v", [(1, 0), (0, 1), (1, 1), (-1, 2)])
def test_symbolic_border_matches_raster(make, v):
    q = make().qfnf
    grid = Grid.from_bits(SQUARE.lows, qf_evaluate_window(q, SQUARE))
    brute = grid_border(grid, v)
    symbolic = qf_evaluate_window(cells.border(q, v), brute.window)
    assert np.array_equal(symbolic, brute.bits)


@pytest.mark.parametrize("make", [example31, example32, checkerboard, lambda: singleton_origin(2)])
def test_symbolic_section_matches_raster(make):
    q = make().qfnf
    grid = Grid.from_bits(SQUARE.lows, qf_evaluate_window(q, SQUARE))
    for axis in (1, 2):
        for c in (-3, 0, 1, 4, 7):
            sliced = grid_section(grid, axis, c)
            symbolic = qf_evaluate_window(cells.section(q, axis, c), sliced.window)
            assert np.array_equal(symbolic, sliced.bits)


def test_random_normal_forms_border_and_section():
    rng = random.Random(11)
    for q in _random_qfnfs(50):
        grid = Grid.from_bits(SQUARE.lows, qf_evaluate_window(q, SQUARE))
        v = (rng.randint(-2, 2), rng.randint(1, 2))
        brute = grid_border(grid, v)
        assert np.array_equal(qf_evaluate_window(cells.border(q, v), brute.window), brute.bits)
        axis, c = rng.randint(1, 2), rng.randint(-20, 20)
        sliced = grid_section(grid, axis, c)
        assert np.array_equal(qf_evaluate_window(cells.section(q, axis, c), sliced.window), sliced.bits)
