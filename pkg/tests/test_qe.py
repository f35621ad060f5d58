import random

import numpy as np
import pytest

from errors import DimensionMismatchError, ResourceLimitExceeded
from logic.cells import equivalent_on_window, qf_evaluate, qf_evaluate_window
from logic.evaluate import evaluate, evaluate_window, witness_radii
from logic.formula import free_vars
from logic.parser import parse
from logic.qe import eliminate
from logic.random_formulas import FormulaFactory
from models.point_sets import EXAMPLE32_FORMULA, example32_psi
from models.window import Window


def test_parity_elimination_text():
    q = eliminate(parse("E y. x = 2*y"), ["x"])
    assert q.to_text() == "dim=1 vars=x J=2\ncell: 1x=0 (mod 2)"


def test_modulus_is_lcm_of_divisibility_constraints():
    q = eliminate(parse("(E y. x = 2*y) | (E y. x = 3*y)"), ["x"])
    assert q.modulus == 6
    members = [x for x in range(-12, 13) if qf_evaluate(q, (x,))]
    assert members == [x for x in range(-12, 13) if x % 2 == 0 or x % 3 == 0]


def test_universal_quantifier():
    # every y >= x is >= 0 exactly when x >= 0
    q = eliminate(parse("A y. y >= x -> y >= 0"), ["x"])
    assert [qf_evaluate(q, (x,)) for x in (-2, -1, 0, 1)] == [False, False, True, True]


def test_sentence_eliminates_to_truth_value():
    assert eliminate(parse("E y. 2*y = 7"), []).cells == ()
    assert eliminate(parse("A y. E z. y = 2*z | y = 2*z + 1"), []).cells != ()


def test_free_variables_must_be_ordered():
    with pytest.raises(DimensionMismatchError):
        eliminate(parse("x = y"), ["x"])


def test_cell_cap_raises_with_subformula():
    f = parse("E y. E z. x = 7*y + 11*z & y >= 0 & z >= 0 & y <= 20 & z <= 20")
    with pytest.raises(ResourceLimitExceeded) as info:
        eliminate(f, ["x"], max_cells=5)
    assert info.value.subformula is not None


def test_elimination_of_example32_matches_hand_written_form():
    q = eliminate(parse(EXAMPLE32_FORMULA), ["x", "y"])
    comparison = equivalent_on_window(q, example32_psi().qfnf, Window.cube(-5, 30, 2))
    assert comparison.equivalent, comparison.counterexample


def test_intro_set_is_eventually_periodic():
    q = eliminate(parse("x >= 0 & (x = 3 | (E y. x = 2*y) | (E y. x = 5*y + 1))"), ["x"])
    members = [x for x in range(-5, 25) if qf_evaluate(q, (x,))]
    assert members == [0, 1, 2, 3, 4, 6, 8, 10, 11, 12, 14, 16, 18, 20, 21, 22, 24]


def test_vectorized_and_scalar_evaluation_agree():
    q = eliminate(parse("E y. x + 2*y = 5 & y >= x"), ["x"])
    window = Window(((-10, 10),))
    grid = qf_evaluate_window(q, window)
    assert list(grid) == [qf_evaluate(q, (x,)) for x in range(-10, 11)]


def _random_instances(seed: int, count: int):
    """Formulas with up to three variables, bounded quantifier nesting, coefficients in [-4, 4]"""
    factory = FormulaFactory(seed, max_coefficient=4)
    rng = random.Random(seed)
    for _ in range(count):
        free = ["x", "y"][:rng.randint(1, 2)]
        yield free, factory.quantified(free, rng.randint(1, 3 - len(free)))


@pytest.mark.parametrize("seed", range(4))
def test_elimination_agrees_with_bounded_evaluation(seed):
    """200 formulas in total, every point of [-15, 15]^d"""
    for free, f in _random_instances(seed, 50):
        variables = [v for v in ("x", "y") if v in free]
        assert set(free_vars(f)) <= set(variables)
        q = eliminate(f, variables)
        window = Window.centered(15, len(variables))
        radii = witness_radii(f, variables, 15)
        expected = evaluate_window(f, variables, window, radii)
        got = qf_evaluate_window(q, window)
        mismatches = np.argwhere(expected != got)
        assert len(mismatches) == 0, f"{f} differs at {mismatches[:3] + np.array(window.lows)}"
