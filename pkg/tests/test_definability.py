import pytest

from models.definability import DefinabilityClassifier, classify_definability
from models.point_sets import intro_set
from models.window import Window


def test_example31_is_consistent(ex31):
    report = classify_definability(ex31)
    assert report.verdict == "consistent-with-definable"
    assert report.witness is None
    top = report.levels[0]
    assert top.path == "ex31" and top.bound == 1
    assert top.counts == [6, 9, 12, 15, 18]
    assert top.exponent == pytest.approx(1.0, abs=0.01)
    assert all(level.dim == 1 for level in report.levels[1:])


def test_checkerboard_is_consistent(board):
    report = classify_definability(board)
    assert report.verdict == "consistent-with-definable"
    assert report.levels[0].counts == [2, 2, 2, 2, 2]


def test_example32_is_consistent(ex32):
    assert classify_definability(ex32).verdict == "consistent-with-definable"


def test_fibonacci_fails_in_a_row_section(fib):
    report = classify_definability(fib)
    assert report.verdict == "not-definable-evidence"
    assert report.heuristic_sections
    witness = report.witness
    assert 2 in witness.axes and witness.dim == 1
    assert witness.exponent >= 0.5 and witness.residual <= 0.1
    assert "above the O(n^0) bound" in witness.reason


def test_toeplitz_fails_at_the_top(toeplitz):
    report = classify_definability(toeplitz, window=Window(((0, 1024), (0, 8))))
    assert report.verdict == "not-definable-evidence"


def test_periodic_line_is_consistent():
    report = classify_definability(intro_set())
    assert report.verdict == "consistent-with-definable"
    tails = report.levels[0].tails
    assert (tails.N, tails.right_period, tails.left_period) == (4, 10, 1)


def test_depth_zero_stops_at_the_top(fib):
    report = classify_definability(fib, depth=0)
    assert len(report.levels) == 1
    assert report.verdict == "consistent-with-definable"


def test_exhausted_budget_is_inconclusive(ex31):
    report = DefinabilityClassifier(max_seconds=1e-9).classify(ex31)
    assert report.verdict == "inconclusive"
    assert any("budget" in note for note in report.notes)


def test_symbolic_section_plan_uses_the_modulus(board):
    plan = DefinabilityClassifier().section_plan(board)
    J = board.as_qfnf().modulus
    assert plan[0] == (1, -2 * J) and plan[-1] == (2, 2 * J)
    assert len(plan) == 2 * (4 * J + 1)
    with_window = DefinabilityClassifier().section_plan(board, Window(((-9, 9), (0, 30))))
    assert (1, -9) in with_window and (2, 30) in with_window


def test_oracle_section_plan_is_sampled_with_the_seed(fib):
    full = DefinabilityClassifier().section_plan(fib)
    assert len(full) == 34
    sampled = DefinabilityClassifier(max_sections=5, seed=3).section_plan(fib)
    assert len(sampled) == 5 and set(sampled) <= set(full)
    assert sampled == DefinabilityClassifier(max_sections=5, seed=3).section_plan(fib)
