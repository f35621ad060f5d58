import random
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from errors import GeometryError, InsufficientDataError, PreconditionError
from logic.parser import parse
from logic.qe import eliminate
from models.complexity import block_at, stabilized_r
from models.periodicity import (
    PeriodVector, canonical_vectors, distinct_block_cert, eventual_period, factor_counts,
    find_local_period, global_periods_report, is_v_periodic_inside, lattice_rank,
    local_period_report, mh_classify_1d, minimal_local_period, muchnik_report, muchnik_sample,
    neighborhood_window, nivat_probe, period_norm_bound, periodic_bits, repetitivity_probe,
    repetitivity_report, tail_periods_1d, touched_block_count, verify_local_periodicity,
)
from models.point_sets import FIBONACCI_WORD, SymbolicSet, intro_set
from models.raster import rasterize
from models.schemas import LocalPeriodicityCert, PeriodSearchParams
from models.window import Window


def _symbolic(text: str, name: str) -> SymbolicSet:
    return SymbolicSet(eliminate(parse(text), ["x", "y"]), name)


@pytest.fixture(scope="module")
def ex31_grid(ex31):
    return rasterize(ex31, Window.cube(-5, 60, 2))


# ------------------------------------------------------------------ vectors


def test_canonical_order_in_the_plane():
    assert [v.v for v in canonical_vectors(2, 1)] == [(0, 1), (1, -1), (1, 0), (1, 1)]
    assert len(list(canonical_vectors(2, 2))) == 12
    assert [v.v for v in canonical_vectors(1, 3)] == [(1,), (2,), (3,)]


def test_period_vector():
    v = PeriodVector.of((-2, 1))
    assert v.norm == 2
    assert v.canonical().v == (2, -1)
    assert (-v).v == (2, -1)
    assert str(v) == "(-2,1)"
    with pytest.raises(GeometryError):
        PeriodVector.of((0, 0))


def test_neighborhood_shapes():
    assert neighborhood_window((5, 5), 3, "ball") == Window(((3, 7), (3, 7)))
    assert neighborhood_window((5, 5), 3, "cube") == Window(((5, 7), (5, 7)))
    with pytest.raises(ValueError):
        neighborhood_window((0, 0), 3, "disc")


def test_periodic_bits_is_vacuous_without_pairs():
    bits = np.array([[1, 0], [0, 1]], dtype=bool)
    assert periodic_bits(bits, (1, 1))
    assert not periodic_bits(bits, (1, 0))
    assert periodic_bits(bits, (2, 0))


def test_periodic_inside_neighbourhoods(ex31):
    assert is_v_periodic_inside(ex31, (1, 1), (20, 20), 4)
    assert is_v_periodic_inside(ex31, (1, 0), (20, 1), 4)
    assert not is_v_periodic_inside(ex31, (1, 0), (20, 20), 4)


def test_minimal_local_period(ex31, board):
    assert minimal_local_period(ex31, (20, 20), 4).v == (1, 1)
    assert minimal_local_period(ex31, (-20, 20), 4).v == (0, 1)
    assert minimal_local_period(board, (3, 4), 3).v == (1, -1)


# ------------------------------------------------------------ certificates


def test_certificate_radius_is_checked(ex31):
    cert = LocalPeriodicityCert(V=[[1, 1], [1, 0]], K=2, L=4)
    with pytest.raises(Exception, match="must exceed"):
        verify_local_periodicity(ex31, cert, Window.centered(10, 2))


def test_certificate_with_cubes(ex31):
    cert = LocalPeriodicityCert(V=[[1, 1], [1, 0]], K=3, L=4)
    report = verify_local_periodicity(ex31, cert, Window.centered(50, 2), "cube")
    assert report.holds
    assert report.neighborhood == "cube"


def test_certificate_with_balls_needs_a_larger_L(ex31):
    window = Window.centered(50, 2)
    report = verify_local_periodicity(ex31, LocalPeriodicityCert(V=[[1, 1], [1, 0]], K=3, L=4), window, "ball")
    assert not report.holds
    assert report.first_violation == [4, 0]
    assert verify_local_periodicity(ex31, LocalPeriodicityCert(V=[[1, 1], [1, 0]], K=3, L=8), window, "ball").holds


def test_borders_keep_the_certificate(ex31):
    window = Window.centered(40, 2)
    diagonal = ex31.border((1, 0))
    assert verify_local_periodicity(diagonal, LocalPeriodicityCert(V=[[1, 1]], K=3, L=8), window, "ball").holds
    line = ex31.border((1, 1))
    assert verify_local_periodicity(line, LocalPeriodicityCert(V=[[1, 0]], K=3, L=8), window, "ball").holds


def test_muchnik_sample(ex31):
    window = Window.centered(30, 2)
    ball = muchnik_sample(ex31, 5, [(1, 1), (1, 0)], window, "ball")
    cube = muchnik_sample(ex31, 5, [(1, 1), (1, 0)], window, "cube")
    assert ball is not None and 0 < ball <= 20
    assert cube is not None and 0 < cube <= 10
    assert muchnik_sample(ex31, 5, [(0, 1)], window, "ball") is None
    with pytest.raises(PreconditionError):
        muchnik_sample(ex31, 0, [(1, 1)], window)
    with pytest.raises(PreconditionError):
        muchnik_sample(ex31, 3, [], window)
    report = muchnik_report(ex31, 5, [(1, 1), (1, 0)], window, "ball")
    assert report.L == ball and report.V == [[1, 1], [1, 0]]


# ------------------------------------------------------------ pigeonhole search


def test_period_norm_bound():
    assert period_norm_bound(3, 3, 2) == pytest.approx(90 ** 0.5)
    assert period_norm_bound(Fraction(1, 2), 7, 1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        period_norm_bound(0, 3, 2)


def test_find_local_period_on_the_diagonal_and_the_line(ex31_grid):
    params = PeriodSearchParams(C=3, n=10, m=6)
    assert find_local_period(ex31_grid, (30, 30), params).v == (1, 1)
    assert find_local_period(ex31_grid, (30, 1), params).v == (1, 0)
    report = local_period_report(ex31_grid, (30, 30), params)
    assert report.v == [1, 1] and report.norm == 1
    assert report.anchors == 36
    assert report.distinct_blocks == touched_block_count(ex31_grid, (30, 30), 10, 6) == 11


def test_find_local_period_preconditions(ex31_grid):
    with pytest.raises(PreconditionError):
        find_local_period(ex31_grid, (30, 30), PeriodSearchParams(C=10, n=10, m=3))
    with pytest.raises(PreconditionError):
        find_local_period(ex31_grid, (2, 1), PeriodSearchParams(C=3, n=10, m=6, m0=5))
    with pytest.raises(GeometryError):
        find_local_period(ex31_grid, (58, 30), PeriodSearchParams(C=3, n=10, m=6))
    with pytest.raises(ValidationError):
        PeriodSearchParams(C=3, n=5, m=5)


@pytest.fixture(scope="module")
def planar_grids(ex31, ex32, board):
    return [rasterize(s, Window.cube(-5, 60, 2)) for s in (ex31, ex32, board)]


def test_pigeonhole_periods_on_random_parameters(planar_grids):
    rng = random.Random(7)
    checked = 0
    for grid in planar_grids:
        found = 0
        for _ in range(1000):
            if found == 40:
                break
            z = (rng.randint(10, 40), rng.randint(10, 40))
            n = rng.randint(3, 10)
            m = rng.randint(2, n - 1)
            if touched_block_count(grid, z, n, m) >= m * m:
                continue
            v = find_local_period(grid, z, PeriodSearchParams(C=Fraction(1, n), n=n, m=m))
            assert v is not None and v.norm < m
            size = n - m
            here = block_at(grid, z, size)
            minus = tuple(a - b for a, b in zip(z, v.v))
            plus = tuple(a + b for a, b in zip(z, v.v))
            assert block_at(grid, minus, size) == here == block_at(grid, plus, size)
            found += 1
        assert found > 0
        checked += found
    assert checked >= 100


@pytest.fixture(scope="module")
def measured_constants(ex31, ex32, board):
    """C = max R(n)/n over n <= 8 from the stabilized counts"""
    return [(s, max(Fraction(stabilized_r(s, n).count, n) for n in range(1, 9))) for s in (ex31, ex32, board)]


def test_measured_complexity_constants(measured_constants):
    assert [C for _, C in measured_constants] == [3, Fraction(57, 8), 2]


@pytest.mark.parametrize("K", range(3, 11))
def test_far_minimal_periods_respect_the_norm_bound(measured_constants, K):
    far = [(x, y) for x in range(-60, 61, 20) for y in range(-60, 61, 20) if max(abs(x), abs(y)) >= 40]
    for s, C in measured_constants:
        bound = period_norm_bound(C, K, 2)
        for z in far:
            v = minimal_local_period(s, z, K)
            assert v is not None and v.norm <= bound


# ------------------------------------------------------------ distinct blocks


def test_distinct_block_certificate_on_a_lattice():
    lattice = _symbolic("E k. x + 2*y = 5*k", "lattice")
    grid = rasterize(lattice, Window.centered(10, 2))
    assert distinct_block_cert(grid, (0, 0), 3, (2, -1))


def test_distinct_block_certificate_on_the_checkerboard(board):
    assert distinct_block_cert(rasterize(board, Window.centered(10, 2)), (0, 0), 3, (1, 1))


@pytest.mark.parametrize("v", [(3, 0), (6, 0)])
def test_distinct_block_certificate_needs_a_minimal_period(v):
    stripes = _symbolic("E k. x = 3*k", "stripes")
    with pytest.raises(PreconditionError):
        distinct_block_cert(rasterize(stripes, Window.centered(20, 2)), (0, 0), 4, v)


def test_distinct_block_certificate_needs_a_period(board):
    with pytest.raises(PreconditionError, match="not a period"):
        distinct_block_cert(rasterize(board, Window.centered(10, 2)), (0, 0), 3, (1, 0))


# ------------------------------------------------------------ global periods


def test_checkerboard_is_an_ideal_crystal(board):
    report = global_periods_report(rasterize(board, Window.centered(10, 2)), 2)
    assert report.periods == [[1, -1], [1, 1], [0, 2], [2, -2], [2, 0], [2, 2]]
    assert report.lattice_rank == 2
    assert report.ideal_crystal


def test_example31_has_no_global_period(ex31):
    report = global_periods_report(rasterize(ex31, Window.centered(10, 2)), 3)
    assert report.periods == []
    assert report.lattice_rank == 0 and not report.ideal_crystal


def test_lattice_rank():
    assert lattice_rank([(1, 2), (2, 4)]) == 1
    assert lattice_rank([]) == 0


def test_nivat_probe(board, fib):
    report = nivat_probe(board, (2, 2), Window.centered(10, 2))
    assert report.count == 2 and report.bound == 4 and report.below_bound
    assert [1, 1] in report.periods
    fib_report = nivat_probe(fib, (3, 3), Window(((0, 100), (0, 10))))
    assert fib_report.count == 4 and fib_report.below_bound
    assert [0, 1] in fib_report.periods


# --------------------------------------------------------------- repetitivity


def test_repetitivity(board, origin, ex31):
    window = Window.centered(20, 2)
    assert repetitivity_probe(board, 2, window) == 3
    assert repetitivity_probe(origin, 2, window) is None
    assert repetitivity_probe(ex31, 2, window) is None
    with pytest.raises(PreconditionError):
        repetitivity_probe(board, 0, window)
    report = repetitivity_report(board, 2, window)
    assert report.radius == 3 and report.patches == 2


# -------------------------------------------------------------- one dimension


def test_factor_counts_and_eventual_period():
    word = np.array([0, 0, 1, 1], dtype=bool)
    assert factor_counts(word, 2) == [2, 3]
    assert eventual_period(np.array([1, 0, 0, 1, 0, 1, 0, 1]), 3) == (2, 2)


def test_morse_hedlund_certificate():
    word = [0] + [0, 1] * 200
    verdict = mh_classify_1d(word, 10)
    assert verdict.certificate == 3
    assert verdict.period == 2 and verdict.preperiod == 1
    assert verdict.counts[:3] == [2, 3, 3]


def test_morse_hedlund_on_a_sturmian_word():
    verdict = mh_classify_1d(FIBONACCI_WORD.prefix(500), 10)
    assert verdict.certificate is None
    assert verdict.counts == [n + 1 for n in range(1, 11)]


def test_morse_hedlund_needs_a_long_word():
    with pytest.raises(InsufficientDataError):
        mh_classify_1d([0, 1, 0], 10)


def test_tail_periods(fib):
    tails = tail_periods_1d(intro_set(), 64)
    assert (tails.N, tails.right_period, tails.left_period) == (4, 10, 1)
    with pytest.raises(Exception):
        tail_periods_1d(fib, 64)
