import numpy as np
import pytest

from errors import GeometryError, InsufficientDataError, WindowError
from models import complexity
from models.complexity import (
    Block, ComplexityTable, block_at, block_table, count_patterns, distinct_blocks, growth_fit,
    p_count, r_count, recurrent_table, rect_block_at, rect_count, stabilized_r,
)
from models.raster import Grid, rasterize
from models.window import Window


def _brute_force(grid: Grid, sizes, escape: int) -> int:
    seen = set()
    for anchor in Window(tuple((o, o + e - n) for o, e, n in zip(grid.origin, grid.extents, sizes))).points():
        if max(abs(a) for a in anchor) < escape:
            continue
        idx = tuple(slice(a - o, a - o + n) for a, o, n in zip(anchor, grid.origin, sizes))
        seen.add(grid.bits[idx].tobytes())
    return len(seen)


@pytest.fixture
def noisy():
    rng = np.random.default_rng(17)
    return Grid.from_bits((-10, -8), rng.random((20, 17)) < 0.3)


@pytest.mark.parametrize("sizes", [(1, 1), (2, 2), (3, 2), (1, 5), (4, 4)])
@pytest.mark.parametrize("escape", [0, 5, 9])
def test_count_matches_brute_force(noisy, sizes, escape):
    assert count_patterns(noisy, sizes, escape) == _brute_force(noisy, sizes, escape)


def test_chunked_threaded_count_matches(noisy, monkeypatch):
    expected = _brute_force(noisy, (3, 3), 4)
    monkeypatch.setattr(complexity, "_CHUNK_BITS", 40)
    assert count_patterns(noisy, (3, 3), 4, threads=1) == expected
    assert count_patterns(noisy, (3, 3), 4, threads=3) == expected


def test_count_rejects_bad_boxes(noisy):
    with pytest.raises(WindowError):
        count_patterns(noisy, (21, 1))
    with pytest.raises(WindowError):
        count_patterns(noisy, (2,))
    with pytest.raises(WindowError, match="sup-norm"):
        count_patterns(noisy, (2, 2), escape=50)


def test_block_equality_and_hash():
    a = Block.from_array(np.array([[1, 0], [0, 1]]))
    b = Block.from_array(np.array([[True, False], [False, True]]))
    flat = Block.from_array(np.array([[1, 0, 0, 1]]))
    assert a == b and hash(a) == hash(b)
    assert a != flat
    assert a.array().tolist() == [[True, False], [False, True]]
    assert a.dim == 2


def test_block_at(ex31):
    grid = rasterize(ex31, Window.cube(0, 9, 2))
    assert block_at(grid, (3, 3), 2) == Block.from_array(np.array([[1, 0], [0, 1]]))
    assert block_at(grid, (5, 1), 2) == Block.from_array(np.array([[1, 0], [1, 0]]))
    assert rect_block_at(grid, (0, 1), (3, 1)).array().ravel().tolist() == [True, True, True]
    with pytest.raises(GeometryError):
        block_at(grid, (9, 9), 2)


def test_distinct_blocks_in_first_occurrence_order(board):
    grid = rasterize(board, Window.cube(0, 5, 2))
    blocks = distinct_blocks(grid, (2, 2), [(0, 0), (2, 2), (1, 0), (3, 3)])
    assert len(blocks) == 2
    assert blocks[0] == block_at(grid, (0, 0), 2)


@pytest.mark.parametrize("n", range(1, 11))
def test_singleton_block_complexity(origin, n):
    window = Window.centered(12, 2)
    assert p_count(origin, n, window) == n * n + 1
    assert r_count(origin, n, window, n) == 1


@pytest.mark.parametrize("n", range(1, 11))
def test_fibonacci_block_complexity(fib, n):
    assert p_count(fib, n, Window(((-80, 160), (-12, 12)))) == 2 * n


@pytest.mark.parametrize("n", range(2, 9))
def test_example31_recurrent_complexity(ex31, n):
    result = stabilized_r(ex31, n)
    assert result.stabilized
    assert result.count == 3 * n


@pytest.mark.parametrize("n", range(2, 9))
def test_example32_recurrent_complexity(ex32, n):
    result = stabilized_r(ex32, n)
    assert result.stabilized
    assert result.count == 8 * n - 7


def test_single_cells_recur_with_both_values(ex31, ex32):
    for s in (ex31, ex32):
        result = stabilized_r(s, 1)
        assert result.stabilized and result.count == 2


def test_stabilized_r_first_window(ex31):
    result = stabilized_r(ex31, 3)
    assert result == (9, True, Window.centered(16, 2), 8)


@pytest.mark.parametrize("n", range(1, 11))
def test_fibonacci_recurrent_complexity(fib, n):
    result = stabilized_r(fib, n)
    assert result.stabilized and result.count == 2 * n


def test_clipped_cube_is_never_reported_stabilized(fib):
    result = stabilized_r(fib, 2, Window(((-80, 160), (-12, 12))))
    assert not result.stabilized
    assert result.count <= 4


def test_stabilized_r_radius_cap(fib):
    result = stabilized_r(fib, 4, max_radius=16, rounds=5)
    assert not result.stabilized
    assert result.window == Window.centered(16, 2)


@pytest.mark.parametrize("n", range(2, 7))
def test_toeplitz_counts_are_at_least_quadratic(toeplitz, n):
    result = stabilized_r(toeplitz, n, Window(((0, 1024), (0, 8))))
    assert not result.stabilized
    assert result.count >= n * n


def test_stabilized_r_rejects_disjoint_window(ex31):
    with pytest.raises(WindowError):
        stabilized_r(ex31, 2, Window.cube(100, 120, 2))


def test_rect_count(board, fib):
    assert rect_count(board, (2, 3), Window.centered(10, 2)) == 2
    assert rect_count(fib, (5, 1), Window(((-40, 80), (0, 3)))) == 10
    with pytest.raises(WindowError):
        rect_count(board, (2,), Window.centered(10, 2))


def test_recurrent_table_without_stabilizing(origin):
    table = recurrent_table(origin, [1, 2], Window.centered(10, 2), stabilize=False)
    assert table.counts() == [1, 1]
    assert table.rows[0].L == 5
    with pytest.raises(WindowError):
        recurrent_table(origin, [1], stabilize=False)


def test_table_csv(ex31):
    table = recurrent_table(ex31, [3, 4])
    lines = table.to_csv().splitlines()
    assert lines[0] == "n,count,stabilized,window,L"
    assert lines[1] == "3,9,true,[-16..16]x[-16..16],8"
    assert lines[2].startswith("4,12,true,")


def test_table_rows_are_validated():
    table = ComplexityTable.from_counts([(1, 2), (2, 4)])
    with pytest.raises(ValueError):
        table.add(2, 5)
    with pytest.raises(ValueError):
        table.add(3, -1)
    assert len(table) == 2
    assert list(table.frame.columns) == ComplexityTable.COLUMNS
    assert "count" in table.to_text()


def test_block_table_is_exact(origin):
    table = block_table(origin, range(1, 5), Window.centered(12, 2))
    assert table.counts() == [2, 5, 10, 17]
    assert all(row.stabilized and row.L == 0 for row in table.rows)


def test_growth_fit_recovers_exponent():
    fit = growth_fit(ComplexityTable.from_counts((n, 3 * n * n) for n in range(2, 9)))
    assert fit.exponent == pytest.approx(2.0)
    assert fit.residual == pytest.approx(0.0, abs=1e-9)


def test_growth_fit_skips_unstable_rows():
    table = ComplexityTable()
    for n in range(1, 6):
        table.add(n, n, stabilized=n < 3)
    with pytest.raises(InsufficientDataError):
        growth_fit(table)
    assert growth_fit(table, stabilized_only=False).exponent == pytest.approx(1.0)
