import numpy as np
import pytest

from errors import DimensionMismatchError, GridFormatError, WindowError
from models.point_sets import intro_set
from models.raster import (
    Grid, from_json, grid_border, grid_section, pack_bits, rasterize, sample_mismatches, to_ascii,
    to_json, to_pbm, unpack_bits,
)
from models.window import Window


def test_pack_unpack_odd_sizes():
    rng = np.random.default_rng(3)
    bits = rng.random((7, 13)) < 0.4
    words = pack_bits(bits)
    assert words.dtype == np.uint64
    assert len(words) == 2
    assert np.array_equal(unpack_bits(words, (7, 13)), bits)


def test_grid_basics(ex31):
    grid = rasterize(ex31, Window.cube(0, 9, 2))
    assert grid.window == Window.cube(0, 9, 2)
    assert grid.get((4, 4)) and grid.get((4, 1)) and not grid.get((4, 2))
    assert grid.count() == 19
    assert (9, 9) in grid.members()
    with pytest.raises(WindowError):
        grid.get((10, 0))
    assert not grid.bits.flags.writeable


def test_grid_equality_uses_words(ex31):
    a = rasterize(ex31, Window.cube(0, 5, 2))
    b = Grid.from_bits((0, 0), ex31.membership_grid(Window.cube(0, 5, 2)))
    assert a == b
    assert a != Grid.from_bits((1, 0), a.bits)


def test_rasterize_caps(ex31):
    with pytest.raises(WindowError, match="cap"):
        rasterize(ex31, Window.cube(0, 99, 2), max_bits=1000)
    with pytest.raises(DimensionMismatchError):
        rasterize(ex31, Window(((0, 5),)))


def test_raster_agrees_with_membership(ex32):
    grid = rasterize(ex32, Window.centered(30, 2))
    assert sample_mismatches(ex32, grid, samples=500, seed=4) == []


def test_crop_and_section(ex31):
    grid = rasterize(ex31, Window.cube(-3, 12, 2))
    crop = grid.crop(Window.cube(0, 3, 2))
    assert crop.members() == [(0, 0), (0, 1), (1, 1), (2, 1), (2, 2), (3, 1), (3, 3)]
    with pytest.raises(WindowError):
        grid.crop(Window.cube(10, 20, 2))
    line = grid_section(grid, 2, 1)
    assert line.dim == 1
    assert line.members() == [(x,) for x in range(0, 13)]
    with pytest.raises(WindowError):
        grid_section(grid, 1, 40)


def test_border_of_raster(ex31):
    grid = rasterize(ex31, Window.cube(0, 6, 2))
    border = grid_border(grid, (1, 0))
    assert border.window == Window(((0, 5), (0, 6)))
    # the line y = 1 never ends inside the window; every diagonal point except (1, 1) does
    assert border.members() == [(0, 0), (2, 2), (3, 3), (4, 4), (5, 5)]
    with pytest.raises(WindowError):
        grid_border(grid, (7, 0))


def test_ascii_top_row_first(ex31):
    text = to_ascii(rasterize(ex31, Window.parse("x=0..9,y=0..9")))
    lines = text.splitlines()
    assert len(lines) == 10
    assert lines[0] == ".........#"
    assert lines[8] == "##########"
    assert lines[9] == "#........."


def test_ascii_of_a_line():
    grid = rasterize(intro_set(), Window(((0, 6),)))
    assert to_ascii(grid) == "#####.#\n"


def test_pbm(board):
    data = to_pbm(rasterize(board, Window.cube(0, 2, 2)))
    assert data == b"P1\n3 3\n1 0 1\n0 1 0\n1 0 1\n"
    with pytest.raises(DimensionMismatchError):
        to_pbm(rasterize(intro_set(), Window(((0, 6),))))


def test_json_round_trip(ex32):
    grid = rasterize(ex32, Window(((-2, 9), (0, 6))))
    again = from_json(to_json(grid))
    assert again == grid
    assert again.origin == (-2, 0)


@pytest.mark.parametrize("text", [
    "not json",
    '{"dim": 2, "origin": [0, 0], "extents": [2, 2], "bits": "01"}',
    '{"dim": 2, "origin": [0], "extents": [2, 2], "bits": "0101"}',
    '{"dim": 1, "origin": [0], "extents": [2], "bits": "0x"}',
    '{"dim": 1, "origin": [0], "extents": [0], "bits": ""}',
])
def test_json_rejects(text):
    with pytest.raises(GridFormatError):
        from_json(text)
