"""
Bit rasters of point sets over finite windows.

Bits are stored row-major with the last axis varying fastest, packed 64 to a
word. Axis 1 is x (rightward), axis 2 is y (upward); image formats print rows
from the highest y down.
"""
import json
import logging
import random
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from config import Config
from errors import DimensionMismatchError, GridFormatError, WindowError
from models.schemas import GridPayload
from models.window import Window

logger = logging.getLogger(__name__)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    packed = np.packbits(np.ascontiguousarray(bits, dtype=bool).ravel())
    pad = (-len(packed)) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return np.frombuffer(packed.tobytes(), dtype=">u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, extents: Sequence[int]) -> np.ndarray:
    count = int(np.prod(extents, dtype=np.int64)) if len(extents) else 1
    raw = np.frombuffer(words.astype(">u8").tobytes(), dtype=np.uint8)
    return np.unpackbits(raw, count=count).astype(bool).reshape(tuple(extents))


@dataclass(frozen=True, eq=False)
class Grid:
    origin: Tuple[int, ...]
    extents: Tuple[int, ...]
    words: np.ndarray

    @classmethod
    def from_bits(cls, origin: Sequence[int], bits: np.ndarray) -> "Grid":
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != len(origin):
            raise DimensionMismatchError(f"{bits.ndim}-dimensional bits with a {len(origin)}-dimensional origin")
        grid = cls(tuple(int(o) for o in origin), tuple(int(e) for e in bits.shape), pack_bits(bits))
        grid.__dict__["bits"] = _readonly(bits.copy())
        return grid

    @classmethod
    def empty(cls, window: Window) -> "Grid":
        return cls.from_bits(window.lows, np.zeros(window.extents, dtype=bool))

    @cached_property
    def bits(self) -> np.ndarray:
        return _readonly(unpack_bits(self.words, self.extents))

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def window(self) -> Window:
        return Window(tuple((o, o + e - 1) for o, e in zip(self.origin, self.extents)))

    def index(self, point: Sequence[int]) -> Tuple[int, ...]:
        return tuple(p - o for p, o in zip(point, self.origin))

    def contains_point(self, point: Sequence[int]) -> bool:
        return self.window.contains(point)

    def get(self, point: Sequence[int]) -> bool:
        if not self.contains_point(point):
            raise WindowError(f"point {tuple(point)} outside grid {self.window}")
        return bool(self.bits[self.index(point)])

    def count(self) -> int:
        return int(self.bits.sum())

    def members(self) -> List[Tuple[int, ...]]:
        return [tuple(int(i + o) for i, o in zip(idx, self.origin)) for idx in np.argwhere(self.bits)]

    def crop(self, window: Window) -> "Grid":
        inner = self.window.intersect(window)
        if inner != window:
            raise WindowError(f"window {window} is not inside grid {self.window}")
        slices = tuple(slice(lo - o, hi - o + 1) for (lo, hi), o in zip(window.bounds, self.origin))
        return Grid.from_bits(window.lows, self.bits[slices])

    def __eq__(self, other) -> bool:
        return (isinstance(other, Grid) and self.origin == other.origin
                and self.extents == other.extents and np.array_equal(self.words, other.words))

    __hash__ = None


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def rasterize(s, window: Window, threads: Optional[int] = None, max_bits: Optional[int] = None) -> Grid:
    """Grid of ``s`` over ``window``; ``s`` is any PointSet"""
    if window.dim != s.dim:
        raise DimensionMismatchError(f"{window.dim}-dimensional window for a {s.dim}-dimensional set")
    max_bits = max_bits or Config.RASTER_MAX_BITS
    if window.size > max_bits:
        raise WindowError(f"window {window} has {window.size} points, above the cap of {max_bits} bits")
    bits = s.membership_grid(window, threads=threads)
    logger.debug("rasterized %s over %s: %d members", s.name, window, int(bits.sum()))
    return Grid.from_bits(window.lows, bits)


def sample_mismatches(s, grid: Grid, samples: int = 1000, seed: int = 0) -> List[Tuple[int, ...]]:
    """Random grid points whose bit disagrees with direct membership"""
    rng = random.Random(seed)
    bad = []
    for _ in range(samples):
        point = tuple(rng.randint(lo, hi) for lo, hi in grid.window.bounds)
        if grid.get(point) != s.membership(point):
            bad.append(point)
    return bad


def grid_section(grid: Grid, axis: int, c: int) -> Grid:
    """Slice of the grid at coordinate ``axis`` (1-based) equal to c"""
    k = axis - 1
    lo = grid.origin[k]
    if not lo <= c < lo + grid.extents[k]:
        raise WindowError(f"section value {c} outside the grid on axis {axis}")
    bits = np.take(grid.bits, c - lo, axis=k)
    return Grid.from_bits(grid.origin[:k] + grid.origin[k + 1:], bits)


def grid_border(grid: Grid, v: Sequence[int]) -> Grid:
    """Brute-force Bd(A, v) on the points x of the grid with x + v also in the grid"""
    slices_here, slices_there, origin = [], [], []
    for o, e, step in zip(grid.origin, grid.extents, v):
        if abs(step) >= e:
            raise WindowError(f"shift {tuple(v)} leaves no interior in {grid.window}")
        if step >= 0:
            slices_here.append(slice(0, e - step))
            slices_there.append(slice(step, e))
            origin.append(o)
        else:
            slices_here.append(slice(-step, e))
            slices_there.append(slice(0, e + step))
            origin.append(o - step)
    here = grid.bits[tuple(slices_here)]
    there = grid.bits[tuple(slices_there)]
    return Grid.from_bits(origin, here & ~there)


# -------------------------------------------------------------------- codecs


def _require_plane(grid: Grid) -> None:
    if grid.dim != 2:
        raise DimensionMismatchError(f"image formats need d = 2, got d = {grid.dim}")


def _rows_top_down(grid: Grid) -> np.ndarray:
    return grid.bits.T[::-1]


def to_ascii(grid: Grid) -> str:
    """'#' for members; d = 1 gives a single line"""
    if grid.dim == 1:
        return "".join("#" if b else "." for b in grid.bits) + "\n"
    _require_plane(grid)
    return "".join("".join("#" if b else "." for b in row) + "\n" for row in _rows_top_down(grid))


def to_pbm(grid: Grid) -> bytes:
    _require_plane(grid)
    width, height = grid.extents
    lines = [f"P1\n{width} {height}\n"]
    lines += [" ".join("1" if b else "0" for b in row) + "\n" for row in _rows_top_down(grid)]
    return "".join(lines).encode("ascii")


def to_json(grid: Grid) -> str:
    payload = GridPayload(
        dim=grid.dim,
        origin=list(grid.origin),
        extents=list(grid.extents),
        bits="".join("1" if b else "0" for b in grid.bits.ravel()),
    )
    return payload.model_dump_json()


def from_json(text: str) -> Grid:
    try:
        payload = GridPayload.model_validate_json(text)
    except ValidationError as e:
        raise GridFormatError(f"malformed grid JSON: {e.errors()[0]['msg']}") from e
    except json.JSONDecodeError as e:
        raise GridFormatError(f"malformed grid JSON: {e}") from e
    size = int(np.prod(payload.extents, dtype=np.int64)) if payload.extents else 1
    if len(payload.bits) != size:
        raise GridFormatError(f"expected {size} bits, found {len(payload.bits)}")
    bits = np.frombuffer(payload.bits.encode("ascii"), dtype=np.uint8) == ord("1")
    return Grid.from_bits(payload.origin, bits.reshape(tuple(payload.extents)))
