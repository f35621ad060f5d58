"""
Block, recurrent-block and rectangular pattern counting.

A block of size n anchored at x is the restriction of the set to the cube
x + [0, n-1]^d, compared as a map on that cube. Counting packs every pattern
into bytes and takes the distinct rows; anchors are split into chunks along
axis 1 which are counted independently and merged.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import xxhash
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.linear_model import LinearRegression
from sklearn.metrics import mean_squared_error

from config import Config
from errors import GeometryError, InsufficientDataError, WindowError
from models.performance_tracker import performance_tracker
from models.raster import Grid, rasterize
from models.schemas import ComplexityRow, GrowthFitResult
from models.window import Window

logger = logging.getLogger(__name__)

_CHUNK_BITS = 1 << 24


@dataclass(frozen=True, eq=False)
class Block:
    """A finite pattern; equality is bit equality, the 128-bit digest only filters"""
    sizes: Tuple[int, ...]
    bits: bytes
    digest: bytes = field(init=False, repr=False)

    def __post_init__(self):
        h = xxhash.xxh3_128()
        h.update(np.array(self.sizes, dtype=np.int64).tobytes())
        h.update(self.bits)
        object.__setattr__(self, "digest", h.digest())

    @classmethod
    def from_array(cls, pattern: np.ndarray) -> "Block":
        pattern = np.asarray(pattern, dtype=bool)
        return cls(tuple(pattern.shape), np.packbits(pattern.ravel()).tobytes())

    @property
    def dim(self) -> int:
        return len(self.sizes)

    def array(self) -> np.ndarray:
        raw = np.frombuffer(self.bits, dtype=np.uint8)
        return np.unpackbits(raw, count=math.prod(self.sizes)).astype(bool).reshape(self.sizes)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Block) and self.digest == other.digest
                and self.sizes == other.sizes and self.bits == other.bits)

    def __hash__(self) -> int:
        return int.from_bytes(self.digest[:8], "little")


def _box_slices(grid: Grid, anchor: Sequence[int], sizes: Sequence[int]) -> Tuple[slice, ...]:
    slices = []
    for a, n, o, e in zip(anchor, sizes, grid.origin, grid.extents):
        if a < o or a + n > o + e:
            raise GeometryError(f"box of sizes {tuple(sizes)} at {tuple(anchor)} leaves grid {grid.window}")
        slices.append(slice(a - o, a - o + n))
    return tuple(slices)


def block_at(g: Grid, anchor: Sequence[int], n: int) -> Block:
    return rect_block_at(g, anchor, (n,) * g.dim)


def rect_block_at(g: Grid, anchor: Sequence[int], sizes: Sequence[int]) -> Block:
    if len(anchor) != g.dim or len(sizes) != g.dim:
        raise GeometryError(f"anchor {tuple(anchor)} and sizes {tuple(sizes)} must have dimension {g.dim}")
    return Block.from_array(g.bits[_box_slices(g, anchor, sizes)])


# -------------------------------------------------------------------- counting


def anchor_window(g: Grid, sizes: Sequence[int]) -> Optional[Window]:
    """Anchors whose box lies inside the grid, or None"""
    bounds = []
    for o, e, n in zip(g.origin, g.extents, sizes):
        if n > e:
            return None
        bounds.append((o, o + e - n))
    return Window(tuple(bounds))


def _escape_mask(anchors: Window, escape: int) -> Optional[np.ndarray]:
    if escape <= 0:
        return None
    norms = np.zeros(anchors.extents, dtype=np.int64)
    for axis in anchors.axes():
        norms = np.maximum(norms, np.abs(axis))
    return norms >= escape


def _chunk_patterns(bits: np.ndarray, sizes: Tuple[int, ...], mask: Optional[np.ndarray]) -> np.ndarray:
    view = sliding_window_view(bits, sizes)
    d = len(sizes)
    flat = view.reshape(view.shape[:d] + (-1,))
    if mask is not None:
        flat = flat[mask]
    else:
        flat = flat.reshape(-1, flat.shape[-1])
    packed = np.packbits(flat, axis=-1)
    rows = np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[-1]))).ravel()
    return np.unique(rows)


def distinct_patterns(g: Grid, sizes: Sequence[int], escape: int = 0,
                      threads: Optional[int] = None) -> np.ndarray:
    """Distinct packed patterns over every in-grid anchor with sup-norm >= escape"""
    sizes = tuple(int(n) for n in sizes)
    if len(sizes) != g.dim or min(sizes) < 1:
        raise WindowError(f"box sizes {sizes} do not fit a {g.dim}-dimensional grid")
    anchors = anchor_window(g, sizes)
    if anchors is None:
        raise WindowError(f"grid {g.window} is smaller than the box {sizes}")
    mask = _escape_mask(anchors, escape)
    if mask is not None and not mask.any():
        raise WindowError(f"no anchor of {anchors} has sup-norm >= {escape}")
    volume = math.prod(sizes)
    per_row = max(1, anchors.size // anchors.extents[0]) * volume
    step = max(1, _CHUNK_BITS // per_row)
    first = sizes[0]
    chunks = []
    for start in range(0, anchors.extents[0], step):
        stop = min(start + step, anchors.extents[0])
        part = g.bits[start:stop + first - 1]
        chunks.append((part, None if mask is None else mask[start:stop]))
    threads = threads or Config.THREADS
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            found = list(pool.map(lambda c: _chunk_patterns(c[0], sizes, c[1]), chunks))
    else:
        found = [_chunk_patterns(part, sizes, m) for part, m in chunks]
    return np.unique(np.concatenate(found)) if len(found) > 1 else found[0]


def count_patterns(g: Grid, sizes: Sequence[int], escape: int = 0, threads: Optional[int] = None) -> int:
    return len(distinct_patterns(g, sizes, escape, threads))


def distinct_blocks(g: Grid, sizes: Sequence[int], anchors: Iterable[Sequence[int]]) -> List[Block]:
    """Distinct blocks among the given anchors, first occurrence order"""
    seen = {}
    for anchor in anchors:
        block = rect_block_at(g, anchor, sizes)
        seen.setdefault(block, None)
    return list(seen)


def p_count(s, n: int, w: Window, threads: Optional[int] = None) -> int:
    """Block complexity p(n) observed over all anchors of w"""
    with performance_tracker.measure("p_count"):
        return count_patterns(rasterize(s, w, threads), (n,) * s.dim, 0, threads)


def r_count(s, n: int, w: Window, L: int, threads: Optional[int] = None) -> int:
    """Blocks with an anchor of sup-norm >= L inside w"""
    with performance_tracker.measure("r_count"):
        return count_patterns(rasterize(s, w, threads), (n,) * s.dim, L, threads)


def rect_count(s, sizes: Sequence[int], w: Window, threads: Optional[int] = None) -> int:
    if len(sizes) != s.dim:
        raise WindowError(f"{len(sizes)} box sizes for a {s.dim}-dimensional set")
    with performance_tracker.measure("rect_count"):
        return count_patterns(rasterize(s, w, threads), sizes, 0, threads)


class StabilizedCount(NamedTuple):
    count: int
    stabilized: bool
    window: Window
    L: int


def stabilized_r(s, n: int, window: Optional[Window] = None, start_radius: Optional[int] = None,
                 max_radius: Optional[int] = None, rounds: Optional[int] = None,
                 threads: Optional[int] = None) -> StabilizedCount:
    """
    R(n) on centred cubes of doubling radius r with escape L = r // 2.

    Stops once the count repeats ``rounds`` times in a row; at the radius cap, or
    once ``window`` (an outer clip) is exhausted, the last count is returned
    with stabilized=False. A count taken on a cube the clip cuts into is never
    reported as stabilized: blocks that recur only outside the clip are missing
    from it, so it is a lower bound at best.
    """
    d = s.dim
    if max_radius is None:
        max_radius = Config.STABILIZE_MAX_RADIUS_1D if d == 1 else Config.STABILIZE_MAX_RADIUS
    rounds = rounds or Config.STABILIZE_ROUNDS
    r = max(start_radius or Config.STABILIZE_START_RADIUS, s.recurrence_hint or 0, 2 * n)
    previous, streak = None, 0
    with performance_tracker.measure("stabilized_r"):
        while True:
            w = Window.centered(r, d)
            if window is not None:
                w = w.intersect(window)
                if w is None:
                    raise WindowError(f"window {window} misses the centred cube of radius {r}")
            L = r // 2
            count = count_patterns(rasterize(s, w, threads), (n,) * d, L, threads)
            logger.debug("R(%d) on %s with L=%d: %d", n, w, L, count)
            clipped = w != Window.centered(r, d)
            streak = streak + 1 if count == previous else 0
            if streak >= rounds and not clipped:
                return StabilizedCount(count, True, w, L)
            exhausted = window is not None and window.intersect(Window.centered(r, d)) == window
            if r >= max_radius or exhausted:
                logger.info("R(%d) for %s did not stabilize up to radius %d", n, s.name, r)
                return StabilizedCount(count, False, w, L)
            previous = count
            r *= 2


# ---------------------------------------------------------------------- tables


class ComplexityTable:
    """Rows (n, count, stabilized, window, L) with n strictly increasing"""
    COLUMNS = ["n", "count", "stabilized", "window", "L"]

    def __init__(self, rows: Iterable[ComplexityRow] = ()):
        self.rows: List[ComplexityRow] = []
        for row in rows:
            self.append(row)

    def append(self, row: ComplexityRow) -> None:
        if row.count < 0:
            raise ValueError("counts are nonnegative")
        if self.rows and row.n <= self.rows[-1].n:
            raise ValueError("n must be strictly increasing")
        self.rows.append(row)

    def add(self, n: int, count: int, stabilized: bool = True, window: str = "", L: int = 0) -> None:
        self.append(ComplexityRow(n=n, count=count, stabilized=stabilized, window=str(window), L=L))

    @classmethod
    def from_counts(cls, counts: Iterable[Tuple[int, int]]) -> "ComplexityTable":
        table = cls()
        for n, count in counts:
            table.add(n, count)
        return table

    @property
    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.rows], columns=self.COLUMNS)

    def counts(self) -> List[int]:
        return [row.count for row in self.rows]

    def to_csv(self) -> str:
        frame = self.frame
        frame["stabilized"] = frame["stabilized"].map({True: "true", False: "false"})
        return frame.to_csv(index=False, lineterminator="\n")

    def to_text(self) -> str:
        return self.frame.to_string(index=False) + "\n"

    def __len__(self) -> int:
        return len(self.rows)


def recurrent_table(s, ns: Iterable[int], window: Optional[Window] = None, stabilize: bool = True,
                    escape: Optional[int] = None, threads: Optional[int] = None) -> ComplexityTable:
    table = ComplexityTable()
    for n in ns:
        if stabilize:
            result = stabilized_r(s, n, window, threads=threads)
            table.add(n, result.count, result.stabilized, result.window, result.L)
        else:
            if window is None:
                raise WindowError("a window is required without --stabilize")
            L = window.radius // 2 if escape is None else escape
            table.add(n, r_count(s, n, window, L, threads), False, window, L)
    return table


def block_table(s, ns: Iterable[int], window: Window, threads: Optional[int] = None) -> ComplexityTable:
    """p(n) rows; exact on the window, so flagged stabilized with L = 0"""
    grid = rasterize(s, window, threads)
    table = ComplexityTable()
    for n in ns:
        table.add(n, count_patterns(grid, (n,) * s.dim, 0, threads), True, window, 0)
    return table


def growth_fit_values(ns: Sequence[int], counts: Sequence[int]) -> GrowthFitResult:
    x = np.log(np.asarray(ns, dtype=float)).reshape(-1, 1)
    y = np.log(np.asarray(counts, dtype=float))
    model = LinearRegression().fit(x, y)
    residual = math.sqrt(mean_squared_error(y, model.predict(x)))
    return GrowthFitResult(exponent=float(model.coef_[0]), residual=residual)


def growth_fit(t: ComplexityTable, min_rows: int = 4, stabilized_only: bool = True) -> GrowthFitResult:
    """Slope and RMS residual of the least-squares line through (log n, log count)"""
    rows = [row for row in t.rows if (row.stabilized or not stabilized_only) and row.count >= 1]
    if len(rows) < min_rows:
        raise InsufficientDataError(f"need {min_rows} usable rows with positive counts, have {len(rows)}")
    return growth_fit_values([row.n for row in rows], [row.count for row in rows])
