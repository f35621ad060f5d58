"""
Period search and certification.

Neighbourhoods come in two shapes: the ball B(x, K) = {y : ||x - y|| < K}
(side 2K - 1, centred) and the anchored cube x + [0, K-1]^d. Vectors are
ordered by (sup-norm, coordinates); a vector and its negation describe the
same local period, so searches only visit the canonical one whose first
nonzero coordinate is positive.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from config import Config
from errors import (
    DimensionMismatchError, GeometryError, InsufficientDataError, PreconditionError, WindowError,
)
from models.complexity import block_at, count_patterns, rect_block_at, rect_count
from models.performance_tracker import performance_tracker
from models.raster import Grid, rasterize
from models.schemas import (
    GlobalPeriodsReport, LocalPeriodicityCert, LocalPeriodReport, MorseHedlundVerdict,
    MuchnikReport, NivatReport, PeriodSearchParams, RepetitivityReport, TailPeriods,
    VerificationReport,
)
from models.window import Window

logger = logging.getLogger(__name__)

NEIGHBORHOODS = ("ball", "cube")


@dataclass(frozen=True, order=True)
class PeriodVector:
    norm: int
    v: Tuple[int, ...]

    @classmethod
    def of(cls, v: Sequence[int]) -> "PeriodVector":
        v = tuple(int(a) for a in v)
        norm = max((abs(a) for a in v), default=0)
        if norm == 0:
            raise GeometryError("a period vector must be nonzero")
        return cls(norm, v)

    @property
    def dim(self) -> int:
        return len(self.v)

    def canonical(self) -> "PeriodVector":
        first = next(a for a in self.v if a)
        return self if first > 0 else PeriodVector(self.norm, tuple(-a for a in self.v))

    def __neg__(self) -> "PeriodVector":
        return PeriodVector(self.norm, tuple(-a for a in self.v))

    def __str__(self) -> str:
        return "(" + ",".join(str(a) for a in self.v) + ")"


VectorLike = Union[PeriodVector, Sequence[int]]


def _period(v: VectorLike) -> PeriodVector:
    return v if isinstance(v, PeriodVector) else PeriodVector.of(v)


def canonical_vectors(dim: int, max_norm: int, min_norm: int = 1) -> Iterator[PeriodVector]:
    """Canonical nonzero vectors ordered by (norm, coordinates)"""
    for norm in range(max(1, min_norm), max_norm + 1):
        for v in itertools.product(range(-norm, norm + 1), repeat=dim):
            if max(abs(a) for a in v) != norm:
                continue
            first = next(a for a in v if a)
            if first > 0:
                yield PeriodVector(norm, v)


def _offsets(K: int, neighborhood: str) -> Tuple[int, int]:
    if neighborhood == "ball":
        return -(K - 1), K - 1
    if neighborhood == "cube":
        return 0, K - 1
    raise ValueError(f"unknown neighbourhood {neighborhood!r}; use one of {NEIGHBORHOODS}")


def neighborhood_window(x: Sequence[int], K: int, neighborhood: Optional[str] = None) -> Window:
    lo, hi = _offsets(K, neighborhood or Config.NEIGHBORHOOD)
    return Window(tuple((a + lo, a + hi) for a in x))


def _pair_slices(extents: Sequence[int], v: Sequence[int]) -> Optional[Tuple[tuple, tuple]]:
    here, there = [], []
    for e, step in zip(extents, v):
        if abs(step) >= e:
            return None
        if step >= 0:
            here.append(slice(0, e - step))
            there.append(slice(step, e))
        else:
            here.append(slice(-step, e))
            there.append(slice(0, e + step))
    return tuple(here), tuple(there)


def periodic_bits(bits: np.ndarray, v: Sequence[int]) -> bool:
    """True when every pair (m, m + v) inside the array agrees; vacuous when there is no pair"""
    pairs = _pair_slices(bits.shape, v)
    if pairs is None:
        return True
    here, there = pairs
    return bool(np.array_equal(bits[here], bits[there]))


def is_v_periodic_inside(s, v: VectorLike, x: Sequence[int], K: int,
                         neighborhood: Optional[str] = None) -> bool:
    v = _period(v)
    if len(x) != s.dim or v.dim != s.dim:
        raise DimensionMismatchError(f"point {tuple(x)} and vector {v} for a {s.dim}-dimensional set")
    window = neighborhood_window(x, K, neighborhood)
    return periodic_bits(s.membership_grid(window), v.v)


def _grid_bits(source, window: Window) -> np.ndarray:
    if isinstance(source, Grid):
        return source.crop(window).bits
    return source.membership_grid(window)


def minimal_local_period(source, x: Sequence[int], K: int, max_norm: Optional[int] = None,
                         neighborhood: Optional[str] = None) -> Optional[PeriodVector]:
    """Smallest (norm, coordinates) canonical vector that is a period inside the K-neighbourhood of x"""
    window = neighborhood_window(x, K, neighborhood)
    bits = _grid_bits(source, window)
    side = min(window.extents)
    max_norm = side - 1 if max_norm is None else min(max_norm, side - 1)
    for v in canonical_vectors(window.dim, max_norm):
        if periodic_bits(bits, v.v):
            return v
    return None


# ------------------------------------------------------- vectorized neighbourhood scan


def _box_sums(values: np.ndarray, starts: Sequence[int], sizes: Sequence[int],
              extents: Sequence[int]) -> np.ndarray:
    """Sum of ``values`` over the box start + t + [0, size) for every t in [0, extents)"""
    total = np.pad(values.astype(np.int64), [(1, 0)] * values.ndim)
    for axis in range(values.ndim):
        total = np.cumsum(total, axis=axis)
    result = np.zeros(tuple(extents), dtype=np.int64)
    for corner in itertools.product((0, 1), repeat=values.ndim):
        index = tuple(slice(st + c * sz, st + c * sz + e) for st, sz, e, c in zip(starts, sizes, extents, corner))
        sign = -1 if (len(corner) - sum(corner)) % 2 else 1
        result += sign * total[index]
    return result


class NeighborhoodScan:
    """Per-point test "some v in V is a period inside the K-neighbourhood" over a window"""

    def __init__(self, s, K: int, window: Window, neighborhood: Optional[str] = None,
                 threads: Optional[int] = None):
        self.K = K
        self.window = window
        self.neighborhood = neighborhood or Config.NEIGHBORHOOD
        self.lo, self.hi = _offsets(K, self.neighborhood)
        big = Window(tuple((a + self.lo, b + self.hi) for a, b in window.bounds))
        self.bits = rasterize(s, big, threads).bits

    def periodic(self, v: PeriodVector) -> np.ndarray:
        span = self.hi - self.lo + 1
        sizes = [span - abs(a) for a in v.v]
        if min(sizes) <= 0:
            return np.ones(self.window.extents, dtype=bool)
        diff = np.zeros(self.bits.shape, dtype=bool)
        here, there = _pair_slices(self.bits.shape, v.v)
        diff[here] = self.bits[here] != self.bits[there]
        starts = [max(0, -a) for a in v.v]
        return _box_sums(diff, starts, sizes, self.window.extents) == 0

    def covered(self, V: Sequence[PeriodVector]) -> np.ndarray:
        ok = np.zeros(self.window.extents, dtype=bool)
        for v in V:
            ok |= self.periodic(v)
        return ok

    def norms(self) -> np.ndarray:
        norms = np.zeros(self.window.extents, dtype=np.int64)
        for axis in self.window.axes():
            norms = np.maximum(norms, np.abs(axis))
        return norms


def verify_local_periodicity(s, cert: LocalPeriodicityCert, w: Window, neighborhood: Optional[str] = None,
                             threads: Optional[int] = None) -> VerificationReport:
    """Check every x in w with ||x|| >= L; the first failure is the lexicographically smallest"""
    cert.check_radius()
    V = [PeriodVector.of(v) for v in cert.V]
    if V[0].dim != s.dim or w.dim != s.dim:
        raise DimensionMismatchError(f"certificate and window must have dimension {s.dim}")
    with performance_tracker.measure("verify_local_periodicity"):
        scan = NeighborhoodScan(s, cert.K, w, neighborhood, threads)
        far = scan.norms() >= cert.L
        bad = far & ~scan.covered(V)
    checked = int(far.sum())
    if not bad.any():
        return VerificationReport(holds=True, checked=checked, neighborhood=scan.neighborhood)
    first = np.argwhere(bad)[0] + np.array(w.lows)
    logger.info("local periodicity fails at %s", tuple(first))
    return VerificationReport(holds=False, first_violation=[int(a) for a in first], checked=checked,
                              neighborhood=scan.neighborhood)


def muchnik_sample(s, K: int, V: Sequence[VectorLike], w: Window, neighborhood: Optional[str] = None,
                   threads: Optional[int] = None) -> Optional[int]:
    """Smallest L <= radius(w) past which every K-neighbourhood in w has a period from V"""
    if K < 1 or not V:
        raise PreconditionError("need K >= 1 and a nonempty V")
    with performance_tracker.measure("muchnik_sample"):
        scan = NeighborhoodScan(s, K, w, neighborhood, threads)
        bad = ~scan.covered([_period(v) for v in V])
        norms = scan.norms()
    if not bad.any():
        return 0
    L = int(norms[bad].max()) + 1
    return L if L <= w.radius else None


def muchnik_report(s, K: int, V: Sequence[VectorLike], w: Window, neighborhood: Optional[str] = None,
                   threads: Optional[int] = None) -> MuchnikReport:
    L = muchnik_sample(s, K, V, w, neighborhood, threads)
    return MuchnikReport(K=K, V=[list(_period(v).v) for v in V], L=L, window=str(w),
                         neighborhood=neighborhood or Config.NEIGHBORHOOD)


# ------------------------------------------------------------ pigeonhole period


def period_norm_bound(C: Union[Fraction, float, int], K: int, d: int) -> float:
    """(2C)^(1/d) (5K)^((d-1)/d)"""
    if C <= 0 or K < 1 or d < 1:
        raise ValueError("need C > 0, K >= 1 and d >= 1")
    return float(2 * C) ** (1 / d) * float(5 * K) ** ((d - 1) / d)


def _touched_blocks(g: Grid, z: Sequence[int], n: int, m: int) -> Tuple[List[Tuple[int, ...]], np.ndarray]:
    d = g.dim
    region = Window(tuple((a - m + 1, a + n - 1) for a in z))
    if g.window.intersect(region) != region:
        raise GeometryError(f"blocks touched from {tuple(z)} (n={n}, m={m}) leave grid {g.window}")
    bits = g.crop(region).bits
    view = sliding_window_view(bits, (n,) * d)
    packed = np.packbits(view.reshape(view.shape[:d] + (-1,)), axis=-1)
    rows = np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[-1])))
    rows = rows.reshape(view.shape[:d])
    anchors = [tuple(a - m + 1 + k for a, k in zip(z, idx)) for idx in itertools.product(range(m), repeat=d)]
    return anchors, rows.reshape(-1)


def touched_block_count(g: Grid, z: Sequence[int], n: int, m: int) -> int:
    """Distinct n-blocks among the m^d anchors z + y, y in [-m+1, 0]^d"""
    _, rows = _touched_blocks(g, z, n, m)
    return len(np.unique(rows))


def find_local_period(g: Grid, z: Sequence[int], params: PeriodSearchParams) -> Optional[PeriodVector]:
    """
    Two touched anchors z + y1, z + y2 with equal n-blocks give v = y2 - y1 with
    M_{z-v,n-m} = M_{z,n-m} = M_{z+v,n-m}. The smallest such v by (norm,
    coordinates) is returned after re-checking the triple equality bit by bit.
    """
    d = g.dim
    params.check(d)
    if max(abs(a) for a in z) < params.m0 + params.m:
        raise PreconditionError(f"||z|| must be at least m0 + m = {params.m0 + params.m}")
    n, m = params.n, params.m
    anchors, rows = _touched_blocks(g, z, n, m)
    groups: Dict[bytes, List[Tuple[int, ...]]] = {}
    for anchor, row in zip(anchors, rows):
        groups.setdefault(row.tobytes(), []).append(anchor)
    best: Optional[PeriodVector] = None
    for members in groups.values():
        for a, b in itertools.combinations(members, 2):
            candidate = PeriodVector.of([q - p for p, q in zip(a, b)]).canonical()
            if best is None or candidate < best:
                best = candidate
    if best is None:
        return None
    size = n - m
    if size >= 1:
        minus = tuple(a - c for a, c in zip(z, best.v))
        plus = tuple(a + c for a, c in zip(z, best.v))
        here = block_at(g, z, size)
        if not (block_at(g, minus, size) == here == block_at(g, plus, size)):
            raise AssertionError(f"triple block equality fails for {best} at {tuple(z)}")
    return best


def local_period_report(g: Grid, z: Sequence[int], params: PeriodSearchParams) -> LocalPeriodReport:
    v = find_local_period(g, z, params)
    return LocalPeriodReport(z=list(z), v=list(v.v) if v else None, norm=v.norm if v else None,
                             distinct_blocks=touched_block_count(g, z, params.n, params.m),
                             anchors=params.m ** g.dim)


# ---------------------------------------------------------------- one dimension


def factor_counts(word: np.ndarray, n_max: int) -> List[int]:
    word = np.asarray(word, dtype=bool)
    counts = []
    for n in range(1, n_max + 1):
        packed = np.packbits(sliding_window_view(word, n), axis=-1)
        counts.append(len(np.unique(np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[-1]))))))
    return counts


def eventual_period(word: np.ndarray, max_period: int) -> Optional[Tuple[int, int]]:
    """(period p, preperiod N) with word[i] = word[i + p] for all i >= N, smallest N then p"""
    word = np.asarray(word, dtype=bool)
    best = None
    for p in range(1, min(max_period, len(word) - 1) + 1):
        mismatches = np.flatnonzero(word[:-p] != word[p:])
        start = int(mismatches[-1]) + 1 if len(mismatches) else 0
        if best is None or (start, p) < (best[1], best[0]):
            best = (p, start)
    return best


def mh_classify_1d(word: Sequence[int], n_max: int, start: int = 0) -> MorseHedlundVerdict:
    """
    Smallest n <= n_max with p(n) <= n on the finite word, which then has an
    eventual period at most n. ``start`` is the index of the first letter; the
    reported preperiod counts letters from there.
    """
    word = np.asarray(word, dtype=bool)
    if len(word) < 2 * n_max:
        raise InsufficientDataError(f"a word of length {len(word)} is too short for n_max = {n_max}")
    counts = factor_counts(word, n_max)
    certificate = next((n for n, c in enumerate(counts, start=1) if c <= n), None)
    if certificate is None:
        return MorseHedlundVerdict(n_max=n_max, counts=counts)
    period = eventual_period(word, certificate)
    p, preperiod = period
    logger.debug("word from index %d: p(%d) <= %d, period %d after %d letters", start, certificate,
                 certificate, p, preperiod)
    return MorseHedlundVerdict(certificate=certificate, n_max=n_max, counts=counts, period=p, preperiod=preperiod)


def tail_periods_1d(s, radius: int) -> TailPeriods:
    """Eventual periods of both tails of a 1-D set read on [-radius, radius]"""
    if s.dim != 1:
        raise DimensionMismatchError("tail periods need a one-dimensional set")
    bits = s.membership_grid(Window(((-radius, radius),)))
    limit = max(1, radius // 4)
    right = eventual_period(bits[radius:], limit)
    left = eventual_period(bits[:radius + 1][::-1], limit)
    keep_right = right is not None and right[1] <= radius // 2
    keep_left = left is not None and left[1] <= radius // 2
    N = max(right[1] if keep_right else 0, left[1] if keep_left else 0)
    return TailPeriods(N=N, right_period=right[0] if keep_right else None,
                       left_period=left[0] if keep_left else None)


# ------------------------------------------------------------ distinct blocks


def distinct_block_cert(g: Grid, x: Sequence[int], n: int, v: VectorLike) -> bool:
    """
    For a minimal period v inside B(x, n) of a planar grid, the ||v||^2 blocks of
    size 2n + ||v|| anchored at x - n(1,1) - z, z in [0, ||v|| - 1]^2, are pairwise
    distinct. Both hypotheses are re-verified first.
    """
    v = _period(v)
    if g.dim != 2 or v.dim != 2:
        raise DimensionMismatchError("the distinct-block certificate is planar")
    ball = neighborhood_window(x, n, "ball")
    if g.window.intersect(ball) != ball:
        raise GeometryError(f"B({tuple(x)}, {n}) leaves grid {g.window}")
    bits = g.crop(ball).bits
    if not periodic_bits(bits, v.v):
        raise PreconditionError(f"{v} is not a period inside B({tuple(x)}, {n})")
    smaller = next((w for w in canonical_vectors(2, v.norm - 1) if periodic_bits(bits, w.v)), None)
    if smaller is not None:
        raise PreconditionError(f"{v} is not minimal: {smaller} is a period inside B({tuple(x)}, {n})")
    k = v.norm
    size = 2 * n + k
    blocks = []
    for z in itertools.product(range(k), repeat=2):
        anchor = tuple(a - n - c for a, c in zip(x, z))
        blocks.append(rect_block_at(g, anchor, (size, size)))
    return len(set(blocks)) == len(blocks)


# ------------------------------------------------------------- global periods


def global_period_search(g: Grid, max_norm: int) -> List[PeriodVector]:
    """Canonical v with 1 <= ||v|| <= max_norm valid on every in-grid pair (x, x + v)"""
    found = []
    with performance_tracker.measure("global_period_search"):
        for v in canonical_vectors(g.dim, max_norm):
            if _pair_slices(g.extents, v.v) is None:
                continue
            if periodic_bits(g.bits, v.v):
                found.append(v)
    return found


def lattice_rank(periods: Sequence[VectorLike]) -> int:
    if not periods:
        return 0
    matrix = np.array([_period(v).v for v in periods], dtype=np.int64)
    return int(np.linalg.matrix_rank(matrix))


def global_periods_report(g: Grid, max_norm: int) -> GlobalPeriodsReport:
    periods = global_period_search(g, max_norm)
    rank = lattice_rank(periods)
    return GlobalPeriodsReport(periods=[list(v.v) for v in periods], lattice_rank=rank,
                               ideal_crystal=rank == g.dim)


def nivat_probe(s, sizes: Sequence[int], w: Window, threads: Optional[int] = None) -> NivatReport:
    """Rectangular complexity against n1 n2 and the global periods seen when the bound holds"""
    if len(sizes) != 2 or s.dim != 2:
        raise DimensionMismatchError("the Nivat probe is planar")
    count = rect_count(s, sizes, w, threads)
    bound = sizes[0] * sizes[1]
    periods = []
    if count <= bound:
        periods = [list(v.v) for v in global_period_search(rasterize(s, w, threads), max(sizes))]
    return NivatReport(sizes=list(sizes), count=count, bound=bound, below_bound=count <= bound, periods=periods)


# --------------------------------------------------------------- repetitivity


def repetitivity_probe(s, t: int, w: Window, max_radius: Optional[int] = None,
                       threads: Optional[int] = None) -> Optional[int]:
    """
    Smallest R such that every ball of radius R inside w contains every t-patch
    (pattern on a ball of radius t) seen in w, or None up to the radius cap
    (min extent // 8 unless given).
    """
    if t < 1:
        raise PreconditionError("t must be positive")
    grid = rasterize(s, w, threads)
    side = 2 * t + 1
    if min(w.extents) < side:
        raise WindowError(f"window {w} is smaller than a {t}-patch")
    cap = max_radius if max_radius is not None else min(w.extents) // 8
    d = w.dim
    view = sliding_window_view(grid.bits, (side,) * d)
    packed = np.packbits(view.reshape(view.shape[:d] + (-1,)), axis=-1)
    rows = np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[-1]))).reshape(view.shape[:d])
    _, ids = np.unique(rows.ravel(), return_inverse=True)
    ids = ids.reshape(view.shape[:d])
    kinds = int(ids.max()) + 1
    for R in range(t, cap + 1):
        span = 2 * (R - t) + 1
        centres = tuple(e - span + 1 for e in ids.shape)
        if min(centres) < 1:
            break
        everywhere = np.ones(centres, dtype=bool)
        for kind in range(kinds):
            present = _box_sums(ids == kind, [0] * d, [span] * d, centres) > 0
            everywhere &= present
            if not everywhere.any():
                break
        if everywhere.all():
            return R
    return None


def repetitivity_report(s, t: int, w: Window, threads: Optional[int] = None) -> RepetitivityReport:
    R = repetitivity_probe(s, t, w, threads=threads)
    side = 2 * t + 1
    patches = count_patterns(rasterize(s, w, threads), (side,) * s.dim)
    return RepetitivityReport(t=t, radius=R, patches=patches)
