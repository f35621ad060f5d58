import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from errors import WindowError

_RANGE = re.compile(r"^\s*(?:([a-z][a-z0-9_]*)\s*=\s*)?(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


@dataclass(frozen=True)
class Window:
    """Per-axis inclusive integer bounds; axis 1 is x"""
    bounds: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        bounds = tuple((int(lo), int(hi)) for lo, hi in self.bounds)
        for lo, hi in bounds:
            if lo > hi:
                raise WindowError(f"empty axis range {lo}..{hi}")
        object.__setattr__(self, "bounds", bounds)

    # ------------------------------------------------------------ constructors
    @classmethod
    def cube(cls, lo: int, hi: int, dim: int) -> "Window":
        return cls(tuple((lo, hi) for _ in range(dim)))

    @classmethod
    def centered(cls, radius: int, dim: int) -> "Window":
        return cls.cube(-radius, radius, dim)

    @classmethod
    def parse(cls, text: str, names: Optional[Sequence[str]] = None) -> "Window":
        """'x=-20..20,y=-20..20' or '-20..20,-20..20'"""
        parts = [p for p in text.split(",") if p.strip()]
        parsed: List[Tuple[Optional[str], int, int]] = []
        for part in parts:
            match = _RANGE.match(part)
            if not match:
                raise WindowError(f"malformed window component {part!r}")
            parsed.append((match.group(1), int(match.group(2)), int(match.group(3))))
        if all(name is None for name, _, _ in parsed):
            return cls(tuple((lo, hi) for _, lo, hi in parsed))
        if any(name is None for name, _, _ in parsed):
            raise WindowError("mix of named and positional window components")
        by_name = {name: (lo, hi) for name, lo, hi in parsed}
        if names is None:
            names = [name for name, _, _ in parsed]
        unknown = set(by_name) - set(names)
        if unknown or len(by_name) != len(names):
            raise WindowError(f"window axes {sorted(by_name)} do not match variables {list(names)}")
        return cls(tuple(by_name[name] for name in names))

    # -------------------------------------------------------------- properties
    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def lows(self) -> Tuple[int, ...]:
        return tuple(lo for lo, _ in self.bounds)

    @property
    def highs(self) -> Tuple[int, ...]:
        return tuple(hi for _, hi in self.bounds)

    @property
    def extents(self) -> Tuple[int, ...]:
        return tuple(hi - lo + 1 for lo, hi in self.bounds)

    @property
    def size(self) -> int:
        return math.prod(self.extents)

    @property
    def radius(self) -> int:
        """Largest sup-norm of a window point"""
        return max((max(abs(lo), abs(hi)) for lo, hi in self.bounds), default=0)

    # ---------------------------------------------------------------- geometry
    def contains(self, point: Sequence[int]) -> bool:
        return len(point) == self.dim and all(lo <= p <= hi for p, (lo, hi) in zip(point, self.bounds))

    def points(self) -> Iterator[Tuple[int, ...]]:
        """All points, lexicographic with axis 1 slowest"""
        return itertools.product(*(range(lo, hi + 1) for lo, hi in self.bounds))

    def intersect(self, other: "Window") -> Optional["Window"]:
        bounds = []
        for (a, b), (c, d) in zip(self.bounds, other.bounds):
            lo, hi = max(a, c), min(b, d)
            if lo > hi:
                return None
            bounds.append((lo, hi))
        return Window(tuple(bounds))

    def expand(self, k: int) -> "Window":
        return Window(tuple((lo - k, hi + k) for lo, hi in self.bounds))

    def shrink(self, k: int) -> "Window":
        return self.expand(-k)

    def translate(self, t: Sequence[int]) -> "Window":
        return Window(tuple((lo + s, hi + s) for (lo, hi), s in zip(self.bounds, t)))

    def drop_axis(self, axis: int) -> "Window":
        """Remove axis (1-based)"""
        return Window(self.bounds[:axis - 1] + self.bounds[axis:])

    def axes(self) -> List[np.ndarray]:
        """Open-grid coordinate arrays broadcasting to the window shape"""
        grids = []
        for i, (lo, hi) in enumerate(self.bounds):
            shape = [1] * self.dim
            shape[i] = hi - lo + 1
            grids.append(np.arange(lo, hi + 1, dtype=np.int64).reshape(shape))
        return grids

    def __str__(self) -> str:
        return "x".join(f"[{lo}..{hi}]" for lo, hi in self.bounds)
