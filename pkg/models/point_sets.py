"""
Point sets of Z^d behind one interface.

Three backings: symbolic (a quantifier-free cell normal form), oracle (a pure
membership procedure, optionally vectorized over windows) and grid (a finite
raster with a default answer outside it). Built-in examples are registered
by name for the command line.
"""
import logging
import threading
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import DimensionMismatchError, SymbolicUnavailableError, UnknownExampleError
from logic import cells
from logic.cells import QFNF, normalize_cell, qf_evaluate, qf_evaluate_window
from logic.formula import (
    Compare, Const, Exists, Formula, Scale, Sum, Var, conjunction, disjunction, fresh_name,
)
from logic.parser import parse
from logic.qe import eliminate
from models.raster import Grid, grid_section
from models.window import Window

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]


def default_variables(dim: int) -> Tuple[str, ...]:
    if dim <= 4:
        return ("x", "y", "z", "w")[:dim]
    return tuple(f"x{k}" for k in range(1, dim + 1))


class PointSet(ABC):
    """A subset of Z^d answering membership queries"""

    def __init__(self, dim: int, name: str, variables: Optional[Sequence[str]] = None,
                 recurrence_hint: Optional[int] = None):
        self.dim = dim
        self.name = name
        self.variables = tuple(variables) if variables else default_variables(dim)
        self.recurrence_hint = recurrence_hint

    @abstractmethod
    def _contains(self, p: Point) -> bool:
        ...

    @property
    def is_symbolic(self) -> bool:
        return False

    def as_qfnf(self) -> QFNF:
        raise SymbolicUnavailableError(f"{self.name} has no symbolic description")

    def membership(self, p: Sequence[int]) -> bool:
        if len(p) != self.dim:
            raise DimensionMismatchError(f"point {tuple(p)} for a {self.dim}-dimensional set")
        return bool(self._contains(tuple(int(a) for a in p)))

    def membership_grid(self, window: Window, threads: Optional[int] = None) -> np.ndarray:
        """Membership of every window point, scanning rows of axis 1 in parallel"""
        self._check_window(window)
        threads = threads or Config.THREADS
        lo, hi = window.bounds[0]

        def row(x0: int) -> np.ndarray:
            sub = Window(((x0, x0),) + window.bounds[1:])
            return np.fromiter((self._contains(p) for p in sub.points()), dtype=bool,
                               count=sub.size).reshape(sub.extents)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(row, range(lo, hi + 1)))
        else:
            rows = [row(x0) for x0 in range(lo, hi + 1)]
        return np.concatenate(rows, axis=0)

    def section(self, axis: int, c: int) -> "PointSet":
        """M_{axis,c}: fix coordinate ``axis`` (1-based) to c"""
        self._check_axis(axis)
        return _SectionSet(self, axis, c)

    def translate(self, t: Sequence[int]) -> "PointSet":
        if len(t) != self.dim:
            raise DimensionMismatchError(f"translation {tuple(t)} for a {self.dim}-dimensional set")
        return _TranslatedSet(self, tuple(int(a) for a in t))

    def border(self, v: Sequence[int]) -> "PointSet":
        """Bd(M, v): members whose translate by v is not a member"""
        self._check_direction(v)
        return _BorderSet(self, tuple(int(a) for a in v))

    def _check_direction(self, v: Sequence[int]) -> None:
        if len(v) != self.dim or not any(v):
            raise DimensionMismatchError(f"border direction {tuple(v)} must be a nonzero {self.dim}-vector")

    def _check_window(self, window: Window) -> None:
        if window.dim != self.dim:
            raise DimensionMismatchError(f"{window.dim}-dimensional window for {self.name} (d = {self.dim})")

    def _check_axis(self, axis: int) -> None:
        if self.dim < 2 or not 1 <= axis <= self.dim:
            raise DimensionMismatchError(f"cannot take a section on axis {axis} of a {self.dim}-dimensional set")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, d={self.dim})"


class SymbolicSet(PointSet):
    def __init__(self, qfnf: QFNF, name: str = "symbolic", formula: Optional[Formula] = None,
                 recurrence_hint: Optional[int] = None):
        super().__init__(qfnf.dim, name, qfnf.variables, recurrence_hint)
        self.qfnf = qfnf
        self.formula = formula

    @property
    def is_symbolic(self) -> bool:
        return True

    def as_qfnf(self) -> QFNF:
        return self.qfnf

    def _contains(self, p: Point) -> bool:
        return qf_evaluate(self.qfnf, p)

    def membership_grid(self, window: Window, threads: Optional[int] = None) -> np.ndarray:
        self._check_window(window)
        return qf_evaluate_window(self.qfnf, window, threads)

    def section(self, axis: int, c: int) -> "SymbolicSet":
        self._check_axis(axis)
        return SymbolicSet(cells.section(self.qfnf, axis, c), f"{self.name}|{self.variables[axis - 1]}={c}")

    def translate(self, t: Sequence[int]) -> "SymbolicSet":
        return SymbolicSet(cells.translate(self.qfnf, t), f"{self.name}+{tuple(t)}")

    def border(self, v: Sequence[int]) -> "SymbolicSet":
        self._check_direction(v)
        return SymbolicSet(cells.border(self.qfnf, v), f"Bd({self.name},{tuple(v)})")


class OracleSet(PointSet):
    """Membership by a pure procedure; ``grid_fn`` evaluates a whole window at once"""

    def __init__(self, dim: int, fn: Callable[[Point], bool], name: str,
                 grid_fn: Optional[Callable[[Window], np.ndarray]] = None,
                 variables: Optional[Sequence[str]] = None, recurrence_hint: Optional[int] = None,
                 symbolic_error: Optional[str] = None):
        super().__init__(dim, name, variables, recurrence_hint)
        self.fn = fn
        self.grid_fn = grid_fn
        self.symbolic_error = symbolic_error

    def as_qfnf(self) -> QFNF:
        raise SymbolicUnavailableError(self.symbolic_error or f"{self.name} is only available as an oracle")

    def _contains(self, p: Point) -> bool:
        return self.fn(p)

    def membership_grid(self, window: Window, threads: Optional[int] = None) -> np.ndarray:
        if self.grid_fn is None:
            return super().membership_grid(window, threads)
        self._check_window(window)
        return np.broadcast_to(self.grid_fn(window), window.extents).astype(bool)


class _SectionSet(OracleSet):
    def __init__(self, parent: PointSet, axis: int, c: int):
        k = axis - 1

        def fn(p: Point) -> bool:
            return parent.membership(p[:k] + (c,) + p[k:])

        def grid_fn(window: Window) -> np.ndarray:
            lifted = Window(window.bounds[:k] + ((c, c),) + window.bounds[k:])
            return np.take(parent.membership_grid(lifted), 0, axis=k)

        name = f"{parent.name}|{parent.variables[k]}={c}"
        variables = parent.variables[:k] + parent.variables[k + 1:]
        super().__init__(parent.dim - 1, fn, name, grid_fn, variables, parent.recurrence_hint,
                         getattr(parent, "symbolic_error", None))


class _TranslatedSet(OracleSet):
    def __init__(self, parent: PointSet, t: Point):
        def fn(p: Point) -> bool:
            return parent.membership(tuple(a - s for a, s in zip(p, t)))

        def grid_fn(window: Window) -> np.ndarray:
            return parent.membership_grid(window.translate([-s for s in t]))

        super().__init__(parent.dim, fn, f"{parent.name}+{t}", grid_fn, parent.variables,
                         parent.recurrence_hint, getattr(parent, "symbolic_error", None))


class _BorderSet(OracleSet):
    def __init__(self, parent: PointSet, v: Point):
        def fn(p: Point) -> bool:
            return parent.membership(p) and not parent.membership(tuple(a + s for a, s in zip(p, v)))

        def grid_fn(window: Window) -> np.ndarray:
            return parent.membership_grid(window) & ~parent.membership_grid(window.translate(v))

        super().__init__(parent.dim, fn, f"Bd({parent.name},{v})", grid_fn, parent.variables,
                         parent.recurrence_hint, getattr(parent, "symbolic_error", None))


class GridSet(PointSet):
    """A raster, answering ``default`` outside its window"""

    def __init__(self, grid: Grid, default: bool = False, name: str = "grid"):
        super().__init__(grid.dim, name)
        self.grid = grid
        self.default = default

    def _contains(self, p: Point) -> bool:
        if self.grid.contains_point(p):
            return self.grid.get(p)
        return self.default

    def membership_grid(self, window: Window, threads: Optional[int] = None) -> np.ndarray:
        self._check_window(window)
        out = np.full(window.extents, self.default, dtype=bool)
        overlap = window.intersect(self.grid.window)
        if overlap is not None:
            target = tuple(slice(lo - w, hi - w + 1) for (lo, hi), w in zip(overlap.bounds, window.lows))
            source = tuple(slice(lo - o, hi - o + 1) for (lo, hi), o in zip(overlap.bounds, self.grid.origin))
            out[target] = self.grid.bits[source]
        return out

    def section(self, axis: int, c: int) -> PointSet:
        self._check_axis(axis)
        lo, hi = self.grid.window.bounds[axis - 1]
        if lo <= c <= hi:
            return GridSet(grid_section(self.grid, axis, c), self.default, f"{self.name}|axis{axis}={c}")
        return super().section(axis, c)

    def translate(self, t: Sequence[int]) -> "GridSet":
        moved = Grid(tuple(o + s for o, s in zip(self.grid.origin, t)), self.grid.extents, self.grid.words)
        return GridSet(moved, self.default, f"{self.name}+{tuple(t)}")


def membership(s: PointSet, p: Sequence[int]) -> bool:
    return s.membership(p)


# ---------------------------------------------------------------- semi-linear sets


@dataclass(frozen=True)
class LinearSet:
    """{base} + N.v_1 + ... + N.v_k"""
    base: Point
    generators: Tuple[Point, ...] = ()


@dataclass(frozen=True)
class SemiLinearSet:
    components: Tuple[LinearSet, ...]

    @classmethod
    def of(cls, *components: Tuple[Sequence[int], Iterable[Sequence[int]]]) -> "SemiLinearSet":
        return cls(tuple(LinearSet(tuple(b), tuple(tuple(v) for v in gens)) for b, gens in components))

    @property
    def dim(self) -> int:
        return len(self.components[0].base) if self.components else 0

    def cone_points(self, window: Window, max_steps: int) -> np.ndarray:
        """Members found by enumerating every coefficient vector in [0, max_steps]^k"""
        out = np.zeros(window.extents, dtype=bool)
        lows = np.array(window.lows, dtype=np.int64)
        highs = np.array(window.highs, dtype=np.int64)
        for comp in self.components:
            base = np.array(comp.base, dtype=np.int64)
            if not comp.generators:
                points = base[None, :]
            else:
                steps = np.arange(max_steps + 1, dtype=np.int64)
                mesh = np.stack(np.meshgrid(*([steps] * len(comp.generators)), indexing="ij"), axis=-1)
                coefficients = mesh.reshape(-1, len(comp.generators))
                points = base + coefficients @ np.array(comp.generators, dtype=np.int64)
            inside = np.all((points >= lows) & (points <= highs), axis=1)
            for point in points[inside]:
                out[tuple(point - lows)] = True
        return out


def _affine(base: int, terms: Sequence[Tuple[int, Var]]):
    result = Const(base)
    for coefficient, var in terms:
        if coefficient:
            result = Sum(result, Scale(coefficient, var))
    return result


def semilinear_to_formula(sl: SemiLinearSet, variables: Optional[Sequence[str]] = None) -> Formula:
    """One existential nonnegative coefficient per generator, one disjunct per component"""
    variables = tuple(variables) if variables else default_variables(sl.dim)
    disjuncts = []
    for comp in sl.components:
        coefficients = [Var(fresh_name("l")) for _ in comp.generators]
        equations = []
        for k, name in enumerate(variables):
            terms = [(v[k], lam) for v, lam in zip(comp.generators, coefficients)]
            equations.append(Compare(Var(name), "=", _affine(comp.base[k], terms)))
        body = conjunction([Compare(lam, ">=", Const(0)) for lam in coefficients] + equations)
        for lam in reversed(coefficients):
            body = Exists(lam, body)
        disjuncts.append(body)
    return disjunction(disjuncts)


def semilinear_set(sl: SemiLinearSet, name: str = "semilinear",
                   variables: Optional[Sequence[str]] = None) -> SymbolicSet:
    formula = semilinear_to_formula(sl, variables)
    variables = tuple(variables) if variables else default_variables(sl.dim)
    return SymbolicSet(eliminate(formula, variables), name, formula)


# -------------------------------------------------------------------- Fibonacci word


class FibonacciWord:
    """Fixed point of 0 -> 01, 1 -> 0, grown on demand"""

    def __init__(self):
        self._prefix = np.zeros(1, dtype=np.uint8)
        self._lock = threading.Lock()

    @staticmethod
    def apply_morphism(word: np.ndarray) -> np.ndarray:
        lengths = np.where(word == 0, 2, 1)
        ends = np.cumsum(lengths)
        out = np.zeros(int(ends[-1]), dtype=np.uint8)
        out[(ends - lengths)[word == 0] + 1] = 1
        return out

    def prefix(self, n: int) -> np.ndarray:
        current = self._prefix
        if len(current) >= n:
            return current[:n]
        with self._lock:
            current = self._prefix
            while len(current) < n:
                current = self.apply_morphism(current)
            current.flags.writeable = False
            self._prefix = current
        logger.debug("Fibonacci prefix grown to %d letters", len(current))
        return current[:n]

    def letter(self, i: int) -> int:
        """Two-sided word g: 1 at negative indices"""
        if i < 0:
            return 1
        return int(self.prefix(i + 1)[i])

    def letters(self, lo: int, hi: int) -> np.ndarray:
        out = np.ones(hi - lo + 1, dtype=np.uint8)
        if hi >= 0:
            start = max(lo, 0)
            out[start - lo:] = self.prefix(hi + 1)[start:]
        return out


FIBONACCI_WORD = FibonacciWord()


def fibonacci_set(d: int = 2) -> OracleSet:
    """G = {x : g at x_1 is 1}, constant along axes 2..d"""
    if d < 1:
        raise DimensionMismatchError("dimension must be positive")

    def grid_fn(window: Window) -> np.ndarray:
        lo, hi = window.bounds[0]
        column = FIBONACCI_WORD.letters(lo, hi).astype(bool)
        return column.reshape((-1,) + (1,) * (window.dim - 1))

    return OracleSet(d, lambda p: FIBONACCI_WORD.letter(p[0]) == 1, "fibonacci", grid_fn,
                     recurrence_hint=16,
                     symbolic_error="the Fibonacci set is not Presburger definable")


# ------------------------------------------------------------------------- Toeplitz

_MAX_TOEPLITZ_ROW = 61


def _toeplitz_member(p: Point) -> bool:
    i, j = p
    return i > 0 and j >= 0 and i % (1 << (j + 1)) == 0


def _toeplitz_grid(window: Window) -> np.ndarray:
    i, j = window.axes()
    rows = np.clip(j, 0, _MAX_TOEPLITZ_ROW)
    step = np.left_shift(np.int64(1), rows + 1)
    member = (i > 0) & (j >= 0) & (i % step == 0)
    # beyond row 61 only i = 0 would qualify within int64, and i = 0 never does
    return member & (j <= _MAX_TOEPLITZ_ROW)


def toeplitz_set() -> OracleSet:
    """T = {(i, j) : i, j >= 0 and i = n 2^(j+1) for some n > 0}"""
    return OracleSet(2, _toeplitz_member, "toeplitz", _toeplitz_grid, recurrence_hint=64,
                     symbolic_error="the Toeplitz set uses 2^(j+1) and has no Presburger description")


# ------------------------------------------------------------------ symbolic examples

EXAMPLE31_FORMULA = "(x >= 0) & (y >= 0) & ((E l. x = l & y = l) | (E l. x = l & y = 1))"
EXAMPLE31_STRICT_FORMULA = "(x >= 0) & (y >= 0) & (E l. x = l & y = l) & (E l. x = l & y = 1)"
EXAMPLE32_FORMULA = ("(x >= 0) & (y >= 0) & ((E l. x = l & y = l) | "
                     "(E l. E m. l >= 0 & m >= 0 & x = 4 + l + m & y = 3 + 2*m))")
INTRO_FORMULA = "x >= 0 & (x = 3 | (E y. x = 2*y) | (E y. x = 5*y + 1))"


@lru_cache(maxsize=None)
def _eliminated(text: str, variables: Tuple[str, ...]) -> QFNF:
    return eliminate(parse(text), variables)


def _from_formula(text: str, name: str, variables: Tuple[str, ...]) -> SymbolicSet:
    return SymbolicSet(_eliminated(text, variables), name, parse(text))


def example31() -> SymbolicSet:
    """Diagonal of the first quadrant together with the horizontal line y = 1"""
    return _from_formula(EXAMPLE31_FORMULA, "ex31", ("x", "y"))


def example31_strict() -> SymbolicSet:
    return _from_formula(EXAMPLE31_STRICT_FORMULA, "ex31-strict", ("x", "y"))


def example32() -> SymbolicSet:
    """Diagonal together with the odd-row cone {(4,3)} + N(1,0) + N(1,2)"""
    return _from_formula(EXAMPLE32_FORMULA, "ex32", ("x", "y"))


def example32_psi() -> SymbolicSet:
    """Hand-written quantifier-free form of example32, J = 2"""
    variables = ("x", "y")
    odd_y = [((0, 1), 1)]
    q = QFNF.build(variables, 2, [
        normalize_cell(2, [((-1, 1), 0), ((2, -1), 5)], odd_y, 2),
        normalize_cell(2, [((-1, 1), 0), ((1, -1), 0), ((1, 0), 0)], [], 2),
        normalize_cell(2, [((1, -1), 0), ((0, 1), 3)], odd_y, 2),
    ])
    return SymbolicSet(q, "ex32-psi")


def singleton_origin(d: int = 2) -> SymbolicSet:
    variables = default_variables(d)
    ineqs = []
    for k in range(d):
        unit = tuple(1 if i == k else 0 for i in range(d))
        ineqs += [(unit, 0), (tuple(-a for a in unit), 0)]
    return SymbolicSet(QFNF.build(variables, 1, [normalize_cell(d, ineqs, [], 1)]), "origin")


def checkerboard() -> SymbolicSet:
    q = QFNF.build(("x", "y"), 2, [normalize_cell(2, [], [((1, 1), 0)], 2)])
    return SymbolicSet(q, "checkerboard")


def intro_set() -> SymbolicSet:
    """{3} together with the even and the 1 mod 5 naturals"""
    return _from_formula(INTRO_FORMULA, "intro", ("x",))


EXAMPLES: Dict[str, Tuple[Callable[[], PointSet], str]] = {
    "fibonacci": (lambda: fibonacci_set(2), "Fibonacci word along x, constant along y (not definable)"),
    "toeplitz": (toeplitz_set, "(i, j) with i a positive multiple of 2^(j+1) (not definable)"),
    "ex31": (example31, "diagonal plus the line y = 1 in the first quadrant"),
    "ex31-strict": (example31_strict, "conjunctive reading of ex31: the single point (1, 1)"),
    "ex32": (example32, "diagonal plus the odd-row cone based at (4, 3)"),
    "origin": (lambda: singleton_origin(2), "the single point (0, 0)"),
    "checkerboard": (checkerboard, "x + y even"),
    "intro": (intro_set, "{3} with the even and the 1 mod 5 naturals, d = 1"),
}


def get_example(name: str) -> PointSet:
    try:
        factory, _ = EXAMPLES[name]
    except KeyError:
        raise UnknownExampleError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}") from None
    return factory()
