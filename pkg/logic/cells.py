"""
Cell normal form: a finite disjunction of cells, each a conjunction of linear
inequalities u.x >= c and congruences u.x = e (mod J) sharing one modulus J.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import DimensionMismatchError, ResourceLimitExceeded
from logic.linear import (
    Dvd, Ge, Lin, Literal, Node, lcm, mk_and, mk_dvd, mk_ge, mk_or, negate, to_dnf,
)
from models.window import Window

logger = logging.getLogger(__name__)

_FM_ROW_LIMIT = 400
_INT64_SAFE = 2**62


@dataclass(frozen=True, order=True)
class Inequality:
    u: Tuple[int, ...]
    c: int

    def holds(self, p: Sequence[int]) -> bool:
        return sum(a * x for a, x in zip(self.u, p)) >= self.c


@dataclass(frozen=True, order=True)
class ModularConstraint:
    u: Tuple[int, ...]
    e: int

    def holds(self, p: Sequence[int], modulus: int) -> bool:
        return (sum(a * x for a, x in zip(self.u, p)) - self.e) % modulus == 0


@dataclass(frozen=True, order=True)
class Cell:
    dim: int
    inequalities: Tuple[Inequality, ...] = ()
    congruences: Tuple[ModularConstraint, ...] = ()

    def holds(self, p: Sequence[int], modulus: int) -> bool:
        return all(i.holds(p) for i in self.inequalities) and all(
            m.holds(p, modulus) for m in self.congruences)

    @property
    def is_unconstrained(self) -> bool:
        return not self.inequalities and not self.congruences


# ---------------------------------------------------------------- normalization


def rationally_feasible(rows: Iterable[Tuple[Tuple[int, ...], int]], dim: int) -> bool:
    """Fourier-Motzkin over the rationals; gives up (True) when rows explode"""
    current = set(rows)
    for k in range(dim):
        pos = [r for r in current if r[0][k] > 0]
        neg = [r for r in current if r[0][k] < 0]
        nxt = {r for r in current if r[0][k] == 0}
        for pu, pc in pos:
            for nu, nc in neg:
                a, b = pu[k], -nu[k]
                u = tuple(b * x + a * y for x, y in zip(pu, nu))
                c = b * pc + a * nc
                g = 0
                for x in u:
                    g = gcd(g, x)
                g = gcd(g, c)
                if g > 1:
                    u = tuple(x // g for x in u)
                    c //= g
                if not any(u):
                    if c > 0:
                        return False
                    continue
                nxt.add((u, c))
        if len(nxt) > _FM_ROW_LIMIT:
            return True
        current = nxt
    return all(c <= 0 for u, c in current if not any(u))


def normalize_cell(dim: int, inequalities: Iterable[Tuple[Sequence[int], int]],
                   congruences: Iterable[Tuple[Sequence[int], int]], modulus: int) -> Optional[Cell]:
    """Canonical cell, or None when the cell is trivially or rationally infeasible"""
    tightest: Dict[Tuple[int, ...], int] = {}
    for u, c in inequalities:
        u = tuple(u)
        g = 0
        for x in u:
            g = gcd(g, x)
        if g == 0:
            if c > 0:
                return None
            continue
        u = tuple(x // g for x in u)
        c = -((-c) // g)
        if u not in tightest or c > tightest[u]:
            tightest[u] = c
    for u, c in tightest.items():
        mirror = tuple(-x for x in u)
        if mirror in tightest and c > -tightest[mirror]:
            return None
    mods = set()
    for u, e in congruences:
        u = tuple(x % modulus for x in u)
        e %= modulus
        if not any(u):
            if e:
                return None
            continue
        mods.add(ModularConstraint(u, e))
    if tightest and not rationally_feasible(tightest.items(), dim):
        return None
    ineqs = tuple(sorted(Inequality(u, c) for u, c in tightest.items()))
    return Cell(dim, ineqs, tuple(sorted(mods)))


# ------------------------------------------------------------------------- QFNF


@dataclass(frozen=True)
class QFNF:
    variables: Tuple[str, ...]
    modulus: int
    cells: Tuple[Cell, ...]

    @property
    def dim(self) -> int:
        return len(self.variables)

    # ------------------------------------------------------------ constructors
    @classmethod
    def build(cls, variables: Sequence[str], modulus: int, cells: Iterable[Optional[Cell]]) -> "QFNF":
        unique = sorted({c for c in cells if c is not None})
        # an unconstrained cell absorbs every other cell
        if any(c.is_unconstrained for c in unique):
            unique = [Cell(len(variables))]
        return cls(tuple(variables), modulus, tuple(unique))

    @classmethod
    def everything(cls, variables: Sequence[str]) -> "QFNF":
        return cls(tuple(variables), 1, (Cell(len(variables)),))

    @classmethod
    def nothing(cls, variables: Sequence[str]) -> "QFNF":
        return cls(tuple(variables), 1, ())

    @classmethod
    def from_conjuncts(cls, conjuncts: Sequence[Sequence[Literal]], variables: Sequence[str],
                       max_bits: Optional[int] = None, source: Optional[str] = None) -> "QFNF":
        variables = tuple(variables)
        index = {v: i for i, v in enumerate(variables)}
        modulus = 1
        for conjunct in conjuncts:
            for lit in conjunct:
                if isinstance(lit, Dvd):
                    modulus = lcm(modulus, lit.modulus)
        bits = 0
        cells = []
        for conjunct in conjuncts:
            ineqs, mods = [], []
            for lit in conjunct:
                u = [0] * len(variables)
                for name, c in lit.lin.coeffs:
                    if name not in index:
                        raise DimensionMismatchError(f"variable {name} is not in {list(variables)}")
                    u[index[name]] = c
                if isinstance(lit, Ge):
                    ineqs.append((u, -lit.lin.const))
                else:
                    scale = modulus // lit.modulus
                    mods.append(([a * scale for a in u], (-lit.lin.const * scale) % modulus))
                bits += lit.lin.bits()
            cells.append(normalize_cell(len(variables), ineqs, mods, modulus))
        max_bits = max_bits or Config.QE_MAX_BITS
        if bits > max_bits:
            raise ResourceLimitExceeded(f"normal form exceeds the {max_bits}-bit coefficient budget", source)
        return cls.build(variables, modulus, cells)

    @classmethod
    def from_node(cls, node: Node, variables: Sequence[str], max_cells: Optional[int] = None,
                  max_bits: Optional[int] = None, source: Optional[str] = None) -> "QFNF":
        max_cells = max_cells or Config.QE_MAX_CELLS
        max_bits = max_bits or Config.QE_MAX_BITS

        def on_limit(message):
            raise ResourceLimitExceeded(message, source)

        conjuncts = to_dnf(node, max_cells, max_bits, on_limit)
        result = cls.from_conjuncts(conjuncts, variables, max_bits, source)
        logger.debug("normal form: %d conjuncts -> %d cells, J=%d", len(conjuncts), len(result.cells), result.modulus)
        return result

    # ----------------------------------------------------------------- node view
    def to_node(self) -> Node:
        names = self.variables

        def lin(u, const):
            return Lin.of({v: a for v, a in zip(names, u)}, const)

        return mk_or(
            mk_and([mk_ge(lin(i.u, -i.c)) for i in cell.inequalities]
                   + [mk_dvd(self.modulus, lin(m.u, -m.e)) for m in cell.congruences])
            for cell in self.cells
        )

    # ---------------------------------------------------------------- printing
    def to_text(self) -> str:
        lines = [f"dim={self.dim} vars={','.join(self.variables)} J={self.modulus}"]
        for cell in self.cells:
            parts = [f"{_linear_text(i.u, self.variables)}>={i.c}" for i in cell.inequalities]
            parts += [f"{_linear_text(m.u, self.variables)}={m.e} (mod {self.modulus})" for m in cell.congruences]
            lines.append("cell: " + (" ; ".join(parts) if parts else "true"))
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.to_text()


def qfnf_text(q: QFNF) -> str:
    return q.to_text()


def _linear_text(u: Sequence[int], names: Sequence[str]) -> str:
    out = []
    for k, (a, name) in enumerate(zip(u, names)):
        if k == 0:
            out.append(f"{a}{name}")
        else:
            out.append(f"{'+' if a >= 0 else '-'}{abs(a)}{name}")
    return "".join(out)


# ------------------------------------------------------------------- evaluation


def qf_evaluate(q: QFNF, p: Sequence[int]) -> bool:
    if len(p) != q.dim:
        raise DimensionMismatchError(f"point of dimension {len(p)} for a {q.dim}-dimensional set")
    return any(cell.holds(p, q.modulus) for cell in q.cells)


def _needs_objects(q: QFNF, window: Window) -> bool:
    reach = max((max(abs(lo), abs(hi)) for lo, hi in window.bounds), default=0)
    worst = 0
    for cell in q.cells:
        for row, const in [(i.u, i.c) for i in cell.inequalities] + [(m.u, m.e) for m in cell.congruences]:
            worst = max(worst, sum(abs(a) for a in row) * reach + abs(const))
    return worst >= _INT64_SAFE or q.modulus >= _INT64_SAFE


def _cell_mask(cell: Cell, axes: List[np.ndarray], modulus: int, shape, dtype) -> np.ndarray:
    mask = np.ones(shape, dtype=bool)

    def dot(u):
        acc = np.zeros((1,) * len(shape), dtype=dtype)
        for a, axis in zip(u, axes):
            if a:
                acc = acc + axis * a
        return acc

    for ineq in cell.inequalities:
        mask &= np.asarray(dot(ineq.u) >= ineq.c, dtype=bool)
    for mod in cell.congruences:
        mask &= np.asarray((dot(mod.u) - mod.e) % modulus == 0, dtype=bool)
    return mask


def qf_evaluate_window(q: QFNF, window: Window, threads: Optional[int] = None) -> np.ndarray:
    """Membership of every window point as a bool array of the window's shape"""
    if window.dim != q.dim:
        raise DimensionMismatchError(f"{window.dim}-dimensional window for a {q.dim}-dimensional set")
    shape = window.extents
    if q.dim == 0:
        return np.array(bool(q.cells))
    dtype = object if _needs_objects(q, window) else np.int64
    axes = [a.astype(dtype) for a in window.axes()]
    result = np.zeros(shape, dtype=bool)
    threads = threads or Config.THREADS
    if threads > 1 and len(q.cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            masks = list(pool.map(lambda c: _cell_mask(c, axes, q.modulus, shape, dtype), q.cells))
    else:
        masks = (_cell_mask(c, axes, q.modulus, shape, dtype) for c in q.cells)
    for mask in masks:
        result |= mask
    return result


# ---------------------------------------------------------------------- algebra


def _same_space(q1: QFNF, q2: QFNF) -> None:
    if q1.variables != q2.variables:
        raise DimensionMismatchError(f"variable orders differ: {q1.variables} vs {q2.variables}")


def _rescaled(q: QFNF, modulus: int) -> List[Tuple[Cell, List, List]]:
    factor = modulus // q.modulus
    out = []
    for cell in q.cells:
        ineqs = [(i.u, i.c) for i in cell.inequalities]
        mods = [(tuple(a * factor for a in m.u), m.e * factor) for m in cell.congruences]
        out.append((cell, ineqs, mods))
    return out


def union(q1: QFNF, q2: QFNF) -> QFNF:
    _same_space(q1, q2)
    modulus = lcm(q1.modulus, q2.modulus)
    cells = [normalize_cell(q1.dim, ineqs, mods, modulus)
             for q in (q1, q2) for _, ineqs, mods in _rescaled(q, modulus)]
    return QFNF.build(q1.variables, modulus, cells)


def intersect(q1: QFNF, q2: QFNF, max_cells: Optional[int] = None) -> QFNF:
    _same_space(q1, q2)
    max_cells = max_cells or Config.QE_MAX_CELLS
    if len(q1.cells) * len(q2.cells) > max_cells:
        raise ResourceLimitExceeded(f"intersection needs {len(q1.cells) * len(q2.cells)} cells (cap {max_cells})")
    modulus = lcm(q1.modulus, q2.modulus)
    left, right = _rescaled(q1, modulus), _rescaled(q2, modulus)
    cells = [normalize_cell(q1.dim, i1 + i2, m1 + m2, modulus)
             for _, i1, m1 in left for _, i2, m2 in right]
    return QFNF.build(q1.variables, modulus, cells)


def complement(q: QFNF, max_cells: Optional[int] = None, max_bits: Optional[int] = None) -> QFNF:
    return QFNF.from_node(negate(q.to_node()), q.variables, max_cells, max_bits, source="complement")


def translate(q: QFNF, t: Sequence[int]) -> QFNF:
    """The set q + t"""
    if len(t) != q.dim:
        raise DimensionMismatchError(f"translation vector of length {len(t)} for dimension {q.dim}")
    cells = []
    for cell in q.cells:
        ineqs = [(i.u, i.c + sum(a * s for a, s in zip(i.u, t))) for i in cell.inequalities]
        mods = [(m.u, m.e + sum(a * s for a, s in zip(m.u, t))) for m in cell.congruences]
        cells.append(normalize_cell(q.dim, ineqs, mods, q.modulus))
    return QFNF.build(q.variables, q.modulus, cells)


def section(q: QFNF, axis: int, c: int) -> QFNF:
    """Fix coordinate ``axis`` (1-based) to ``c``"""
    if not 1 <= axis <= q.dim:
        raise DimensionMismatchError(f"axis {axis} outside 1..{q.dim}")
    k = axis - 1
    variables = q.variables[:k] + q.variables[k + 1:]
    cells = []
    for cell in q.cells:
        ineqs = [(i.u[:k] + i.u[k + 1:], i.c - i.u[k] * c) for i in cell.inequalities]
        mods = [(m.u[:k] + m.u[k + 1:], m.e - m.u[k] * c) for m in cell.congruences]
        cells.append(normalize_cell(q.dim - 1, ineqs, mods, q.modulus))
    return QFNF.build(variables, q.modulus, cells)


def border(q: QFNF, v: Sequence[int], max_cells: Optional[int] = None) -> QFNF:
    """Bd(q, v) = points of q whose translate by v leaves q"""
    if not any(v):
        raise ValueError("border direction must be nonzero")
    return intersect(q, translate(complement(q, max_cells), [-a for a in v]), max_cells)


@dataclass(frozen=True)
class WindowComparison:
    equivalent: bool
    counterexample: Optional[Tuple[int, ...]] = None


def equivalent_on_window(q1: QFNF, q2: QFNF, window: Window) -> WindowComparison:
    """Exhaustive comparison; the reported counterexample has the smallest sup-norm, then lexicographic"""
    if q1.dim != q2.dim:
        raise DimensionMismatchError(f"dimensions differ: {q1.dim} vs {q2.dim}")
    diff = qf_evaluate_window(q1, window) != qf_evaluate_window(q2, window)
    if not diff.any():
        return WindowComparison(True)
    points = np.argwhere(diff) + np.array(window.lows, dtype=np.int64)
    norms = np.abs(points).max(axis=1)
    order = np.lexsort(tuple(points[:, k] for k in reversed(range(points.shape[1]))) + (norms,))
    return WindowComparison(False, tuple(int(x) for x in points[order[0]]))
