"""
Empirical definability classifier.

A Presburger-definable set of Z^d has recurrent block complexity O(n^(d-1)) and
every section is again definable. The classifier measures stabilized R(n),
fits a growth exponent, and recurses into sampled sections. A verdict of
not-definable-evidence always carries the level that exceeded its bound.
"""
import logging
import random
import time
from typing import List, Optional, Tuple

from config import Config
from errors import DefilabError, InsufficientDataError
from models.complexity import ComplexityTable, growth_fit, stabilized_r
from models.performance_tracker import performance_tracker
from models.periodicity import tail_periods_1d
from models.schemas import DefinabilityReport, LevelReport, SectionWitness
from models.window import Window

logger = logging.getLogger(__name__)


class BudgetExhausted(Exception):
    pass


class DefinabilityClassifier:
    def __init__(self, n_min: Optional[int] = None, n_max: Optional[int] = None,
                 n_max_1d: Optional[int] = None, margin: Optional[float] = None,
                 max_residual: Optional[float] = None, min_points: Optional[int] = None,
                 max_seconds: Optional[float] = None, max_sections: Optional[int] = None,
                 oracle_range: Optional[int] = None, seed: Optional[int] = None,
                 threads: Optional[int] = None):
        self.n_min = n_min or Config.CLASSIFY_N_MIN
        self.n_max = n_max or Config.CLASSIFY_N_MAX
        self.n_max_1d = n_max_1d or Config.CLASSIFY_N_MAX_1D
        self.margin = Config.CLASSIFY_EXPONENT_MARGIN if margin is None else margin
        self.max_residual = Config.CLASSIFY_MAX_RESIDUAL if max_residual is None else max_residual
        self.min_points = min_points or Config.CLASSIFY_MIN_POINTS
        self.max_seconds = max_seconds or Config.CLASSIFY_MAX_SECONDS
        self.max_sections = max_sections or Config.CLASSIFY_MAX_SECTIONS
        self.oracle_range = Config.ORACLE_SECTION_RANGE if oracle_range is None else oracle_range
        self.seed = Config.SEED if seed is None else seed
        self.threads = threads
        self._deadline = 0.0

    # ------------------------------------------------------------------ public
    def classify(self, s, depth: Optional[int] = None, window: Optional[Window] = None) -> DefinabilityReport:
        """Verdict for ``s``; ``depth`` section levels (default d - 1), ``window`` clips the counting cubes"""
        depth = s.dim - 1 if depth is None else depth
        self._deadline = time.monotonic() + self.max_seconds
        levels: List[LevelReport] = []
        notes: List[str] = []
        heuristic = not s.is_symbolic and depth > 0 and s.dim > 1
        with performance_tracker.measure("classify_definability"):
            try:
                witness = self._visit(s, s.name, (), (), depth, window, levels)
            except BudgetExhausted:
                notes.append(f"time budget of {self.max_seconds:g} s exhausted")
                return DefinabilityReport(verdict="inconclusive", levels=levels,
                                          heuristic_sections=heuristic, notes=notes)
            except DefilabError as e:
                notes.append(f"stopped: {e}")
                return DefinabilityReport(verdict="inconclusive", levels=levels,
                                          heuristic_sections=heuristic, notes=notes)
        if heuristic:
            notes.append("oracle sections are sampled on a fixed range; the check is heuristic")
        if witness is not None:
            verdict = "not-definable-evidence"
        elif all(level.stabilized and level.within_bound for level in levels):
            verdict = "consistent-with-definable"
        else:
            verdict = "inconclusive"
        logger.info("%s: %s over %d levels", s.name, verdict, len(levels))
        return DefinabilityReport(verdict=verdict, levels=levels, witness=witness,
                                  heuristic_sections=heuristic, notes=notes)

    # ---------------------------------------------------------------- internal
    def _check_budget(self) -> None:
        if time.monotonic() > self._deadline:
            raise BudgetExhausted()

    def _level(self, s, path: str, window: Optional[Window]) -> LevelReport:
        d = s.dim
        top = self.n_max_1d if d == 1 else self.n_max
        table = ComplexityTable()
        for n in range(self.n_min, top + 1):
            self._check_budget()
            result = stabilized_r(s, n, window, threads=self.threads)
            table.add(n, result.count, result.stabilized, result.window, result.L)
        level = LevelReport(path=path, dim=d, bound=d - 1, counts=table.counts(),
                            stabilized=all(row.stabilized for row in table.rows))
        try:
            fit = growth_fit(table, min_rows=self.min_points)
        except InsufficientDataError:
            # counts cut off by the radius cap or the window are lower bounds:
            # they can show growth above the bound but never confirm it
            try:
                fit = growth_fit(table, min_rows=self.min_points, stabilized_only=False)
            except InsufficientDataError:
                logger.debug("%s: too few rows to fit", path)
                return level
            level.lower_bounds = True
        level.exponent, level.residual = fit.exponent, fit.residual
        above = fit.exponent >= (d - 1) + self.margin
        level.within_bound = False if above else (None if level.lower_bounds else True)
        if d == 1:
            level.tails = tail_periods_1d(s, max(64, 4 * top))
        return level

    def _exceeds(self, level: LevelReport) -> bool:
        return (level.exponent is not None and level.within_bound is False
                and level.residual <= self.max_residual
                and len(level.counts) >= self.min_points)

    def _visit(self, s, path: str, axes: Tuple[int, ...], values: Tuple[int, ...], depth: int,
               window: Optional[Window], levels: List[LevelReport]) -> Optional[SectionWitness]:
        level = self._level(s, path, window)
        levels.append(level)
        logger.debug("%s: counts %s exponent %s", path, level.counts, level.exponent)
        if self._exceeds(level):
            return SectionWitness(path=path, axes=list(axes), values=list(values), dim=s.dim,
                                  exponent=level.exponent, residual=level.residual,
                                  reason=f"R(n) grows like n^{level.exponent:.2f}, above the O(n^{s.dim - 1}) bound")
        if depth <= 0 or s.dim < 2:
            return None
        for axis, c in self.section_plan(s, window):
            self._check_budget()
            section = s.section(axis, c)
            clip = window.drop_axis(axis) if window is not None else None
            label = f"{path}|{s.variables[axis - 1]}={c}"
            witness = self._visit(section, label, axes + (axis,), values + (c,), depth - 1, clip, levels)
            if witness is not None:
                return witness
        return None

    def section_plan(self, s, window: Optional[Window] = None) -> List[Tuple[int, int]]:
        """(axis, constant) pairs, axes in order; sampled down to max_sections with the seed"""
        plan = []
        for axis in range(1, s.dim + 1):
            if s.is_symbolic:
                J = s.as_qfnf().modulus
                values = set(range(-2 * J, 2 * J + 1))
                if window is not None:
                    values.update(window.bounds[axis - 1])
            else:
                values = set(range(-self.oracle_range, self.oracle_range + 1))
            plan.extend((axis, c) for c in sorted(values))
        if len(plan) > self.max_sections:
            rng = random.Random(self.seed)
            plan = sorted(rng.sample(plan, self.max_sections))
        return plan


def classify_definability(s, depth: Optional[int] = None, budget: Optional[float] = None,
                          window: Optional[Window] = None, seed: Optional[int] = None,
                          threads: Optional[int] = None) -> DefinabilityReport:
    """``budget`` is a time limit in seconds"""
    classifier = DefinabilityClassifier(max_seconds=budget, seed=seed, threads=threads)
    return classifier.classify(s, depth, window)
