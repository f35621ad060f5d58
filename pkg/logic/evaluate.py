"""
Bounded-quantifier brute-force evaluation of formulas.

Quantified variables range over [-R, R]. ``witness_radii`` picks, for every
quantifier, a radius beyond which the truth of its body is periodic in the
bound variable (from the constants and modulus of the body's own normal form),
which makes the bounded check conclusive for points of a given window.
"""
import logging
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np

from errors import DimensionMismatchError
from logic.formula import (
    And, Compare, Congruence, Exists, Forall, Formula, Iff, Implies, Not, Or,
    free_vars, linearize,
)
from models.window import Window

logger = logging.getLogger(__name__)

Radii = Union[int, Mapping[str, int]]

_CHUNK_ELEMENTS = 1 << 22

_COMPARE = {
    "<": np.less, "<=": np.less_equal, "=": np.equal,
    "!=": np.not_equal, ">=": np.greater_equal, ">": np.greater,
}


def _radius(radii: Radii, name: str) -> int:
    return radii if isinstance(radii, int) else radii[name]


def _term_value(term, env: Mapping[str, int]) -> int:
    coeffs, const = linearize(term)
    return const + sum(c * env[name] for name, c in coeffs.items())


def evaluate(formula: Formula, assignment: Mapping[str, int], radii: Radii = 20) -> bool:
    """Truth of ``formula`` under ``assignment`` with quantifiers bounded by ``radii``"""
    if isinstance(formula, Compare):
        left, right = _term_value(formula.lhs, assignment), _term_value(formula.rhs, assignment)
        return bool(_COMPARE[formula.op](left, right))
    if isinstance(formula, Congruence):
        return (_term_value(formula.lhs, assignment) - formula.residue) % formula.modulus == 0
    if isinstance(formula, Not):
        return not evaluate(formula.body, assignment, radii)
    if isinstance(formula, And):
        return evaluate(formula.lhs, assignment, radii) and evaluate(formula.rhs, assignment, radii)
    if isinstance(formula, Or):
        return evaluate(formula.lhs, assignment, radii) or evaluate(formula.rhs, assignment, radii)
    if isinstance(formula, Implies):
        return (not evaluate(formula.lhs, assignment, radii)) or evaluate(formula.rhs, assignment, radii)
    if isinstance(formula, Iff):
        return evaluate(formula.lhs, assignment, radii) == evaluate(formula.rhs, assignment, radii)
    r = _radius(radii, formula.var.name)
    env = dict(assignment)
    universal = isinstance(formula, Forall)
    for value in range(-r, r + 1):
        env[formula.var.name] = value
        if evaluate(formula.body, env, radii) != universal:
            return not universal
    return universal


# ------------------------------------------------------------------- vectorized


def _bound_vars(formula: Formula, out: List[str]) -> List[str]:
    if isinstance(formula, Not):
        _bound_vars(formula.body, out)
    elif isinstance(formula, (And, Or, Implies, Iff)):
        _bound_vars(formula.lhs, out)
        _bound_vars(formula.rhs, out)
    elif isinstance(formula, (Exists, Forall)):
        out.append(formula.var.name)
        _bound_vars(formula.body, out)
    return out


class _GridEvaluator:
    def __init__(self, formula: Formula, variables: Sequence[str], window: Window, radii: Radii):
        bound = _bound_vars(formula, [])
        self.ndim = len(variables) + len(bound)
        self.axis_values: Dict[str, np.ndarray] = {}
        for k, (name, (lo, hi)) in enumerate(zip(variables, window.bounds)):
            self.axis_values[name] = self._along(np.arange(lo, hi + 1, dtype=np.int64), k)
        self.bound_axis: Dict[str, int] = {}
        for k, name in enumerate(bound, start=len(variables)):
            r = _radius(radii, name)
            self.bound_axis[name] = k
            self.axis_values[name] = self._along(np.arange(-r, r + 1, dtype=np.int64), k)

    def _along(self, values: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * self.ndim
        shape[axis] = len(values)
        return values.reshape(shape)

    def term(self, term) -> np.ndarray:
        coeffs, const = linearize(term)
        acc = np.full((1,) * self.ndim, const, dtype=np.int64)
        for name, c in coeffs.items():
            acc = acc + self.axis_values[name] * c
        return acc

    def run(self, formula: Formula) -> np.ndarray:
        if isinstance(formula, Compare):
            return _COMPARE[formula.op](self.term(formula.lhs), self.term(formula.rhs))
        if isinstance(formula, Congruence):
            return (self.term(formula.lhs) - formula.residue) % formula.modulus == 0
        if isinstance(formula, Not):
            return ~self.run(formula.body)
        if isinstance(formula, And):
            return self.run(formula.lhs) & self.run(formula.rhs)
        if isinstance(formula, Or):
            return self.run(formula.lhs) | self.run(formula.rhs)
        if isinstance(formula, Implies):
            return ~self.run(formula.lhs) | self.run(formula.rhs)
        if isinstance(formula, Iff):
            return self.run(formula.lhs) == self.run(formula.rhs)
        axis = self.bound_axis[formula.var.name]
        body = self.run(formula.body)
        if isinstance(formula, Exists):
            return body.any(axis=axis, keepdims=True)
        return body.all(axis=axis, keepdims=True)


def evaluate_window(formula: Formula, variables: Sequence[str], window: Window,
                    radii: Radii = 20) -> np.ndarray:
    """Truth of ``formula`` at every window point (bool array of the window's shape)"""
    missing = [v for v in free_vars(formula) if v not in variables]
    if missing or window.dim != len(variables):
        raise DimensionMismatchError(f"cannot evaluate over {list(variables)} with free variables {free_vars(formula)}")
    bound = _bound_vars(formula, [])
    work = window.size
    for name in bound:
        work *= 2 * _radius(radii, name) + 1
    if work > _CHUNK_ELEMENTS and window.dim and window.extents[0] > 1:
        lo, hi = window.bounds[0]
        rows = [evaluate_window(formula, variables, Window(((x, x),) + window.bounds[1:]), radii)
                for x in range(lo, hi + 1)]
        return np.concatenate(rows, axis=0)
    evaluator = _GridEvaluator(formula, variables, window, radii)
    result = evaluator.run(formula)
    if bound:
        result = result.reshape(result.shape[:len(variables)])
    return np.broadcast_to(result, window.extents).copy()


def witness_radii(formula: Formula, variables: Sequence[str], outer_radius: int) -> Dict[str, int]:
    """Per-quantifier radii that make bounded evaluation exact on [-outer_radius, outer_radius]^d"""
    from logic.qe import eliminate

    radii: Dict[str, int] = {}

    def visit(node: Formula, scope: List[str], reach: Dict[str, int]) -> None:
        if isinstance(node, (Compare, Congruence)):
            return
        if isinstance(node, Not):
            visit(node.body, scope, reach)
            return
        if isinstance(node, (And, Or, Implies, Iff)):
            visit(node.lhs, scope, reach)
            visit(node.rhs, scope, reach)
            return
        name = node.var.name
        order = scope + [name]
        body = eliminate(node.body, order)
        threshold = 0
        for cell in body.cells:
            for ineq in cell.inequalities:
                if ineq.u[-1]:
                    spread = sum(abs(a) * reach[v] for a, v in zip(ineq.u[:-1], scope))
                    threshold = max(threshold, abs(ineq.c) + spread)
        radii[name] = threshold + body.modulus + 1
        logger.debug("witness radius for %s: %d", name, radii[name])
        visit(node.body, order, {**reach, name: radii[name]})

    visit(formula, list(variables), {v: outer_radius for v in variables})
    return radii
