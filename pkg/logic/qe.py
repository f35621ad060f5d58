"""
Quantifier elimination for Presburger arithmetic.

Formulas are converted to negation normal form over ``Ge`` / ``Dvd`` literals
and quantifiers are removed innermost first with Cooper's method; a universal
quantifier is eliminated as the negation of an existential one. The result is
distributed into the cell normal form of ``logic.cells.QFNF``.
"""
import logging
from typing import Iterable, List, Optional, Sequence

from config import Config
from errors import DimensionMismatchError, ResourceLimitExceeded
from logic.cells import QFNF
from logic.formula import (
    And, Compare, Congruence, Exists, Forall, Formula, Iff, Implies, Not, Or,
    free_vars, linearize, render,
)
from logic.linear import (
    FALSE, TRUE, Dvd, Ge, Lin, Node, Conj, Disj, lcm, literals, map_literals,
    mentions, mk_and, mk_dvd, mk_ge, mk_or, negate, node_bits, node_size,
)
from models.performance_tracker import performance_tracker

logger = logging.getLogger(__name__)


def term_to_lin(term) -> Lin:
    coeffs, const = linearize(term)
    return Lin.of(coeffs, const)


def atom_to_node(atom: Formula, positive: bool = True) -> Node:
    """Rewrite a comparison or congruence atom as >= / divisibility literals"""
    if isinstance(atom, Congruence):
        node = mk_dvd(atom.modulus, term_to_lin(atom.lhs).shift(-atom.residue))
        return node if positive else negate(node)
    diff = term_to_lin(atom.lhs) - term_to_lin(atom.rhs)
    op = atom.op
    if not positive:
        op = {"<": ">=", "<=": ">", "=": "!=", "!=": "=", ">=": "<", ">": "<="}[op]
    if op == ">=":
        return mk_ge(diff)
    if op == ">":
        return mk_ge(diff.shift(-1))
    if op == "<=":
        return mk_ge(-diff)
    if op == "<":
        return mk_ge((-diff).shift(-1))
    if op == "=":
        return mk_and([mk_ge(diff), mk_ge(-diff)])
    return mk_or([mk_ge(diff.shift(-1)), mk_ge((-diff).shift(-1))])


def _with_coefficient(lin: Lin, var: str, value: int) -> Lin:
    coeffs = lin.as_dict()
    coeffs[var] = value
    return Lin.of(coeffs, lin.const)


def substitute_node(node: Node, var: str, value: Lin) -> Node:
    def replace(lit):
        if not lit.lin.coeff(var):
            return lit
        lin = lit.lin.substitute(var, value)
        return mk_ge(lin) if isinstance(lit, Ge) else mk_dvd(lit.modulus, lin)
    return map_literals(node, replace)


class QuantifierEliminator:
    """Cooper elimination with cell / bit caps"""

    def __init__(self, max_cells: Optional[int] = None, max_bits: Optional[int] = None):
        self.max_cells = max_cells or Config.QE_MAX_CELLS
        self.max_bits = max_bits or Config.QE_MAX_BITS
        self.max_literals = self.max_cells * 64

    # ------------------------------------------------------------- formula walk
    def to_node(self, formula: Formula, positive: bool = True) -> Node:
        if isinstance(formula, (Compare, Congruence)):
            return atom_to_node(formula, positive)
        if isinstance(formula, Not):
            return self.to_node(formula.body, not positive)
        if isinstance(formula, And):
            parts = [self.to_node(formula.lhs, positive), self.to_node(formula.rhs, positive)]
            return mk_and(parts) if positive else mk_or(parts)
        if isinstance(formula, Or):
            parts = [self.to_node(formula.lhs, positive), self.to_node(formula.rhs, positive)]
            return mk_or(parts) if positive else mk_and(parts)
        if isinstance(formula, Implies):
            if positive:
                return mk_or([self.to_node(formula.lhs, False), self.to_node(formula.rhs, True)])
            return mk_and([self.to_node(formula.lhs, True), self.to_node(formula.rhs, False)])
        if isinstance(formula, Iff):
            a, b = self.to_node(formula.lhs, True), self.to_node(formula.rhs, True)
            na, nb = self.to_node(formula.lhs, False), self.to_node(formula.rhs, False)
            if positive:
                return mk_or([mk_and([a, b]), mk_and([na, nb])])
            return mk_or([mk_and([a, nb]), mk_and([na, b])])
        if isinstance(formula, Exists):
            eliminated = self.exists(formula.var.name, self.to_node(formula.body, True), formula)
            return eliminated if positive else negate(eliminated)
        if isinstance(formula, Forall):
            # A v. body  ==  not E v. not body
            eliminated = self.exists(formula.var.name, self.to_node(formula.body, False), formula)
            return negate(eliminated) if positive else eliminated
        raise TypeError(f"not a formula: {formula!r}")

    # -------------------------------------------------------------- elimination
    def exists(self, var: str, node: Node, source: Formula = None) -> Node:
        if not mentions(node, var):
            return node
        if isinstance(node, Disj):
            return mk_or(self.exists(var, item, source) for item in node.items)
        shortcut = self._unit_equality(var, node)
        if shortcut is not None:
            performance_tracker.increment("qe_unit_equalities")
            result = shortcut
        else:
            result = self._cooper(var, node, source)
        self._check(result, source)
        return result

    def _unit_equality(self, var: str, node: Node) -> Optional[Node]:
        """E x. (x = t & rest)  ==  rest[t/x] when x has coefficient +-1"""
        if not isinstance(node, Conj):
            return None
        ge = {item.lin for item in node.items if isinstance(item, Ge)}
        for lin in ge:
            a = lin.coeff(var)
            if abs(a) == 1 and -lin in ge:
                rest = Lin(tuple((v, c) for v, c in lin.coeffs if v != var), lin.const)
                return substitute_node(node, var, rest.scale(-a))
        return None

    def _cooper(self, var: str, node: Node, source: Formula) -> Node:
        delta = 1
        for lit in literals(node):
            a = lit.lin.coeff(var)
            if a:
                delta = lcm(delta, abs(a))

        def unitize(lit):
            a = lit.lin.coeff(var)
            if not a:
                return lit
            k = delta // abs(a)
            lin = _with_coefficient(lit.lin.scale(k), var, 1 if a > 0 else -1)
            if isinstance(lit, Ge):
                return Ge(lin)
            return Dvd(lit.modulus * k, lin)

        # var now stands for delta * var
        unit = map_literals(node, unitize)
        if delta > 1:
            unit = mk_and([unit, Dvd(delta, Lin(((var, 1),), 0))])

        lower: List[Lin] = []
        upper: List[Lin] = []
        period = 1
        for lit in literals(unit):
            a = lit.lin.coeff(var)
            if not a:
                continue
            rest = Lin(tuple((v, c) for v, c in lit.lin.coeffs if v != var), lit.lin.const)
            if isinstance(lit, Dvd):
                period = lcm(period, lit.modulus)
            elif a > 0:
                lower.append(-rest)      # var >= -rest
            else:
                upper.append(rest)       # var <= rest
        lower = list(dict.fromkeys(lower))
        upper = list(dict.fromkeys(upper))
        use_lower = len(lower) <= len(upper)
        bounds = lower if use_lower else upper

        expansion = period * (len(bounds) + 1)
        if expansion > self.max_cells:
            raise ResourceLimitExceeded(
                f"elimination of {var.split('#')[0]} needs {expansion} disjuncts (cap {self.max_cells})",
                render(source) if source is not None else None,
            )

        def at_infinity(lit):
            a = lit.lin.coeff(var)
            if not a or isinstance(lit, Dvd):
                return lit
            is_lower = a > 0
            # lower bounds vanish at -infinity, upper bounds at +infinity
            return FALSE if is_lower == use_lower else TRUE

        infinite = map_literals(unit, at_infinity)
        disjuncts: List[Node] = []
        if infinite is not FALSE:
            for j in range(1, period + 1):
                disjuncts.append(substitute_node(infinite, var, Lin((), j)))
        for bound in bounds:
            for j in range(period):
                disjuncts.append(substitute_node(unit, var, bound.shift(j if use_lower else -j)))
        logger.debug("eliminated %s: delta=%d period=%d bounds=%d", var, delta, period, len(bounds))
        return mk_or(disjuncts)

    def _check(self, node: Node, source: Formula) -> None:
        if node_size(node) > self.max_literals:
            raise ResourceLimitExceeded(
                f"intermediate formula exceeds {self.max_literals} literals",
                render(source) if source is not None else None,
            )
        if node_bits(node) > self.max_bits:
            raise ResourceLimitExceeded(
                f"intermediate formula exceeds the {self.max_bits}-bit coefficient budget",
                render(source) if source is not None else None,
            )


def eliminate(formula: Formula, var_order: Sequence[str],
              max_cells: Optional[int] = None, max_bits: Optional[int] = None) -> QFNF:
    """Quantifier-free cell normal form of ``formula`` over ``var_order``"""
    var_order = tuple(var_order)
    missing = [v for v in free_vars(formula) if v not in var_order]
    if missing:
        raise DimensionMismatchError(f"free variables {missing} are not in the variable order {list(var_order)}")
    eliminator = QuantifierEliminator(max_cells, max_bits)
    with performance_tracker.measure("eliminate"):
        node = eliminator.to_node(formula)
        return QFNF.from_node(node, var_order, eliminator.max_cells, eliminator.max_bits, source=render(formula))


def eliminate_all(formulas: Iterable[Formula], var_order: Sequence[str], **caps) -> List[QFNF]:
    return [eliminate(formula, var_order, **caps) for formula in formulas]
