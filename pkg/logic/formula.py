"""
Formula AST for Presburger arithmetic over the integers with order.

Nodes are frozen dataclasses. Variables carry an internal ``name`` (unique for
bound variables after parsing) and a ``display`` name used for rendering.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple, Union

from errors import InvalidModulusError

_fresh_counter = itertools.count(1)


def fresh_name(display: str) -> str:
    """Internal name for a bound variable; '#' never appears in user identifiers"""
    return f"{display}#{next(_fresh_counter)}"


# --------------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str
    display: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.display:
            object.__setattr__(self, "display", self.name.split("#", 1)[0])


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Sum:
    lhs: "Term"
    rhs: "Term"


@dataclass(frozen=True)
class Difference:
    lhs: "Term"
    rhs: "Term"


@dataclass(frozen=True)
class Scale:
    coefficient: int
    var: Var


@dataclass(frozen=True)
class Neg:
    inner: "Term"


Term = Union[Var, Const, Sum, Difference, Scale, Neg]

# ------------------------------------------------------------------------ formulas

COMPARATORS = ("<", "<=", "=", "!=", ">=", ">")


@dataclass(frozen=True)
class Compare:
    lhs: Term
    op: str
    rhs: Term

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.op!r}")


@dataclass(frozen=True)
class Congruence:
    lhs: Term
    modulus: int
    residue: int

    def __post_init__(self):
        if self.modulus < 1:
            raise InvalidModulusError(f"modulus must be positive, got {self.modulus}", 0, 0)
        object.__setattr__(self, "residue", self.residue % self.modulus)


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Iff:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: Var
    body: "Formula"


Formula = Union[Compare, Congruence, Not, And, Or, Implies, Iff, Exists, Forall]
BINARY = (And, Or, Implies, Iff)
QUANTIFIERS = (Exists, Forall)
ATOMS = (Compare, Congruence)

FALSE = Compare(Const(0), "=", Const(1))
TRUE = Compare(Const(0), "=", Const(0))


def conjunction(parts: List[Formula]) -> Formula:
    if not parts:
        return TRUE
    result = parts[0]
    for part in parts[1:]:
        result = And(result, part)
    return result


def disjunction(parts: List[Formula]) -> Formula:
    if not parts:
        return FALSE
    result = parts[0]
    for part in parts[1:]:
        result = Or(result, part)
    return result


# --------------------------------------------------------------------- linearization


def linearize(term: Term) -> Tuple[Dict[str, int], int]:
    """Return (coefficients by variable name in first-appearance order, constant)"""
    coeffs: Dict[str, int] = {}
    constant = _linearize_into(term, 1, coeffs)
    return {name: c for name, c in coeffs.items() if c != 0}, constant


def _linearize_into(term: Term, sign: int, coeffs: Dict[str, int]) -> int:
    if isinstance(term, Const):
        return sign * term.value
    if isinstance(term, Var):
        coeffs[term.name] = coeffs.get(term.name, 0) + sign
        return 0
    if isinstance(term, Scale):
        coeffs[term.var.name] = coeffs.get(term.var.name, 0) + sign * term.coefficient
        return 0
    if isinstance(term, Neg):
        return _linearize_into(term.inner, -sign, coeffs)
    if isinstance(term, Sum):
        return _linearize_into(term.lhs, sign, coeffs) + _linearize_into(term.rhs, sign, coeffs)
    if isinstance(term, Difference):
        return _linearize_into(term.lhs, sign, coeffs) + _linearize_into(term.rhs, -sign, coeffs)
    raise TypeError(f"not a term: {term!r}")


def term_vars(term: Term) -> Iterator[Var]:
    if isinstance(term, Var):
        yield term
    elif isinstance(term, Scale):
        yield term.var
    elif isinstance(term, Neg):
        yield from term_vars(term.inner)
    elif isinstance(term, (Sum, Difference)):
        yield from term_vars(term.lhs)
        yield from term_vars(term.rhs)


# ------------------------------------------------------------------ free variables


def free_vars(formula: Formula) -> List[str]:
    """Free variables in first-appearance order"""
    seen: Dict[str, None] = {}
    _collect_free(formula, frozenset(), seen)
    return list(seen)


def _collect_free(formula: Formula, bound: frozenset, seen: Dict[str, None]) -> None:
    if isinstance(formula, Compare):
        for term in (formula.lhs, formula.rhs):
            for var in term_vars(term):
                if var.name not in bound:
                    seen.setdefault(var.name)
    elif isinstance(formula, Congruence):
        for var in term_vars(formula.lhs):
            if var.name not in bound:
                seen.setdefault(var.name)
    elif isinstance(formula, Not):
        _collect_free(formula.body, bound, seen)
    elif isinstance(formula, BINARY):
        _collect_free(formula.lhs, bound, seen)
        _collect_free(formula.rhs, bound, seen)
    elif isinstance(formula, QUANTIFIERS):
        _collect_free(formula.body, bound | {formula.var.name}, seen)
    else:
        raise TypeError(f"not a formula: {formula!r}")


def quantifier_depth(formula: Formula) -> int:
    if isinstance(formula, ATOMS):
        return 0
    if isinstance(formula, Not):
        return quantifier_depth(formula.body)
    if isinstance(formula, BINARY):
        return max(quantifier_depth(formula.lhs), quantifier_depth(formula.rhs))
    return 1 + quantifier_depth(formula.body)


# --------------------------------------------------------------------- substitution


def _substitute_term(term: Term, name: str, value: int) -> Term:
    if isinstance(term, Var):
        return Const(value) if term.name == name else term
    if isinstance(term, Scale):
        return Const(term.coefficient * value) if term.var.name == name else term
    if isinstance(term, Neg):
        return Neg(_substitute_term(term.inner, name, value))
    if isinstance(term, Sum):
        return Sum(_substitute_term(term.lhs, name, value), _substitute_term(term.rhs, name, value))
    if isinstance(term, Difference):
        return Difference(_substitute_term(term.lhs, name, value), _substitute_term(term.rhs, name, value))
    return term


def substitute(formula: Formula, var: str, value: int) -> Formula:
    """Replace free occurrences of ``var`` with the constant ``value``"""
    if isinstance(formula, Compare):
        return Compare(_substitute_term(formula.lhs, var, value), formula.op,
                       _substitute_term(formula.rhs, var, value))
    if isinstance(formula, Congruence):
        return Congruence(_substitute_term(formula.lhs, var, value), formula.modulus, formula.residue)
    if isinstance(formula, Not):
        return Not(substitute(formula.body, var, value))
    if isinstance(formula, BINARY):
        return type(formula)(substitute(formula.lhs, var, value), substitute(formula.rhs, var, value))
    if isinstance(formula, QUANTIFIERS):
        if formula.var.name == var:
            return formula
        return type(formula)(formula.var, substitute(formula.body, var, value))
    raise TypeError(f"not a formula: {formula!r}")


# ---------------------------------------------------------------- alpha-equivalence


def canonical(formula: Formula) -> Formula:
    """Rename bound variables to _0, _1, ... in binding order"""
    counter = itertools.count()
    return _canonical(formula, {}, counter)


def _canonical_term(term: Term, env: Dict[str, str]) -> Term:
    if isinstance(term, Var):
        name = env.get(term.name, term.name)
        return Var(name, name)
    if isinstance(term, Scale):
        name = env.get(term.var.name, term.var.name)
        return Scale(term.coefficient, Var(name, name))
    if isinstance(term, Neg):
        return Neg(_canonical_term(term.inner, env))
    if isinstance(term, (Sum, Difference)):
        return type(term)(_canonical_term(term.lhs, env), _canonical_term(term.rhs, env))
    return term


def _canonical(formula: Formula, env: Dict[str, str], counter) -> Formula:
    if isinstance(formula, Compare):
        return Compare(_canonical_term(formula.lhs, env), formula.op, _canonical_term(formula.rhs, env))
    if isinstance(formula, Congruence):
        return Congruence(_canonical_term(formula.lhs, env), formula.modulus, formula.residue)
    if isinstance(formula, Not):
        return Not(_canonical(formula.body, env, counter))
    if isinstance(formula, BINARY):
        return type(formula)(_canonical(formula.lhs, env, counter), _canonical(formula.rhs, env, counter))
    new = f"_{next(counter)}"
    inner = dict(env)
    inner[formula.var.name] = new
    return type(formula)(Var(new, new), _canonical(formula.body, inner, counter))


def alpha_equivalent(a: Formula, b: Formula) -> bool:
    return canonical(a) == canonical(b)


# ------------------------------------------------------------------------ rendering

_BINARY_SYMBOL = {And: "&", Or: "|", Implies: "->", Iff: "<->"}


def render_term(term: Term, env: Dict[str, str] = None) -> str:
    env = env or {}
    if isinstance(term, Const):
        return str(term.value)
    if isinstance(term, Var):
        return env.get(term.name, term.display)
    if isinstance(term, Scale):
        return f"{term.coefficient}*{env.get(term.var.name, term.var.display)}"
    if isinstance(term, Neg):
        inner = render_term(term.inner, env)
        return "-" + inner if isinstance(term.inner, (Var, Neg)) else f"-({inner})"
    if isinstance(term, (Sum, Difference)):
        symbol = "+" if isinstance(term, Sum) else "-"
        rhs = render_term(term.rhs, env)
        # terms associate to the left, so a compound right operand needs parentheses
        if isinstance(term.rhs, (Sum, Difference)):
            rhs = f"({rhs})"
        return f"{render_term(term.lhs, env)} {symbol} {rhs}"
    raise TypeError(f"not a term: {term!r}")


def render(formula: Formula) -> str:
    """Canonical text: connective operands and quantifier bodies are parenthesized"""
    names = {name: name for name in free_vars(formula)}
    return _render(formula, names, set(names))


def _render(formula: Formula, env: Dict[str, str], taken: set) -> str:
    if isinstance(formula, Compare):
        return f"{render_term(formula.lhs, env)} {formula.op} {render_term(formula.rhs, env)}"
    if isinstance(formula, Congruence):
        return f"{render_term(formula.lhs, env)} % {formula.modulus} = {formula.residue}"
    if isinstance(formula, Not):
        return f"!({_render(formula.body, env, taken)})"
    if isinstance(formula, BINARY):
        symbol = _BINARY_SYMBOL[type(formula)]
        return f"({_render(formula.lhs, env, taken)}) {symbol} ({_render(formula.rhs, env, taken)})"
    display = formula.var.display
    # a binder shadowing a visible name gets a suffix so the text reparses to the same tree
    candidate, k = display, 1
    while candidate in taken:
        candidate = f"{display}_{k}"
        k += 1
    inner = dict(env)
    inner[formula.var.name] = candidate
    letter = "E" if isinstance(formula, Exists) else "A"
    return f"{letter} {candidate}. ({_render(formula.body, inner, taken | {candidate})})"
