"""
Internal quantifier-free representation used during elimination.

Every atom is normalized to one of two literal shapes over integer variables:

    Ge(lin)        lin >= 0
    Dvd(m, lin)    m divides lin

Boolean structure is negation normal form built from Conj / Disj nodes and
the TRUE / FALSE constants. Constructors simplify constants and flatten.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Dict, Iterable, List, Mapping, Tuple, Union


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b if a and b else max(a, b)


@dataclass(frozen=True, order=True)
class Lin:
    """sum(c * v for v, c in coeffs) + const, coefficients sorted by name and nonzero"""
    coeffs: Tuple[Tuple[str, int], ...]
    const: int

    @staticmethod
    def of(coeffs: Mapping[str, int], const: int = 0) -> "Lin":
        return Lin(tuple(sorted((v, c) for v, c in coeffs.items() if c)), const)

    def coeff(self, var: str) -> int:
        for name, c in self.coeffs:
            if name == var:
                return c
        return 0

    def as_dict(self) -> Dict[str, int]:
        return dict(self.coeffs)

    def variables(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.coeffs)

    def __add__(self, other: "Lin") -> "Lin":
        merged = self.as_dict()
        for name, c in other.coeffs:
            merged[name] = merged.get(name, 0) + c
        return Lin.of(merged, self.const + other.const)

    def __neg__(self) -> "Lin":
        return Lin(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other: "Lin") -> "Lin":
        return self + (-other)

    def scale(self, k: int) -> "Lin":
        if k == 0:
            return Lin((), 0)
        return Lin(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def shift(self, k: int) -> "Lin":
        return Lin(self.coeffs, self.const + k)

    def substitute(self, var: str, value: "Lin") -> "Lin":
        a = self.coeff(var)
        if a == 0:
            return self
        rest = Lin(tuple((v, c) for v, c in self.coeffs if v != var), self.const)
        return rest + value.scale(a)

    def evaluate(self, env: Mapping[str, int]) -> int:
        return sum(c * env[v] for v, c in self.coeffs) + self.const

    def bits(self) -> int:
        return sum(abs(c).bit_length() for _, c in self.coeffs) + abs(self.const).bit_length()


class _Constant:
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = _Constant(True)
FALSE = _Constant(False)


@dataclass(frozen=True, order=True)
class Ge:
    lin: Lin


@dataclass(frozen=True, order=True)
class Dvd:
    modulus: int
    lin: Lin


@dataclass(frozen=True)
class Conj:
    items: Tuple["Node", ...]


@dataclass(frozen=True)
class Disj:
    items: Tuple["Node", ...]


Literal = Union[Ge, Dvd]
Node = Union[Ge, Dvd, Conj, Disj, _Constant]


def mk_ge(lin: Lin) -> Node:
    """lin >= 0, coefficients divided by their gcd and the constant floored"""
    if not lin.coeffs:
        return TRUE if lin.const >= 0 else FALSE
    g = 0
    for _, c in lin.coeffs:
        g = gcd(g, c)
    if g > 1:
        lin = Lin(tuple((v, c // g) for v, c in lin.coeffs), lin.const // g)
    return Ge(lin)


def mk_dvd(modulus: int, lin: Lin) -> Node:
    """modulus | lin, coefficients and constant reduced into [0, modulus)"""
    modulus = abs(modulus)
    if modulus == 0:
        raise ValueError("divisibility by zero")
    if modulus == 1:
        return TRUE
    coeffs = tuple((v, c % modulus) for v, c in lin.coeffs if c % modulus)
    const = lin.const % modulus
    if not coeffs:
        return TRUE if const == 0 else FALSE
    g = modulus
    for _, c in coeffs:
        g = gcd(g, c)
    g = gcd(g, const)
    if g > 1:
        modulus //= g
        coeffs = tuple((v, c // g) for v, c in coeffs)
        const //= g
        if modulus == 1:
            return TRUE
    return Dvd(modulus, Lin(coeffs, const))


def mk_and(items: Iterable[Node]) -> Node:
    flat: Dict[Node, None] = {}
    for item in items:
        if item is TRUE:
            continue
        if item is FALSE:
            return FALSE
        if isinstance(item, Conj):
            for sub in item.items:
                flat.setdefault(sub)
        else:
            flat.setdefault(item)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return next(iter(flat))
    return Conj(tuple(flat))


def mk_or(items: Iterable[Node]) -> Node:
    flat: Dict[Node, None] = {}
    for item in items:
        if item is FALSE:
            continue
        if item is TRUE:
            return TRUE
        if isinstance(item, Disj):
            for sub in item.items:
                flat.setdefault(sub)
        else:
            flat.setdefault(item)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return next(iter(flat))
    return Disj(tuple(flat))


def negate(node: Node) -> Node:
    """Negation pushed to the literals"""
    if node is TRUE:
        return FALSE
    if node is FALSE:
        return TRUE
    if isinstance(node, Ge):
        return mk_ge((-node.lin).shift(-1))
    if isinstance(node, Dvd):
        return mk_or(mk_dvd(node.modulus, node.lin.shift(-r)) for r in range(1, node.modulus))
    if isinstance(node, Conj):
        return mk_or(negate(item) for item in node.items)
    if isinstance(node, Disj):
        return mk_and(negate(item) for item in node.items)
    raise TypeError(f"not a node: {node!r}")


def map_literals(node: Node, fn) -> Node:
    """Rebuild ``node`` with every literal replaced by fn(literal)"""
    if isinstance(node, (Ge, Dvd)):
        return fn(node)
    if isinstance(node, Conj):
        return mk_and(map_literals(item, fn) for item in node.items)
    if isinstance(node, Disj):
        return mk_or(map_literals(item, fn) for item in node.items)
    return node


def literals(node: Node) -> Iterable[Literal]:
    if isinstance(node, (Ge, Dvd)):
        yield node
    elif isinstance(node, (Conj, Disj)):
        for item in node.items:
            yield from literals(item)


def mentions(node: Node, var: str) -> bool:
    return any(lit.lin.coeff(var) for lit in literals(node))


def node_size(node: Node) -> int:
    if isinstance(node, (Conj, Disj)):
        return sum(node_size(item) for item in node.items)
    return 1


def node_bits(node: Node) -> int:
    return sum(lit.lin.bits() + (lit.modulus.bit_length() if isinstance(lit, Dvd) else 0)
               for lit in literals(node))


def evaluate_node(node: Node, env: Mapping[str, int]) -> bool:
    if node is TRUE:
        return True
    if node is FALSE:
        return False
    if isinstance(node, Ge):
        return node.lin.evaluate(env) >= 0
    if isinstance(node, Dvd):
        return node.lin.evaluate(env) % node.modulus == 0
    if isinstance(node, Conj):
        return all(evaluate_node(item, env) for item in node.items)
    return any(evaluate_node(item, env) for item in node.items)


def _clashes(conjunct: Dict[Literal, None], lit: Literal) -> bool:
    """Cheap contradiction test: l >= 0 together with -l + k >= 0 where k < 0"""
    if not isinstance(lit, Ge):
        return False
    mirrored = tuple((v, -c) for v, c in lit.lin.coeffs)
    for other in conjunct:
        if isinstance(other, Ge) and other.lin.coeffs == mirrored and lit.lin.const + other.lin.const < 0:
            return True
    return False


def to_dnf(node: Node, max_cells: int, max_bits: int, on_limit) -> List[Tuple[Literal, ...]]:
    """
    Distribute ``node`` into a list of conjunctions of literals.

    ``on_limit(message)`` is called (and must raise) when the cell count or the
    coefficient bit budget would be exceeded.
    """
    if node is TRUE:
        return [()]
    if node is FALSE:
        return []
    if isinstance(node, (Ge, Dvd)):
        return [(node,)]
    if isinstance(node, Disj):
        merged: Dict[Tuple[Literal, ...], None] = {}
        for item in node.items:
            for conjunct in to_dnf(item, max_cells, max_bits, on_limit):
                merged.setdefault(conjunct)
            if len(merged) > max_cells:
                on_limit(f"normal form exceeds {max_cells} cells")
        return list(merged)
    acc: List[Dict[Literal, None]] = [{}]
    for item in node.items:
        part = to_dnf(item, max_cells, max_bits, on_limit)
        product: Dict[Tuple[Literal, ...], Dict[Literal, None]] = {}
        for left in acc:
            for right in part:
                conjunct = dict(left)
                dead = False
                for lit in right:
                    if lit in conjunct:
                        continue
                    if _clashes(conjunct, lit):
                        dead = True
                        break
                    conjunct[lit] = None
                if not dead:
                    product.setdefault(tuple(sorted(conjunct, key=_literal_key)), conjunct)
                if len(product) > max_cells:
                    on_limit(f"normal form exceeds {max_cells} cells")
        acc = list(product.values())
        if not acc:
            return []
    result = [tuple(sorted(conjunct, key=_literal_key)) for conjunct in acc]
    total_bits = sum(lit.lin.bits() for conjunct in result for lit in conjunct)
    if total_bits > max_bits:
        on_limit(f"normal form exceeds the {max_bits}-bit coefficient budget")
    return result


def _literal_key(lit: Literal):
    return (0, 0, lit.lin) if isinstance(lit, Ge) else (1, lit.modulus, lit.lin)
