"""Seeded random formulas shaped exactly like parser output."""
import random
from typing import List, Optional, Sequence

from logic.formula import (
    COMPARATORS, And, Compare, Congruence, Const, Difference, Exists, Forall,
    Formula, Iff, Implies, Neg, Not, Or, Scale, Sum, Term, Var, fresh_name,
)


class FormulaFactory:
    """Random terms and formulas over a small variable pool"""

    def __init__(self, seed: int = 0, max_coefficient: int = 4, max_constant: int = 6,
                 moduli: Sequence[int] = (2, 3, 4), bound_names: Sequence[str] = ("u", "v", "w", "x", "y")):
        self.rng = random.Random(seed)
        self.max_coefficient = max_coefficient
        self.max_constant = max_constant
        self.moduli = tuple(moduli)
        self.bound_names = tuple(bound_names)

    # ------------------------------------------------------------------- terms
    def coefficient(self) -> int:
        c = 0
        while c == 0:
            c = self.rng.randint(-self.max_coefficient, self.max_coefficient)
        return c

    def product(self, var: Optional[Var]) -> Term:
        if var is None:
            return Const(self.rng.randint(-self.max_constant, self.max_constant))
        roll = self.rng.random()
        if roll < 0.55:
            return Scale(self.coefficient(), var)
        if roll < 0.85:
            return var
        return Neg(var)

    def term(self, scope: Sequence[Var], focus: Optional[Var] = None) -> Term:
        picks: List[Optional[Var]] = []
        if focus is not None:
            picks.append(focus)
        for var in scope:
            if var is not focus and self.rng.random() < 0.4:
                picks.append(var)
        if not picks and scope:
            picks.append(self.rng.choice(list(scope)))
        self.rng.shuffle(picks)
        if self.rng.random() < 0.6:
            picks.append(None)
        if not picks:
            picks.append(None)
        result = self.product(picks[0])
        for var in picks[1:]:
            node = Sum if self.rng.random() < 0.6 else Difference
            result = node(result, self.product(var))
        return result

    # ---------------------------------------------------------------- formulas
    def atom(self, scope: Sequence[Var], focus: Optional[Var] = None) -> Formula:
        if self.rng.random() < 0.2:
            modulus = self.rng.choice(self.moduli)
            return Congruence(self.term(scope, focus), modulus, self.rng.randrange(modulus))
        rhs = self.product(None) if self.rng.random() < 0.6 else self.term(scope)
        return Compare(self.term(scope, focus), self.rng.choice(COMPARATORS), rhs)

    def boolean(self, scope: Sequence[Var], depth: int, focus: Optional[Var] = None) -> Formula:
        if depth <= 0 or self.rng.random() < 0.3:
            return self.atom(scope, focus)
        roll = self.rng.random()
        if roll < 0.15:
            return Not(self.boolean(scope, depth - 1, focus))
        node = And if roll < 0.55 else Or if roll < 0.85 else Implies if roll < 0.95 else Iff
        return node(self.boolean(scope, depth - 1, focus), self.boolean(scope, depth - 1))

    def formula(self, free: Sequence[str], depth: int) -> Formula:
        """Arbitrary nesting of connectives and quantifiers (round-trip corpus)"""
        return self._formula([Var(name) for name in free], depth)

    def _formula(self, scope: List[Var], depth: int) -> Formula:
        if depth <= 0 or self.rng.random() < 0.2:
            return self.atom(scope)
        roll = self.rng.random()
        if roll < 0.25:
            display = self.rng.choice(self.bound_names)
            var = Var(fresh_name(display), display)
            node = Exists if self.rng.random() < 0.5 else Forall
            return node(var, self._formula(scope + [var], depth - 1))
        if roll < 0.35:
            return Not(self._formula(scope, depth - 1))
        node = self.rng.choice((And, Or, Implies, Iff))
        return node(self._formula(scope, depth - 1), self._formula(scope, depth - 1))

    def quantified(self, free: Sequence[str], bound: int) -> Formula:
        """Nested quantifiers over fresh variables, at most ``bound`` of them"""
        return self._nest([Var(name) for name in free], bound)

    def _nest(self, scope: List[Var], remaining: int) -> Formula:
        if remaining == 0:
            return self.boolean(scope, 2)
        display = self.bound_names[remaining % len(self.bound_names)]
        var = Var(fresh_name(display), display)
        inner = self._nest(scope + [var], remaining - 1) if remaining > 1 else self.boolean(scope + [var], 2, var)
        if remaining > 1 and self.rng.random() < 0.6:
            node = And if self.rng.random() < 0.5 else Or
            inner = node(self.atom(scope + [var], var), inner)
        quantifier = Exists if self.rng.random() < 0.5 else Forall
        result: Formula = quantifier(var, inner)
        if scope and self.rng.random() < 0.4:
            node = And if self.rng.random() < 0.5 else Or
            result = node(self.atom(scope), result)
        return result
