"""Propositional formulas over feature identifiers.

Unselected features evaluate to false (closed world).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterator, Union


@dataclass(frozen=True)
class Var:
    name: str

    def evaluate(self, selected: AbstractSet[str]) -> bool:
        return self.name in selected


@dataclass(frozen=True)
class Not:
    operand: "Formula"

    def evaluate(self, selected: AbstractSet[str]) -> bool:
        return not self.operand.evaluate(selected)


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def evaluate(self, selected: AbstractSet[str]) -> bool:
        return self.left.evaluate(selected) and self.right.evaluate(selected)


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def evaluate(self, selected: AbstractSet[str]) -> bool:
        return self.left.evaluate(selected) or self.right.evaluate(selected)


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"

    def evaluate(self, selected: AbstractSet[str]) -> bool:
        return (not self.left.evaluate(selected)) or self.right.evaluate(selected)


Formula = Union[Var, Not, And, Or, Implies]

# binding strength, loosest first; `=>` is right-associative, `&` and `|` left
PRECEDENCE = {Implies: 1, Or: 2, And: 3, Not: 4, Var: 5}
SYMBOLS = {Implies: "=>", Or: "|", And: "&"}


def variables(formula: Formula) -> Iterator[str]:
    """Yield every identifier referenced by ``formula`` (with repeats)."""
    stack = [formula]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            yield node.name
        elif isinstance(node, Not):
            stack.append(node.operand)
        else:
            stack.append(node.right)
            stack.append(node.left)


def to_text(formula: Formula) -> str:
    """Render with the minimum parentheses needed to parse back identically."""
    if isinstance(formula, Var):
        return formula.name
    if isinstance(formula, Not):
        inner = to_text(formula.operand)
        if PRECEDENCE[type(formula.operand)] < PRECEDENCE[Not]:
            inner = f"({inner})"
        return f"!{inner}"

    prec = PRECEDENCE[type(formula)]
    left, right = to_text(formula.left), to_text(formula.right)
    lp, rp = PRECEDENCE[type(formula.left)], PRECEDENCE[type(formula.right)]
    right_assoc = isinstance(formula, Implies)
    if lp < prec or (right_assoc and lp == prec):
        left = f"({left})"
    if rp < prec or (not right_assoc and rp == prec):
        right = f"({right})"
    return f"{left} {SYMBOLS[type(formula)]} {right}"
