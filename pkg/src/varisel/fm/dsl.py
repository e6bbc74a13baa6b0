"""The ``.fm`` text format.

Example::

    # comments start with '#'
    feature Root mandatory "Display name"
      feature A optional
      alt {
        feature B
        feature C
      }
    constraint A => B

Hierarchy is expressed by two-space indentation. ``or {`` / ``alt {`` blocks
open a group under the feature one level up; their members take no
``mandatory``/``optional`` keyword. ``constraint`` lines sit at column 1 and
use ``!``, ``&``, ``|``, ``=>`` (loosest, right-associative) and parentheses.
The quoted display name is optional and defaults to the identifier.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..errors import ParseError, SourceSpan
from . import expr
from .model import Constraint, Feature, FeatureModel, Group, GroupKind, Variability, validate_model

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#.*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<arrow>=>)
  | (?P<op>[!&|(){}])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)
IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
KEYWORDS = {"feature", "constraint", "or", "alt", "mandatory", "optional"}
INDENT = 2


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(line: str, lineno: int, start: int) -> list[_Tok]:
    toks = []
    pos = start
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise ParseError("SYNTAX", f"unexpected character {line[pos]!r}", SourceSpan(lineno, pos + 1))
        kind = m.lastgroup
        if kind == "comment":
            break
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos + 1))
        pos = m.end()
    return toks


class _ExprParser:
    def __init__(self, toks: list[_Tok], lineno: int, eol: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.eol = eol
        self.refs: list[tuple[str, SourceSpan]] = []

    def _peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def _fail(self, message: str):
        tok = self._peek()
        col = tok.col if tok else self.eol
        raise ParseError("SYNTAX", message, SourceSpan(self.lineno, col))

    def parse(self) -> expr.Formula:
        if not self.toks:
            self._fail("constraint needs an expression")
        node = self._implies()
        if self._peek() is not None:
            self._fail(f"unexpected {self._peek().text!r} in constraint")
        return node

    def _implies(self):
        left = self._or()
        tok = self._peek()
        if tok is not None and tok.kind == "arrow":
            self.i += 1
            return expr.Implies(left, self._implies())
        return left

    def _or(self):
        node = self._and()
        while (tok := self._peek()) is not None and tok.text == "|":
            self.i += 1
            node = expr.Or(node, self._and())
        return node

    def _and(self):
        node = self._unary()
        while (tok := self._peek()) is not None and tok.text == "&":
            self.i += 1
            node = expr.And(node, self._unary())
        return node

    def _unary(self):
        tok = self._peek()
        if tok is None:
            self._fail("expression ends early")
        if tok.text == "!":
            self.i += 1
            return expr.Not(self._unary())
        if tok.text == "(":
            self.i += 1
            node = self._implies()
            close = self._peek()
            if close is None or close.text != ")":
                self._fail("expected ')'")
            self.i += 1
            return node
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.i += 1
            self.refs.append((tok.text, SourceSpan(self.lineno, tok.col)))
            return expr.Var(tok.text)
        self._fail(f"expected a feature name, got {tok.text!r}")


@dataclass
class _Frame:
    indent: int
    feature: str | None = None
    kind: GroupKind | None = None
    owner: str | None = None
    members: list[str] = field(default_factory=list)
    span: SourceSpan | None = None


def parse_formula(text: str) -> expr.Formula:
    """Parse a standalone constraint expression (no reference checking)."""
    toks = _tokenize(text, 1, 0)
    return _ExprParser(toks, 1, len(text) + 1).parse()


def parse(text: str) -> FeatureModel:
    """Parse ``.fm`` text; raises ``ParseError`` at the first problem."""
    features: list[Feature] = []
    groups: list[Group] = []
    pending: list[tuple[expr.Formula, list[tuple[str, SourceSpan]]]] = []
    seen: set[str] = set()
    stack: list[_Frame] = []
    lines = text.splitlines()

    for lineno, line in enumerate(lines, start=1):
        stripped = line.lstrip(" ")
        if not stripped.strip() or stripped.startswith("#"):
            continue
        indent = len(line) - len(stripped)
        if stripped.startswith("\t"):
            raise ParseError("SYNTAX", "tabs are not allowed for indentation", SourceSpan(lineno, indent + 1))
        if indent % INDENT:
            raise ParseError("SYNTAX", "indentation must be a multiple of two spaces", SourceSpan(lineno, 1))
        toks = _tokenize(line, lineno, indent)
        if not toks:
            continue
        head = toks[0]
        here = SourceSpan(lineno, head.col)

        if head.text == "constraint":
            if indent:
                raise ParseError("SYNTAX", "constraints must start at column 1", here)
            p = _ExprParser(toks[1:], lineno, len(line.rstrip()) + 1)
            pending.append((p.parse(), p.refs))
            continue

        if head.text == "}":
            if len(toks) > 1:
                raise ParseError("SYNTAX", "nothing may follow '}'", SourceSpan(lineno, toks[1].col))
            while stack and stack[-1].kind is None and stack[-1].indent > indent:
                stack.pop()
            if not stack or stack[-1].kind is None or stack[-1].indent != indent:
                raise ParseError("SYNTAX", "'}' does not close a group at this indentation", here)
            frame = stack.pop()
            if len(frame.members) < 2:
                raise ParseError("BAD_GROUP", f"group needs at least two members, has {len(frame.members)}", frame.span)
            groups.append(Group(frame.owner, frame.kind, tuple(frame.members)))
            continue

        # feature lines and group openers attach to the frame one level up
        while stack and stack[-1].kind is None and stack[-1].indent >= indent:
            stack.pop()
        if stack and stack[-1].kind is not None and stack[-1].indent >= indent:
            raise ParseError("SYNTAX", "group is not closed with '}'", here)
        parent = stack[-1] if stack else None
        if parent is not None and parent.indent != indent - INDENT:
            raise ParseError("SYNTAX", "indentation skips a level", here)

        if head.text in ("or", "alt"):
            if len(toks) != 2 or toks[1].text != "{":
                raise ParseError("SYNTAX", f"expected '{head.text} {{'", here)
            if parent is None or parent.kind is not None:
                raise ParseError("SYNTAX", "a group must be nested directly under a feature", here)
            kind = GroupKind.OR if head.text == "or" else GroupKind.ALTERNATIVE
            stack.append(_Frame(indent, kind=kind, owner=parent.feature, span=here))
            continue

        if head.text != "feature":
            raise ParseError("SYNTAX", f"unexpected {head.text!r}; expected feature, or, alt, constraint or }}", here)
        if len(toks) < 2 or toks[1].kind != "ident" or toks[1].text in KEYWORDS:
            col = toks[1].col if len(toks) > 1 else len(line.rstrip()) + 1
            raise ParseError("SYNTAX", "expected a feature identifier", SourceSpan(lineno, col))
        fid = toks[1].text
        if fid in seen:
            raise ParseError("DUPLICATE_ID", f"feature {fid!r} is already declared", SourceSpan(lineno, toks[1].col))
        rest = toks[2:]
        keyword = None
        if rest and rest[0].text in ("mandatory", "optional"):
            keyword = rest.pop(0)
        display = ""
        if rest and rest[0].kind == "string":
            display = json.loads(rest.pop(0).text)
        if rest:
            raise ParseError("SYNTAX", f"unexpected {rest[0].text!r}", SourceSpan(lineno, rest[0].col))

        if parent is None:
            if features:
                raise ParseError("SYNTAX", "only one root feature is allowed", here)
            variability = Variability.OPTIONAL if keyword and keyword.text == "optional" else Variability.MANDATORY
            owner = None
        elif parent.kind is not None:
            if keyword is not None:
                raise ParseError("SYNTAX", "group members take no mandatory/optional keyword", SourceSpan(lineno, keyword.col))
            variability = Variability.GROUPED
            owner = parent.owner
            parent.members.append(fid)
        else:
            variability = Variability.MANDATORY if keyword and keyword.text == "mandatory" else Variability.OPTIONAL
            owner = parent.feature
        seen.add(fid)
        features.append(Feature(fid, display, variability, owner))
        stack.append(_Frame(indent, feature=fid))

    open_groups = [f for f in stack if f.kind is not None]
    if open_groups:
        raise ParseError("SYNTAX", "group is not closed with '}'", open_groups[-1].span)
    if not features:
        raise ParseError("SYNTAX", "no feature declared", SourceSpan(max(len(lines), 1), 1))
    constraints = []
    for formula, refs in pending:
        for name, span in refs:
            if name not in seen:
                raise ParseError("UNKNOWN_REF", f"constraint references unknown feature {name!r}", span)
        constraints.append(Constraint(formula))

    model = FeatureModel(tuple(features), tuple(groups), tuple(constraints))
    assert validate_model(model).ok, validate_model(model)
    return model


def serialize(model: FeatureModel) -> str:
    """Deterministic ``.fm`` text for a valid model."""
    result = validate_model(model)
    if not result.ok:
        from ..errors import ModelError

        raise ModelError("INVALID_MODEL", "; ".join(map(str, result.violations)))
    for f in model.features:
        if not IDENT.match(f.id) or f.id in KEYWORDS:
            raise ValueError(f"feature id {f.id!r} cannot be written in .fm syntax")

    out: list[str] = []

    def emit(fid: str, depth: int, grouped: bool) -> None:
        f = model.by_id[fid]
        parts = ["feature", fid]
        if not grouped:
            parts.append("mandatory" if f.variability is Variability.MANDATORY else "optional")
        if f.display_name:
            parts.append(json.dumps(f.display_name, ensure_ascii=False))
        out.append(" " * (INDENT * depth) + " ".join(parts))
        members = {c for g in model.groups_of.get(fid, ()) for c in g.children}
        for c in model.children[fid]:
            if c not in members:
                emit(c, depth + 1, False)
        for g in model.groups_of.get(fid, ()):
            pad = " " * (INDENT * (depth + 1))
            out.append(pad + ("alt {" if g.kind is GroupKind.ALTERNATIVE else "or {"))
            for c in g.children:
                emit(c, depth + 2, True)
            out.append(pad + "}")

    emit(model.root.id, 0, False)
    for con in model.constraints:
        out.append(f"constraint {con}")
    return "\n".join(out) + "\n"
