"""Feature models: tree + groups + cross-tree constraints, and their configurations."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from ..errors import ModelError
from . import expr
from .expr import Formula


class Variability(str, enum.Enum):
    MANDATORY = "MANDATORY"
    OPTIONAL = "OPTIONAL"
    GROUPED = "GROUPED"


class GroupKind(str, enum.Enum):
    OR = "OR"
    ALTERNATIVE = "ALTERNATIVE"


@dataclass(frozen=True)
class Feature:
    id: str
    display_name: str = ""
    variability: Variability = Variability.OPTIONAL
    parent: str | None = None

    @property
    def label(self) -> str:
        return self.display_name or self.id


@dataclass(frozen=True)
class Group:
    parent: str
    kind: GroupKind
    children: tuple[str, ...]


@dataclass(frozen=True)
class Constraint:
    formula: Formula

    def __str__(self) -> str:
        return expr.to_text(self.formula)


@dataclass(frozen=True, eq=False)
class FeatureModel:
    """Immutable feature model.

    Equality is structural: two models are equal when they hold the same
    features and groups (in any order) and the same constraint sequence.
    Feature order still matters for iteration, e.g. child order in rendering.
    """

    features: tuple[Feature, ...]
    groups: tuple[Group, ...] = ()
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "constraints", tuple(self.constraints))

    def __eq__(self, other):
        if not isinstance(other, FeatureModel):
            return NotImplemented
        return (
            set(self.features) == set(other.features)
            and set(self.groups) == set(other.groups)
            and self.constraints == other.constraints
        )

    def __hash__(self):
        return hash((frozenset(self.features), frozenset(self.groups), self.constraints))

    @cached_property
    def by_id(self) -> dict[str, Feature]:
        return {f.id: f for f in self.features}

    @cached_property
    def ids(self) -> frozenset[str]:
        return frozenset(self.by_id)

    @cached_property
    def children(self) -> dict[str, tuple[str, ...]]:
        kids: dict[str, list[str]] = {f.id: [] for f in self.features}
        for f in self.features:
            if f.parent is not None and f.parent in kids and f.parent != f.id:
                kids[f.parent].append(f.id)
        return {k: tuple(v) for k, v in kids.items()}

    @cached_property
    def groups_of(self) -> dict[str, tuple[Group, ...]]:
        out: dict[str, list[Group]] = {}
        for g in self.groups:
            out.setdefault(g.parent, []).append(g)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def group_of(self) -> dict[str, Group]:
        """Map each grouped feature to the (first) group that lists it."""
        out: dict[str, Group] = {}
        for g in self.groups:
            for c in g.children:
                out.setdefault(c, g)
        return out

    @property
    def root(self) -> Feature:
        roots = [f for f in self.features if f.parent is None]
        if len(roots) != 1:
            raise ModelError("INVALID_MODEL", f"model has {len(roots)} roots")
        return roots[0]

    def ancestors(self, fid: str) -> list[str]:
        out = []
        cur = self.by_id[fid].parent
        while cur is not None and cur not in out:
            out.append(cur)
            cur = self.by_id[cur].parent if cur in self.by_id else None
        return out


@dataclass(frozen=True)
class Configuration:
    selected: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "selected", frozenset(self.selected))

    @classmethod
    def of(cls, *ids: str) -> "Configuration":
        return cls(frozenset(ids))

    def __contains__(self, fid: str) -> bool:
        return fid in self.selected

    def sort_key(self) -> tuple[str, ...]:
        return tuple(sorted(self.selected))


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}({self.subject}): {self.message}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


def validate_model(model: FeatureModel) -> ValidationResult:
    """Check the structural invariants; violations are returned, never raised."""
    out: list[Violation] = []
    seen: set[str] = set()
    for f in model.features:
        if f.id in seen:
            out.append(Violation("DUPLICATE_ID", f.id, "feature id declared more than once"))
        seen.add(f.id)

    roots = [f for f in model.features if f.parent is None]
    if not roots:
        out.append(Violation("NO_ROOT", "", "model has no root feature"))
    for extra in roots[1:]:
        out.append(Violation("MULTIPLE_ROOTS", extra.id, "second feature without a parent"))
    for r in roots:
        if r.variability is Variability.GROUPED:
            out.append(Violation("GROUPED_ROOT", r.id, "root cannot be a group member"))

    by_id = model.by_id
    for f in model.features:
        if f.parent is not None and f.parent not in by_id:
            out.append(Violation("UNKNOWN_PARENT", f.id, f"parent {f.parent!r} does not exist"))

    # walk parent links; a walk that revisits a node is a cycle
    reported: set[str] = set()
    for f in model.features:
        path: list[str] = []
        cur: str | None = f.id
        while cur is not None and cur in by_id and cur not in path:
            path.append(cur)
            cur = by_id[cur].parent
        if cur is not None and cur in path:
            loop = path[path.index(cur):]
            key = min(loop)
            if key not in reported:
                reported.add(key)
                out.append(Violation("CYCLE", key, "parent links form a cycle: " + " -> ".join(loop + [cur])))

    membership: dict[str, Group] = {}
    for g in model.groups:
        if g.parent not in by_id:
            out.append(Violation("UNKNOWN_GROUP_PARENT", g.parent, "group owner does not exist"))
        if len(g.children) < 2:
            out.append(Violation("GROUP_TOO_SMALL", g.parent, f"{g.kind.value} group has {len(g.children)} child(ren)"))
        if len(set(g.children)) != len(g.children):
            out.append(Violation("DUPLICATE_GROUP_MEMBER", g.parent, "group lists a child twice"))
        for c in dict.fromkeys(g.children):
            if c not in by_id:
                out.append(Violation("UNKNOWN_GROUP_MEMBER", c, f"group of {g.parent} lists unknown feature"))
                continue
            if c in membership:
                out.append(Violation("MULTIPLE_GROUPS", c, "feature belongs to more than one group"))
            membership[c] = g
            child = by_id[c]
            if child.variability is not Variability.GROUPED:
                out.append(Violation("NOT_GROUPED", c, "group member must have GROUPED variability"))
            if child.parent != g.parent:
                out.append(Violation("GROUP_PARENT_MISMATCH", c, f"member's parent is {child.parent!r}, group owner is {g.parent!r}"))

    for f in model.features:
        if f.variability is Variability.GROUPED and f.parent is not None and f.id not in membership:
            out.append(Violation("UNGROUPED_MEMBER", f.id, "GROUPED feature is not listed by any group of its parent"))

    for i, con in enumerate(model.constraints):
        for name in dict.fromkeys(expr.variables(con.formula)):
            if name not in by_id:
                out.append(Violation("UNKNOWN_REF", name, f"constraint #{i + 1} references an unknown feature"))
    return ValidationResult(tuple(out))


def _require_valid(model: FeatureModel) -> None:
    result = validate_model(model)
    if not result.ok:
        raise ModelError("INVALID_MODEL", "; ".join(map(str, result.violations)))


def validate_configuration(model: FeatureModel, config: Configuration) -> ValidationResult:
    """Check a selection against the tree semantics and every constraint.

    Raises ``ModelError(UNKNOWN_FEATURE)`` if the selection names a feature the
    model does not have; everything else is reported as violations.
    """
    unknown = sorted(config.selected - model.ids)
    if unknown:
        raise ModelError("UNKNOWN_FEATURE", f"configuration references unknown feature(s): {', '.join(unknown)}")

    sel = config.selected
    out: list[Violation] = []
    root = model.root
    if root.id not in sel:
        out.append(Violation("ROOT_NOT_SELECTED", root.id, "root must be selected"))

    for f in model.features:
        if f.id in sel and f.parent is not None and f.parent not in sel:
            out.append(Violation("PARENT_NOT_SELECTED", f.id, f"parent {f.parent} is not selected"))
        if f.id not in sel:
            continue
        for c in model.children[f.id]:
            if model.by_id[c].variability is Variability.MANDATORY and c not in sel:
                out.append(Violation("MISSING_MANDATORY", c, f"mandatory child of {f.id} is not selected"))
        for g in model.groups_of.get(f.id, ()):
            n = sum(c in sel for c in g.children)
            if g.kind is GroupKind.ALTERNATIVE and n != 1:
                out.append(Violation("ALTERNATIVE_VIOLATION", f.id, f"alternative group needs exactly one child, has {n}"))
            elif g.kind is GroupKind.OR and n < 1:
                out.append(Violation("OR_VIOLATION", f.id, "or group needs at least one child"))

    for con in model.constraints:
        if not con.formula.evaluate(sel):
            out.append(Violation("CONSTRAINT_VIOLATED", str(con), "cross-tree constraint is false"))
    return ValidationResult(tuple(out))


def _subtree_selections(model: FeatureModel, fid: str) -> list[frozenset[str]]:
    """All tree-valid selections inside the subtree of ``fid``, given it is selected."""
    options = [frozenset((fid,))]
    grouped = {c for g in model.groups_of.get(fid, ()) for c in g.children}
    for c in model.children[fid]:
        if c in grouped:
            continue
        sub = _subtree_selections(model, c)
        if model.by_id[c].variability is not Variability.MANDATORY:
            sub = [frozenset()] + sub
        options = [a | b for a in options for b in sub]
    for g in model.groups_of.get(fid, ()):
        per_child = [_subtree_selections(model, c) for c in g.children]
        if g.kind is GroupKind.ALTERNATIVE:
            choices = [s for opts in per_child for s in opts]
        else:
            choices = [
                frozenset().union(*combo)
                for combo in itertools.product(*([frozenset()] + opts for opts in per_child))
                if any(combo)
            ]
        options = [a | b for a in options for b in choices]
    return options


def enumerate_configurations(model: FeatureModel, cap: int = 24) -> list[Configuration]:
    """Every valid configuration, ordered lexicographically by sorted ids.

    Builds selections subtree by subtree (so invalid tree shapes are never
    generated) and filters by the cross-tree constraints afterwards.
    """
    if cap < 1:
        raise ValueError("cap must be positive")
    if len(model.features) > cap:
        raise ModelError("MODEL_TOO_LARGE", f"{len(model.features)} features exceed the cap of {cap}")
    _require_valid(model)
    configs = [
        Configuration(s)
        for s in _subtree_selections(model, model.root.id)
        if all(c.formula.evaluate(s) for c in model.constraints)
    ]
    return sorted(configs, key=Configuration.sort_key)
