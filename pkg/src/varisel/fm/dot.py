"""Graphviz DOT rendering of feature models.

Edge decorations follow the usual feature-diagram notation: a filled dot for
mandatory children, a hollow dot for optional ones, and group members carry an
``or``/``alt`` edge label. Constraints are listed as comments.
"""

from __future__ import annotations

from ..errors import ModelError
from .model import Configuration, FeatureModel, GroupKind, Variability, validate_configuration, validate_model

HIGHLIGHT = 'style="filled,bold", fillcolor="#9ecae1", penwidth=2'


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(model: FeatureModel, highlight: Configuration | None = None, name: str = "feature_model") -> str:
    result = validate_model(model)
    if not result.ok:
        raise ModelError("INVALID_MODEL", "; ".join(map(str, result.violations)))
    selected: frozenset[str] = frozenset()
    if highlight is not None:
        check = validate_configuration(model, highlight)
        if not check.ok:
            raise ModelError("INVALID_HIGHLIGHT", "; ".join(map(str, check.violations)))
        selected = highlight.selected

    lines = [f"digraph {_quote(name)} {{", "  rankdir=TB;", '  node [shape=box, fontname="Helvetica"];']
    order = []
    stack = [model.root.id]
    while stack:
        fid = stack.pop()
        order.append(fid)
        stack.extend(reversed(model.children[fid]))

    for fid in order:
        attrs = f"label={_quote(model.by_id[fid].label)}"
        if fid in selected:
            attrs += ", " + HIGHLIGHT
        lines.append(f"  {_quote(fid)} [{attrs}];")

    for fid in order:
        for c in model.children[fid]:
            child = model.by_id[c]
            group = model.group_of.get(c)
            if child.variability is Variability.GROUPED and group is not None:
                kind = "alt" if group.kind is GroupKind.ALTERNATIVE else "or"
                attrs = f'arrowhead=none, label="{kind}"'
            elif child.variability is Variability.MANDATORY:
                attrs = "arrowhead=dot"
            else:
                attrs = "arrowhead=odot"
            if fid in selected and c in selected:
                attrs += ", penwidth=2"
            lines.append(f"  {_quote(fid)} -> {_quote(c)} [{attrs}];")

    for con in model.constraints:
        lines.append(f"  // constraint: {con}")
    lines.append("}")
    return "\n".join(lines) + "\n"
