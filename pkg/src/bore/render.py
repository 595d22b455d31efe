"""DOT output for process models and use-case models."""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    AutomationLabel,
    DecisionGateway,
    EndNode,
    ProcessModel,
    StartNode,
    Task,
    require_valid,
)
from .transform import UseCaseModel


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


@dataclass(frozen=True)
class RenderStyle:
    color_map: dict = field(
        default_factory=lambda: {
            AutomationLabel.A: "green",
            AutomationLabel.S: "yellow",
            AutomationLabel.M: "blue",
            None: "white",
        }
    )
    shape_map: dict = field(
        default_factory=lambda: {
            Task: "box",
            DecisionGateway: "diamond",
            StartNode: "circle",
            EndNode: "doublecircle",
        }
    )

    def __post_init__(self):
        missing = [k for k in (AutomationLabel.A, AutomationLabel.S, AutomationLabel.M, None) if k not in self.color_map]
        if missing:
            raise ValueError(f"color_map lacks entries for {missing}")


DEFAULT_STYLE = RenderStyle()


def process_to_dot(model: ProcessModel, style: RenderStyle = DEFAULT_STYLE) -> str:
    require_valid(model)
    m = model.normalized()
    out = [f"digraph {_q(m.name)} {{", "  node [style=filled, fontcolor=black];"]
    for n in m.nodes:
        shape = style.shape_map[type(n)]
        if isinstance(n, Task):
            label = f"{n.title}\n({', '.join(n.roles)})"
            if n.label is not None:
                label = f"[{n.label.value}] {label}"
            fill = style.color_map[n.label]
        elif isinstance(n, DecisionGateway):
            label, fill = n.title, "white"
        else:
            label, fill = n.title or n.id, "white"
        out.append(f"  {_q(n.id)} [shape={shape}, fillcolor={fill}, label={_q(label)}];")
    for f in m.flows:
        attrs = f" [label={_q(f.branch)}]" if f.branch is not None else ""
        out.append(f"  {_q(f.source)} -> {_q(f.target)}{attrs};")
    out.append("}")
    return "\n".join(out) + "\n"


def usecase_to_dot(ucm: UseCaseModel) -> str:
    out = ['digraph "use cases" {']
    for actor in ucm.actors:
        out.append(f"  {_q('actor:' + actor)} [shape=box, label={_q(actor)}];")
    for i, pkg in enumerate(ucm.packages):
        out.append(f"  subgraph {_q(f'cluster_{i}')} {{")
        out.append(f"    label={_q(pkg.name)};")
        for uc in pkg.use_cases:
            out.append(f"    {_q('uc:' + uc)} [shape=ellipse, label={_q(ucm.titles.get(uc, uc))}];")
        out.append("  }")
    for actor, uc in ucm.sorted_associations():
        out.append(f"  {_q('actor:' + actor)} -> {_q('uc:' + uc)} [arrowhead=none];")
    out.append("}")
    return "\n".join(out) + "\n"
