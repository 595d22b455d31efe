"""Process-model graph: roles, tasks, gateways, flows, and structural checks."""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional, Union


class ModelError(Exception):
    """Base class for errors raised by model operations."""


class UnknownNodeError(ModelError, KeyError):
    def __init__(self, node_id: str):
        super().__init__(node_id)
        self.node_id = node_id

    def __str__(self) -> str:
        return f"unknown-node: {self.node_id}"


class InvalidModelError(ModelError, ValueError):
    """Raised when an operation requires a clean model but validation fails."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        lines = [str(v) for v in report.violations[:5]]
        more = len(report.violations) - len(lines)
        if more > 0:
            lines.append(f"... and {more} more")
        super().__init__("invalid-model: " + "; ".join(lines))


class ModelKind(str, Enum):
    ASIS = "asis"
    TOBE = "tobe"


class AutomationLabel(str, Enum):
    """A = automatic, S = supported by a human agent, M = manual.

    Ordered so that more automated compares greater: A > S > M.
    """

    A = "A"
    S = "S"
    M = "M"

    @property
    def rank(self) -> int:
        return _LABEL_RANK[self]

    def __lt__(self, other):
        if not isinstance(other, AutomationLabel):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other):
        if not isinstance(other, AutomationLabel):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other):
        if not isinstance(other, AutomationLabel):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other):
        if not isinstance(other, AutomationLabel):
            return NotImplemented
        return self.rank >= other.rank


_LABEL_RANK = {AutomationLabel.M: 1, AutomationLabel.S: 2, AutomationLabel.A: 3}


@dataclass(frozen=True)
class Role:
    id: str
    title: Optional[str] = None


@dataclass(frozen=True)
class Task:
    id: str
    title: str
    roles: tuple[str, ...]
    label: Optional[AutomationLabel] = None


@dataclass(frozen=True)
class DecisionGateway:
    """Exclusive choice. Branches live on the gateway's labeled outgoing flows."""

    id: str
    title: str
    role: str


@dataclass(frozen=True)
class StartNode:
    id: str
    title: Optional[str] = None


@dataclass(frozen=True)
class EndNode:
    id: str
    title: Optional[str] = None


Node = Union[Task, DecisionGateway, StartNode, EndNode]


@dataclass(frozen=True)
class Flow:
    source: str
    target: str
    branch: Optional[str] = None

    def sort_key(self):
        return (id_sort_key(self.source), id_sort_key(self.target), self.branch or "")


_DIGITS = re.compile(r"(\d+)")


def id_sort_key(ident: str) -> tuple:
    """Canonical id order: lexicographic, with digit runs compared numerically (t2 < t10)."""
    parts = _DIGITS.split(ident)
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in parts if p != "")


@dataclass(frozen=True)
class ProcessModel:
    name: str
    roles: tuple[Role, ...] = ()
    nodes: tuple[Node, ...] = ()
    flows: tuple[Flow, ...] = ()
    kind: ModelKind = ModelKind.ASIS

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise UnknownNodeError(node_id)

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    @property
    def tasks(self) -> list[Task]:
        return [n for n in self.nodes if isinstance(n, Task)]

    @property
    def gateways(self) -> list[DecisionGateway]:
        return [n for n in self.nodes if isinstance(n, DecisionGateway)]

    @property
    def start_nodes(self) -> list[StartNode]:
        return [n for n in self.nodes if isinstance(n, StartNode)]

    @property
    def end_nodes(self) -> list[EndNode]:
        return [n for n in self.nodes if isinstance(n, EndNode)]

    @property
    def start(self) -> StartNode:
        starts = self.start_nodes
        if len(starts) != 1:
            raise InvalidModelError(validate_model(self))
        return starts[0]

    def outgoing(self, node_id: str) -> list[Flow]:
        return [f for f in self.flows if f.source == node_id]

    def successors(self, node_id: str) -> list[str]:
        return [f.target for f in self.outgoing(node_id)]

    def branches(self, gateway_id: str) -> dict[str, str]:
        """Map branch label -> target for a gateway, in flow order."""
        return {f.branch: f.target for f in self.outgoing(gateway_id) if f.branch is not None}

    def normalized(self) -> "ProcessModel":
        """Same model with every collection in canonical order; equal iff structurally equal."""
        return replace(
            self,
            roles=tuple(sorted(self.roles, key=lambda r: id_sort_key(r.id))),
            nodes=tuple(
                sorted(
                    (replace(n, roles=tuple(sorted(n.roles, key=id_sort_key))) if isinstance(n, Task) else n
                     for n in self.nodes),
                    key=lambda n: (_NODE_ORDER[type(n)], id_sort_key(n.id)),
                )
            ),
            flows=tuple(sorted(self.flows, key=Flow.sort_key)),
        )

    def structurally_equals(self, other: "ProcessModel") -> bool:
        return self.normalized() == other.normalized()


# canonical section order: tasks, gateways, start, ends
_NODE_ORDER = {Task: 0, DecisionGateway: 1, StartNode: 2, EndNode: 3}


@dataclass(frozen=True)
class Violation:
    rule: str
    element: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.rule} at {self.element}"
        return f"{text}: {self.detail}" if self.detail else text


# Rules that depend on graph-wide reachability rather than local shape.
LIVENESS_RULES = frozenset({"unreachable-node", "end-unreachable"})


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def without(self, rules: Iterable[str]) -> "ValidationReport":
        drop = set(rules)
        return ValidationReport(tuple(v for v in self.violations if v.rule not in drop))


def _flow_ref(flow: Flow) -> str:
    ref = f"{flow.source}->{flow.target}"
    return f"{ref}[{flow.branch}]" if flow.branch is not None else ref


def validate_model(model: ProcessModel) -> ValidationReport:
    """Check every structural invariant and return all violations found.

    Violations are sorted by (rule, element), so the report does not depend on
    the declaration order of nodes or flows.
    """
    out: list[Violation] = []

    def add(rule, element, detail=""):
        out.append(Violation(rule, element, detail))

    seen_roles: set[str] = set()
    for role in model.roles:
        if role.id in seen_roles:
            add("duplicate-role-id", role.id)
        seen_roles.add(role.id)

    by_id: dict[str, Node] = {}
    for n in model.nodes:
        if n.id in by_id:
            add("duplicate-node-id", n.id)
        else:
            by_id[n.id] = n

    starts = model.start_nodes
    if not starts:
        add("no-start-node", model.name)
    elif len(starts) > 1:
        for s in starts:
            add("multiple-start-nodes", s.id)
    if not model.end_nodes:
        add("no-end-node", model.name)

    for task in model.tasks:
        if not task.roles:
            add("task-without-role", task.id)
        for r in task.roles:
            if r not in seen_roles:
                add("unknown-role", task.id, r)
        if model.kind == ModelKind.ASIS and task.label is not None:
            add("label-in-asis", task.id)
        if model.kind == ModelKind.TOBE and task.label is None:
            add("missing-label", task.id)
    for gw in model.gateways:
        if gw.role not in seen_roles:
            add("unknown-role", gw.id, gw.role)

    out_flows: dict[str, list[Flow]] = {}
    for f in model.flows:
        ok = True
        for end in (f.source, f.target):
            if end not in by_id:
                add("dangling-flow", _flow_ref(f), end)
                ok = False
        if not ok:
            continue
        out_flows.setdefault(f.source, []).append(f)
        if f.branch is not None and not isinstance(by_id[f.source], DecisionGateway):
            add("branch-on-non-gateway", _flow_ref(f))

    for node_id, node in by_id.items():
        flows = out_flows.get(node_id, [])
        if isinstance(node, EndNode):
            if flows:
                add("end-node-outflow", node_id)
        elif isinstance(node, (Task, StartNode)):
            if len(flows) != 1:
                rule = "task-outflow" if isinstance(node, Task) else "start-outflow"
                add(rule, node_id, f"{len(flows)} outgoing flows")
        else:
            labels = [f.branch for f in flows]
            if any(lbl is None for lbl in labels):
                add("gateway-unlabeled-flow", node_id)
            named = [lbl for lbl in labels if lbl is not None]
            if len(set(named)) != len(named):
                add("gateway-duplicate-branch", node_id)
            if len(set(named)) < 2:
                add("gateway-branch-count", node_id, f"{len(set(named))} branches")

    if len(starts) == 1 and starts[0].id in by_id:
        reach = _closure(out_flows, [starts[0].id], forward=True)
        for node_id in by_id:
            if node_id not in reach:
                add("unreachable-node", node_id)
    ends = [e.id for e in model.end_nodes]
    if ends:
        back = _closure(out_flows, ends, forward=False)
        for node_id in by_id:
            if node_id not in back:
                add("end-unreachable", node_id)

    out.sort(key=lambda v: (v.rule, id_sort_key(v.element), v.detail))
    return ValidationReport(tuple(dict.fromkeys(out)))


def _closure(out_flows: dict[str, list[Flow]], seeds: list[str], forward: bool) -> set[str]:
    if forward:
        adj = {k: [f.target for f in v] for k, v in out_flows.items()}
    else:
        adj: dict[str, list[str]] = {}
        for v in out_flows.values():
            for f in v:
                adj.setdefault(f.target, []).append(f.source)
    seen = set(seeds)
    queue = deque(seeds)
    while queue:
        cur = queue.popleft()
        for nxt in adj.get(cur, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def require_valid(model: ProcessModel, ignore: Iterable[str] = ()) -> None:
    report = validate_model(model).without(ignore)
    if not report.ok:
        raise InvalidModelError(report)


def role_task_index(model: ProcessModel) -> dict[str, list[str]]:
    """Map each role to the ids of the tasks it performs, in canonical task order.

    Roles that perform no task are left out.
    """
    require_valid(model)
    index: dict[str, list[str]] = {}
    role_order = sorted((r.id for r in model.roles), key=id_sort_key)
    for task in sorted(model.tasks, key=lambda t: id_sort_key(t.id)):
        for r in task.roles:
            index.setdefault(r, []).append(task.id)
    return {r: index[r] for r in role_order if r in index}


def reachable_from(model: ProcessModel, node_id: str) -> set[str]:
    if not model.has_node(node_id):
        raise UnknownNodeError(node_id)
    out_flows: dict[str, list[Flow]] = {}
    for f in model.flows:
        out_flows.setdefault(f.source, []).append(f)
    return _closure(out_flows, [node_id], forward=True)
