"""To-Be derivation, model diffs, perspective classification and use-case extraction."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Iterable, Mapping, Optional, Sequence, Union

from .decision import LabeledDecision
from .model import (
    AutomationLabel,
    Flow,
    ModelError,
    ModelKind,
    Node,
    ProcessModel,
    Role,
    Task,
    id_sort_key,
    require_valid,
)
from .textfmt import quote


class CoverageMismatchError(ModelError, ValueError):
    def __init__(self, missing=(), unknown=(), duplicated=()):
        self.missing = tuple(missing)
        self.unknown = tuple(unknown)
        self.duplicated = tuple(duplicated)
        parts = []
        if self.missing:
            parts.append("no decision for " + ", ".join(self.missing))
        if self.unknown:
            parts.append("decision for unknown task " + ", ".join(self.unknown))
        if self.duplicated:
            parts.append("several decisions for " + ", ".join(self.duplicated))
        super().__init__("coverage-mismatch: " + "; ".join(parts))


class NonPartitionError(ModelError, ValueError):
    def __init__(self, unassigned=(), repeated=(), unknown=()):
        self.unassigned = tuple(unassigned)
        self.repeated = tuple(repeated)
        self.unknown = tuple(unknown)
        parts = []
        if self.unassigned:
            parts.append("in no package: " + ", ".join(self.unassigned))
        if self.repeated:
            parts.append("in several packages: " + ", ".join(self.repeated))
        if self.unknown:
            parts.append("not a task: " + ", ".join(self.unknown))
        super().__init__("non-partition: " + "; ".join(parts))


class UnknownActorError(ModelError, KeyError):
    def __init__(self, actors: Iterable[str]):
        self.actors = tuple(actors)
        super().__init__(self.actors)

    def __str__(self) -> str:
        return "unknown-actor: " + ", ".join(self.actors)


# ---------------------------------------------------------------------------
# changes


@dataclass(frozen=True)
class LabelAssigned:
    task: str
    label: Optional[AutomationLabel]

    def ids(self) -> list[str]:
        return [self.task, self.label.value if self.label is not None else "-"]


@dataclass(frozen=True)
class NodeAdded:
    node: Node

    def ids(self) -> list[str]:
        return [self.node.id]


@dataclass(frozen=True)
class NodeRemoved:
    node_id: str

    def ids(self) -> list[str]:
        return [self.node_id]


@dataclass(frozen=True)
class FlowAdded:
    flow: Flow

    def ids(self) -> list[str]:
        return _flow_ids(self.flow)


@dataclass(frozen=True)
class FlowRemoved:
    flow: Flow

    def ids(self) -> list[str]:
        return _flow_ids(self.flow)


@dataclass(frozen=True)
class RoleAdded:
    role: Role

    def ids(self) -> list[str]:
        return [self.role.id]


@dataclass(frozen=True)
class RoleRemoved:
    role_id: str

    def ids(self) -> list[str]:
        return [self.role_id]


@dataclass(frozen=True)
class ProcessRenamed:
    old: str
    new: str

    def ids(self) -> list[str]:
        return [quote(self.old), quote(self.new)]


Change = Union[
    LabelAssigned, NodeAdded, NodeRemoved, FlowAdded, FlowRemoved, RoleAdded, RoleRemoved, ProcessRenamed
]
CHANGE_TYPES = (LabelAssigned, NodeAdded, NodeRemoved, FlowAdded, FlowRemoved, RoleAdded, RoleRemoved, ProcessRenamed)


def _flow_ids(flow: Flow) -> list[str]:
    ids = [flow.source, flow.target]
    if flow.branch is not None:
        ids.append(f"[{flow.branch}]")
    return ids


@dataclass(frozen=True)
class ChangeSet:
    changes: tuple[Change, ...] = ()

    def __iter__(self):
        return iter(self.changes)

    def __len__(self) -> int:
        return len(self.changes)

    def report(self, mapping: Optional[Mapping[type, "PerspectiveLevel"]] = None) -> str:
        """One line per change: ``<LEVEL> <KIND> <ids...>``."""
        lines = []
        for c in self.changes:
            level = classify_change(c, mapping)
            lines.append(" ".join([level.name, type(c).__name__.upper(), *c.ids()]))
        return "".join(line + "\n" for line in lines)


class PerspectiveLevel(IntEnum):
    """Change perspectives from the most general (strategic) to the most detailed."""

    SYSTEMINFORMATION = 1
    BUSINESSPROCESS = 2
    ORGANIZATIONAL = 3
    STRATEGIC = 4


DEFAULT_PERSPECTIVES: dict[type, PerspectiveLevel] = {
    ProcessRenamed: PerspectiveLevel.STRATEGIC,
    RoleAdded: PerspectiveLevel.ORGANIZATIONAL,
    RoleRemoved: PerspectiveLevel.ORGANIZATIONAL,
    NodeAdded: PerspectiveLevel.BUSINESSPROCESS,
    NodeRemoved: PerspectiveLevel.BUSINESSPROCESS,
    FlowAdded: PerspectiveLevel.BUSINESSPROCESS,
    FlowRemoved: PerspectiveLevel.BUSINESSPROCESS,
    LabelAssigned: PerspectiveLevel.SYSTEMINFORMATION,
}


def classify_change(change: Change, mapping: Optional[Mapping[type, PerspectiveLevel]] = None) -> PerspectiveLevel:
    table = DEFAULT_PERSPECTIVES if mapping is None else {**DEFAULT_PERSPECTIVES, **mapping}
    return table[type(change)]


# ---------------------------------------------------------------------------
# To-Be derivation


def derive_tobe(asis: ProcessModel, decisions: Sequence[LabeledDecision]) -> ProcessModel:
    """Copy an As-Is model with every task carrying its decided label."""
    if asis.kind != ModelKind.ASIS:
        raise ValueError("derive_tobe expects an As-Is model")
    require_valid(asis)
    task_ids = {t.id for t in asis.tasks}
    seen = Counter(d.task for d in decisions)
    missing = sorted(task_ids - set(seen), key=id_sort_key)
    unknown = sorted(set(seen) - task_ids, key=id_sort_key)
    duplicated = sorted((t for t, n in seen.items() if n > 1), key=id_sort_key)
    if missing or unknown or duplicated:
        raise CoverageMismatchError(missing, unknown, duplicated)
    labels = {d.task: d.label for d in decisions}
    nodes = tuple(replace(n, label=labels[n.id]) if isinstance(n, Task) else n for n in asis.nodes)
    return replace(asis, nodes=nodes, kind=ModelKind.TOBE)


# ---------------------------------------------------------------------------
# diff / apply


def diff_models(a: ProcessModel, b: ProcessModel) -> ChangeSet:
    """Minimal change set turning ``a`` into ``b``.

    Nodes and roles are matched by id. A task whose only difference is its
    label yields LabelAssigned; any other difference yields remove + add.
    Ordering: removals, additions, label changes, rename.
    """
    require_valid(a)
    require_valid(b)
    a, b = a.normalized(), b.normalized()
    node_key = lambda n: id_sort_key(n.id)  # noqa: E731

    roles_a = {r.id: r for r in a.roles}
    roles_b = {r.id: r for r in b.roles}
    role_removed = [rid for rid, r in roles_a.items() if roles_b.get(rid) != r]
    role_added = [r for rid, r in roles_b.items() if roles_a.get(rid) != r]

    nodes_a = {n.id: n for n in a.nodes}
    nodes_b = {n.id: n for n in b.nodes}
    node_removed, node_added, labels = [], [], []
    for nid, na in nodes_a.items():
        nb = nodes_b.get(nid)
        if nb is None:
            node_removed.append(nid)
        elif na != nb:
            if isinstance(na, Task) and isinstance(nb, Task) and replace(na, label=nb.label) == nb:
                labels.append(LabelAssigned(nid, nb.label))
            else:
                node_removed.append(nid)
                node_added.append(nb)
    node_added.extend(n for nid, n in nodes_b.items() if nid not in nodes_a)

    flows_a, flows_b = Counter(a.flows), Counter(b.flows)
    flow_removed = list((flows_a - flows_b).elements())
    flow_added = list((flows_b - flows_a).elements())

    changes: list[Change] = []
    changes += [FlowRemoved(f) for f in sorted(flow_removed, key=Flow.sort_key)]
    changes += [NodeRemoved(nid) for nid in sorted(node_removed, key=id_sort_key)]
    changes += [RoleRemoved(rid) for rid in sorted(role_removed, key=id_sort_key)]
    changes += [RoleAdded(r) for r in sorted(role_added, key=lambda r: id_sort_key(r.id))]
    changes += [NodeAdded(n) for n in sorted(node_added, key=node_key)]
    changes += [FlowAdded(f) for f in sorted(flow_added, key=Flow.sort_key)]
    changes += sorted(labels, key=lambda c: id_sort_key(c.task))
    if a.name != b.name:
        changes.append(ProcessRenamed(a.name, b.name))
    return ChangeSet(tuple(changes))


def _inferred_kind(tasks: Sequence[Task], fallback: ModelKind) -> ModelKind:
    if tasks and all(t.label is not None for t in tasks):
        return ModelKind.TOBE
    if tasks and all(t.label is None for t in tasks):
        return ModelKind.ASIS
    return fallback


def apply_changes(
    model: ProcessModel, changes: Iterable[Change], kind: Optional[ModelKind] = None
) -> ProcessModel:
    """Apply a change set.

    Unless ``kind`` is given, the result's kind follows its labels: all labeled
    is To-Be, none is As-Is. A model without tasks keeps the source kind, since
    no change records the kind itself.
    """
    name = model.name
    roles = {r.id: r for r in model.roles}
    nodes = {n.id: n for n in model.nodes}
    flows = list(model.flows)
    for c in changes:
        if isinstance(c, LabelAssigned):
            nodes[c.task] = replace(nodes[c.task], label=c.label)
        elif isinstance(c, NodeAdded):
            nodes[c.node.id] = c.node
        elif isinstance(c, NodeRemoved):
            del nodes[c.node_id]
        elif isinstance(c, FlowAdded):
            flows.append(c.flow)
        elif isinstance(c, FlowRemoved):
            flows.remove(c.flow)
        elif isinstance(c, RoleAdded):
            roles[c.role.id] = c.role
        elif isinstance(c, RoleRemoved):
            del roles[c.role_id]
        elif isinstance(c, ProcessRenamed):
            name = c.new
        else:
            raise TypeError(f"not a change: {c!r}")
    tasks = [n for n in nodes.values() if isinstance(n, Task)]
    if kind is None:
        kind = _inferred_kind(tasks, model.kind)
    result = ProcessModel(name, tuple(roles.values()), tuple(nodes.values()), tuple(flows), kind)
    return result.normalized()


# ---------------------------------------------------------------------------
# use cases


@dataclass(frozen=True)
class UseCasePackage:
    name: str
    use_cases: tuple[str, ...]


@dataclass(frozen=True)
class UseCaseModel:
    actors: tuple[str, ...]
    packages: tuple[UseCasePackage, ...]
    associations: frozenset[tuple[str, str]]
    titles: Mapping[str, str]

    def association_counts(self) -> dict[str, int]:
        counts = {a: 0 for a in self.actors}
        for actor, _ in self.associations:
            counts[actor] += 1
        return counts

    def sorted_associations(self) -> list[tuple[str, str]]:
        return sorted(self.associations, key=lambda p: (id_sort_key(p[0]), id_sort_key(p[1])))


def extract_use_cases(
    model: ProcessModel,
    packages: Sequence[tuple[str, Sequence[str]]],
    actors: Iterable[str],
) -> UseCaseModel:
    actor_set = set(actors)
    role_order = [r.id for r in model.roles]
    unknown_actors = sorted(actor_set - set(role_order), key=id_sort_key)
    if unknown_actors:
        raise UnknownActorError(unknown_actors)

    tasks = {t.id: t for t in model.tasks}
    membership = Counter(tid for _, ids in packages for tid in ids)
    unassigned = sorted(set(tasks) - set(membership), key=id_sort_key)
    repeated = sorted((t for t, n in membership.items() if n > 1 and t in tasks), key=id_sort_key)
    unknown = sorted(set(membership) - set(tasks), key=id_sort_key)
    if unassigned or repeated or unknown:
        raise NonPartitionError(unassigned, repeated, unknown)

    associations = frozenset((r, tid) for tid, t in tasks.items() for r in t.roles if r in actor_set)
    return UseCaseModel(
        actors=tuple(sorted(actor_set, key=id_sort_key)),
        packages=tuple(UseCasePackage(name, tuple(ids)) for name, ids in packages),
        associations=associations,
        titles={tid: t.title for tid, t in tasks.items()},
    )
