"""A/S/M automation decisions from benefit/cost annotations.

Each task gets a label from a default scoring rule unless the annotation file
carries an explicit override, which must state a reason.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional

from .model import AutomationLabel, ModelError, ProcessModel, id_sort_key
from .textfmt import AnnotationSet, Level, quote


class MissingAnnotationError(ModelError, KeyError):
    def __init__(self, task_id: str):
        super().__init__(task_id)
        self.task_id = task_id

    def __str__(self) -> str:
        return f"missing-annotation: {self.task_id}"


class UnknownTaskError(ModelError, KeyError):
    def __init__(self, task_id: str):
        super().__init__(task_id)
        self.task_id = task_id

    def __str__(self) -> str:
        return f"unknown-task: {self.task_id}"


class Provenance(str, Enum):
    DEFAULT_RULE = "default"
    OVERRIDE = "override"


@dataclass(frozen=True)
class LabeledDecision:
    task: str
    label: AutomationLabel
    provenance: Provenance = Provenance.DEFAULT_RULE
    reason: Optional[str] = None

    def __post_init__(self):
        if self.provenance is Provenance.OVERRIDE and not (self.reason and self.reason.strip()):
            raise ValueError(f"override decision for {self.task} needs a reason")

    @property
    def is_override(self) -> bool:
        return self.provenance is Provenance.OVERRIDE


def score(benefit: Level, cost: Level) -> int:
    return benefit.rank - cost.rank


def default_label(benefit: Level, cost: Level) -> AutomationLabel:
    """A when benefit outranks cost by two levels, M when cost outranks benefit, else S."""
    s = score(benefit, cost)
    if s >= 2:
        return AutomationLabel.A
    if s >= 0:
        return AutomationLabel.S
    return AutomationLabel.M


def decide_all(model: ProcessModel, annotations: AnnotationSet) -> list[LabeledDecision]:
    task_ids = sorted((t.id for t in model.tasks), key=id_sort_key)
    known = set(task_ids)
    for tid in sorted(annotations.entries, key=id_sort_key):
        if tid not in known:
            raise UnknownTaskError(tid)
    decisions = []
    for tid in task_ids:
        if tid not in annotations:
            raise MissingAnnotationError(tid)
        a = annotations[tid]
        if a.override is not None:
            decisions.append(LabeledDecision(tid, a.override.label, Provenance.OVERRIDE, a.override.reason))
        else:
            decisions.append(LabeledDecision(tid, default_label(a.benefit, a.cost)))
    return decisions


@dataclass(frozen=True)
class Metrics:
    counts: dict[AutomationLabel, int]
    automation_degree: Fraction

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def as_kv(self) -> str:
        """Machine-readable listing with stable key order."""
        return (
            f"A={self.counts[AutomationLabel.A]}\n"
            f"S={self.counts[AutomationLabel.S]}\n"
            f"M={self.counts[AutomationLabel.M]}\n"
            f"automation_degree={self.automation_degree}\n"
        )

    def as_report(self) -> str:
        degree = self.automation_degree
        return (
            f"tasks:             {self.total}\n"
            f"automatic (A):     {self.counts[AutomationLabel.A]}\n"
            f"supported (S):     {self.counts[AutomationLabel.S]}\n"
            f"manual (M):        {self.counts[AutomationLabel.M]}\n"
            f"automation degree: {degree} ({float(degree):.4f})\n"
        )


def automation_metrics(decisions: Iterable[LabeledDecision]) -> Metrics:
    """Counts per label and (A + S/2) / total, with an empty list scoring 0."""
    counts = {label: 0 for label in AutomationLabel}
    for d in decisions:
        counts[d.label] += 1
    total = sum(counts.values())
    if total == 0:
        return Metrics(counts, Fraction(0))
    degree = (Fraction(counts[AutomationLabel.A]) + Fraction(counts[AutomationLabel.S], 2)) / total
    return Metrics(counts, degree)


def format_decisions(decisions: Iterable[LabeledDecision]) -> str:
    lines = []
    for d in decisions:
        line = f"{d.task} {d.label.value} {d.provenance.value}"
        if d.is_override:
            line += f" reason={quote(d.reason)}"
        lines.append(line)
    return "".join(line + "\n" for line in lines)
