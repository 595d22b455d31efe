"""As-Is/To-Be process modeling toolkit: parse, decide, transform, simulate, render."""
from __future__ import annotations

from importlib import resources

from .decision import (
    LabeledDecision,
    Metrics,
    Provenance,
    automation_metrics,
    decide_all,
    default_label,
    score,
)
from .model import (
    AutomationLabel,
    DecisionGateway,
    EndNode,
    Flow,
    InvalidModelError,
    ModelKind,
    ProcessModel,
    Role,
    StartNode,
    Task,
    ValidationReport,
    reachable_from,
    role_task_index,
    validate_model,
)
from .render import RenderStyle, process_to_dot, usecase_to_dot
from .simulate import (
    AgentConfirm,
    Choose,
    ExternalComplete,
    apply_event,
    check_termination,
    enumerate_outcomes,
    start_run,
)
from .textfmt import (
    Annotation,
    AnnotationSet,
    Level,
    ParseError,
    parse_annotations,
    parse_model,
    parse_packages,
    serialize_model,
)
from .transform import (
    ChangeSet,
    PerspectiveLevel,
    UseCaseModel,
    classify_change,
    derive_tobe,
    diff_models,
    extract_use_cases,
)

FIXTURES = ("journal.asis", "journal.annot", "journal.packages", "table1.golden",
            "accept.events", "reject.events", "revise.events")


def fixture_text(name: str) -> str:
    """Contents of a bundled fixture file, e.g. ``fixture_text("journal.asis")``."""
    return resources.files(__name__).joinpath("fixtures", name).read_text(encoding="utf-8")


__all__ = [
    "FIXTURES",
    "fixture_text",
    "LabeledDecision",
    "Metrics",
    "Provenance",
    "automation_metrics",
    "decide_all",
    "default_label",
    "score",
    "AutomationLabel",
    "DecisionGateway",
    "EndNode",
    "Flow",
    "InvalidModelError",
    "ModelKind",
    "ProcessModel",
    "Role",
    "StartNode",
    "Task",
    "ValidationReport",
    "reachable_from",
    "role_task_index",
    "validate_model",
    "RenderStyle",
    "process_to_dot",
    "usecase_to_dot",
    "AgentConfirm",
    "Choose",
    "ExternalComplete",
    "apply_event",
    "check_termination",
    "enumerate_outcomes",
    "start_run",
    "Annotation",
    "AnnotationSet",
    "Level",
    "ParseError",
    "parse_annotations",
    "parse_model",
    "parse_packages",
    "serialize_model",
    "ChangeSet",
    "PerspectiveLevel",
    "UseCaseModel",
    "classify_change",
    "derive_tobe",
    "diff_models",
    "extract_use_cases",
]
