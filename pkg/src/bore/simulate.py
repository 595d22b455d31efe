"""Run a To-Be model as a finite state machine.

A-labeled tasks fire on their own. S tasks wait for an agent confirmation,
M tasks for an external completion, gateways for a branch choice. Any gateway
branch that can lead back to the same gateway is a retry branch; each gateway
may take its retry branches at most ``max_revision_rounds`` times per run.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional, Union

from .model import (
    LIVENESS_RULES,
    AutomationLabel,
    DecisionGateway,
    EndNode,
    InvalidModelError,
    ModelError,
    ModelKind,
    ProcessModel,
    Task,
    Violation,
    ValidationReport,
    reachable_from,
    validate_model,
)


class SimulationError(ModelError):
    pass


class EventMismatchError(SimulationError, ValueError):
    pass


class UnknownBranchError(SimulationError, KeyError):
    def __str__(self) -> str:
        return f"branch-unknown: {self.args[0]}"


class RevisionBudgetExceeded(SimulationError):
    def __init__(self, gateway: str, branch: str, limit: int):
        super().__init__(f"revision-budget-exceeded: {gateway} [{branch}] already taken {limit} time(s)")
        self.gateway = gateway
        self.branch = branch
        self.limit = limit


class LivelockError(SimulationError):
    """Automatic tasks keep firing without ever waiting or ending."""


class ScriptError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# events and state


@dataclass(frozen=True)
class AgentConfirm:
    task: str

    def line(self) -> str:
        return f"confirm {self.task}"


@dataclass(frozen=True)
class ExternalComplete:
    task: str

    def line(self) -> str:
        return f"complete {self.task}"


@dataclass(frozen=True)
class Choose:
    gateway: str
    branch: str

    def line(self) -> str:
        return f"choose {self.gateway} {self.branch}"


Event = Union[AgentConfirm, ExternalComplete, Choose]


class PendingKind(str, Enum):
    NONE = "none"
    AWAIT_AGENT = "await-agent"
    AWAIT_EXTERNAL = "await-external"
    AWAIT_CHOICE = "await-choice"


@dataclass(frozen=True)
class Pending:
    kind: PendingKind
    node: Optional[str] = None

    def __str__(self) -> str:
        return self.kind.value if self.node is None else f"{self.kind.value}({self.node})"


NO_PENDING = Pending(PendingKind.NONE)


@dataclass(frozen=True)
class LogEntry:
    seq: int
    node: str
    event: Optional[Event] = None  # None: automatic firing of an A task

    @property
    def is_auto(self) -> bool:
        return self.event is None

    def line(self) -> str:
        return f"auto {self.node}" if self.event is None else self.event.line()


@dataclass(frozen=True)
class SimState:
    model: ProcessModel = field(repr=False, compare=False)
    max_revision_rounds: int
    current: str
    pending: Pending
    rounds: tuple[tuple[str, int], ...] = ()
    log: tuple[LogEntry, ...] = ()
    path: tuple[str, ...] = ()

    @property
    def terminal(self) -> bool:
        return self.pending.kind is PendingKind.NONE

    def rounds_used(self, gateway: str) -> int:
        return dict(self.rounds).get(gateway, 0)

    @property
    def steps(self) -> int:
        return len(self.path) - 1


# ---------------------------------------------------------------------------
# running


def check_runnable(tobe: ProcessModel, liveness: bool = True) -> None:
    if tobe.kind != ModelKind.TOBE:
        raise InvalidModelError(ValidationReport((Violation("not-tobe", tobe.name, "model kind is asis"),)))
    report = validate_model(tobe)
    if not liveness:
        report = report.without(LIVENESS_RULES)
    if not report.ok:
        raise InvalidModelError(report)


@functools.lru_cache(maxsize=64)
def _retry_branches(model: ProcessModel) -> frozenset[tuple[str, str]]:
    out = set()
    for gw in model.gateways:
        for label, target in model.branches(gw.id).items():
            if gw.id in reachable_from(model, target):
                out.add((gw.id, label))
    return frozenset(out)


def retry_branches(model: ProcessModel) -> frozenset[tuple[str, str]]:
    """(gateway, branch) pairs whose target can loop back to the gateway."""
    return _retry_branches(model)


def _advance(state: SimState, node_id: str) -> SimState:
    """Enter ``node_id`` and keep going through start and A nodes until something waits."""
    model = state.model
    log = list(state.log)
    path = list(state.path)
    budget = len(model.nodes) + 1
    while True:
        path.append(node_id)
        node = model.node(node_id)
        if isinstance(node, EndNode):
            pending = NO_PENDING
        elif isinstance(node, DecisionGateway):
            pending = Pending(PendingKind.AWAIT_CHOICE, node_id)
        elif isinstance(node, Task) and node.label is AutomationLabel.S:
            pending = Pending(PendingKind.AWAIT_AGENT, node_id)
        elif isinstance(node, Task) and node.label is AutomationLabel.M:
            pending = Pending(PendingKind.AWAIT_EXTERNAL, node_id)
        else:
            if isinstance(node, Task):
                log.append(LogEntry(len(log) + 1, node_id))
            budget -= 1
            if budget < 0:
                raise LivelockError(f"automatic tasks cycle forever starting at {node_id}")
            (node_id,) = model.successors(node_id)
            continue
        return replace(state, current=node.id, pending=pending, log=tuple(log), path=tuple(path))


def start_run(tobe: ProcessModel, max_revision_rounds: int = 1) -> SimState:
    check_runnable(tobe, liveness=False)
    if max_revision_rounds < 0:
        raise ValueError("max_revision_rounds must be non-negative")
    start = tobe.start
    seed = SimState(tobe, max_revision_rounds, start.id, NO_PENDING)
    return _advance(seed, start.id)


def apply_event(state: SimState, event: Event) -> SimState:
    pending = state.pending
    model = state.model
    expected = {
        AgentConfirm: PendingKind.AWAIT_AGENT,
        ExternalComplete: PendingKind.AWAIT_EXTERNAL,
        Choose: PendingKind.AWAIT_CHOICE,
    }.get(type(event))
    if expected is None:
        raise TypeError(f"not an event: {event!r}")
    node = event.gateway if isinstance(event, Choose) else event.task
    if pending.kind is not expected or pending.node != node:
        raise EventMismatchError(f"event-mismatch: got '{event.line()}' while {pending}")

    rounds = state.rounds
    if isinstance(event, Choose):
        branches = model.branches(event.gateway)
        if event.branch not in branches:
            raise UnknownBranchError(f"{event.gateway} has no branch {event.branch!r}")
        target = branches[event.branch]
        if (event.gateway, event.branch) in retry_branches(model):
            used = state.rounds_used(event.gateway)
            if used >= state.max_revision_rounds:
                raise RevisionBudgetExceeded(event.gateway, event.branch, state.max_revision_rounds)
            counts = dict(rounds)
            counts[event.gateway] = used + 1
            rounds = tuple(sorted(counts.items()))
    else:
        (target,) = model.successors(node)

    entry = LogEntry(len(state.log) + 1, node, event)
    return _advance(replace(state, rounds=rounds, log=state.log + (entry,)), target)


def run_script(tobe: ProcessModel, events: Iterable[Event], max_revision_rounds: int = 1) -> SimState:
    state = start_run(tobe, max_revision_rounds)
    for ev in events:
        state = apply_event(state, ev)
    return state


def events_of(log: Iterable[LogEntry]) -> list[Event]:
    return [e.event for e in log if e.event is not None]


def replay(tobe: ProcessModel, log: Iterable[LogEntry], max_revision_rounds: int = 1) -> SimState:
    """Feed the non-automatic entries of a log into a fresh run."""
    return run_script(tobe, events_of(log), max_revision_rounds)


def expected_event(state: SimState) -> Optional[Event]:
    """The single event that satisfies a non-choice wait, if any."""
    p = state.pending
    if p.kind is PendingKind.AWAIT_AGENT:
        return AgentConfirm(p.node)
    if p.kind is PendingKind.AWAIT_EXTERNAL:
        return ExternalComplete(p.node)
    return None


# ---------------------------------------------------------------------------
# scripts and logs


def parse_events(text: str) -> list[Event]:
    """``confirm <task>``, ``complete <task>``, ``choose <gateway> <branch>``; ``#`` comments."""
    return [e.event for e in _parse_lines(text, allow_auto=False)]


def parse_log(text: str) -> list[LogEntry]:
    return _parse_lines(text, allow_auto=True)


def _parse_lines(text: str, allow_auto: bool) -> list[LogEntry]:
    out: list[LogEntry] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        kind, args = parts[0], parts[1:]
        arity = {"confirm": 1, "complete": 1, "choose": 2, "auto": 1}.get(kind)
        if arity is None or (kind == "auto" and not allow_auto):
            raise ScriptError(lineno, f"unknown event kind {kind!r}")
        if len(args) != arity:
            raise ScriptError(lineno, f"{kind} takes {arity} argument(s), got {len(args)}")
        if kind == "auto":
            out.append(LogEntry(len(out) + 1, args[0]))
            continue
        event = {"confirm": AgentConfirm, "complete": ExternalComplete, "choose": Choose}[kind](*args)
        out.append(LogEntry(len(out) + 1, args[0], event))
    return out


def format_log(log: Iterable[LogEntry]) -> str:
    return "".join(entry.line() + "\n" for entry in log)


# ---------------------------------------------------------------------------
# exhaustive exploration


def step_bound(tobe: ProcessModel, max_revision_rounds: int) -> int:
    n = len(tobe.nodes)
    return n * (1 + max_revision_rounds) + n


@dataclass
class Exploration:
    complete: list[tuple[str, ...]] = field(default_factory=list)
    stuck: list[tuple[str, ...]] = field(default_factory=list)


def explore(tobe: ProcessModel, max_revision_rounds: int = 1, step_limit: Optional[int] = None) -> Exploration:
    """Depth-first walk over every choice sequence.

    Paths that reach an end node go to ``complete``. Paths cut off by the step
    limit, by a livelock, or at a gateway whose every branch is refused by the
    revision budget go to ``stuck``. Refused branches are not explored.
    """
    limit = step_bound(tobe, max_revision_rounds) if step_limit is None else step_limit
    result = Exploration()
    try:
        first = start_run(tobe, max_revision_rounds)
    except LivelockError:
        result.stuck.append((tobe.start.id,))
        return result
    stack = [first]
    while stack:
        state = stack.pop()
        if state.terminal:
            result.complete.append(state.path)
            continue
        if state.steps > limit:
            result.stuck.append(state.path)
            continue
        if state.pending.kind is PendingKind.AWAIT_CHOICE:
            gw = state.pending.node
            moves = [Choose(gw, label) for label in reversed(model_branch_labels(tobe, gw))]
        else:
            moves = [expected_event(state)]
        advanced = False
        for ev in moves:
            try:
                stack.append(apply_event(state, ev))
                advanced = True
            except RevisionBudgetExceeded:
                continue
            except LivelockError:
                break
        if not advanced:
            # every branch refused by the budget, or automatic tasks spin
            result.stuck.append(state.path)
    return result


def model_branch_labels(model: ProcessModel, gateway: str) -> list[str]:
    return sorted(model.branches(gateway))


def enumerate_outcomes(tobe: ProcessModel, max_revision_rounds: int = 1) -> dict[str, int]:
    """Distinct path count per reachable end node under the revision bound."""
    check_runnable(tobe)
    counts: dict[str, int] = {}
    for path in explore(tobe, max_revision_rounds).complete:
        counts[path[-1]] = counts.get(path[-1], 0) + 1
    return dict(sorted(counts.items()))


@dataclass(frozen=True)
class TerminationReport:
    terminates: bool
    max_steps: int
    bound: int


def check_termination(tobe: ProcessModel, max_revision_rounds: int = 1) -> TerminationReport:
    """Whether every run reaches an end node within the step bound.

    Only local shape is required here; unreachable nodes and trap cycles are
    exactly what this check is meant to expose.
    """
    check_runnable(tobe, liveness=False)
    bound = step_bound(tobe, max_revision_rounds)
    ex = explore(tobe, max_revision_rounds, bound)
    lengths = [len(p) - 1 for p in ex.complete + ex.stuck]
    return TerminationReport(
        terminates=not ex.stuck and bool(ex.complete),
        max_steps=max(lengths, default=0),
        bound=bound,
    )
