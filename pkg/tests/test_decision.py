from fractions import Fraction
from itertools import product

import pytest

from bore.decision import (
    LabeledDecision,
    MissingAnnotationError,
    Provenance,
    UnknownTaskError,
    automation_metrics,
    decide_all,
    default_label,
    format_decisions,
    score,
)
from bore.model import AutomationLabel, ProcessModel
from bore.textfmt import Annotation, AnnotationSet, Level
from conftest import TABLE1

H, M_, L = Level.HIGH, Level.MEDIUM, Level.LOW
A, S, M = AutomationLabel.A, AutomationLabel.S, AutomationLabel.M

# (benefit, cost) per row of the sub-process table, as printed
TABLE1_CELLS = {
    "t1": (H, L), "t2": (L, L), "t3": (H, L), "t4": (H, L), "t5": (M_, H), "t6": (M_, H),
    "t7": (H, L), "t8": (L, M_), "t9": (L, H), "t10": (L, L), "t11": (L, H), "t12": (H, H),
    "t13": (H, L), "t14": (H, M_), "t15": (H, M_), "t16": (H, L), "t17": (H, L), "t18": (L, H),
    "t19": (H, L), "t20": (H, L), "t21": (L, M_), "t22": (L, H),
}


@pytest.mark.parametrize("b, c, expected", [(H, L, 2), (M_, M_, 0), (L, H, -2)])
def test_score(b, c, expected):
    assert score(b, c) == expected


@pytest.mark.parametrize("b, c, expected", [(H, L, A), (M_, H, M), (H, M_, S), (M_, L, S)])
def test_default_label(b, c, expected):
    assert default_label(b, c) is expected


def test_default_rule_agreement_with_table():
    agree = [t for t, (b, c) in TABLE1_CELLS.items() if default_label(b, c).value == TABLE1[t]]
    disagree = sorted(set(TABLE1) - set(agree), key=lambda t: int(t[1:]))
    assert len(agree) == 18
    assert disagree == ["t10", "t16", "t17", "t20"]


def test_default_rule_monotone_over_grid():
    levels = [L, M_, H]
    for c in levels:
        labels = [default_label(b, c) for b in levels]
        assert labels == sorted(labels)
    for b in levels:
        labels = [default_label(b, c) for c in levels]
        assert labels == sorted(labels, reverse=True)


def test_no_other_monotone_threshold_rule_beats_default():
    # every step rule: A if score >= hi, S if score >= lo, else M
    best = 0
    for lo, hi in product(range(-2, 4), repeat=2):
        if lo > hi:
            continue
        def rule(b, c):
            s = b.rank - c.rank
            return "A" if s >= hi else "S" if s >= lo else "M"
        best = max(best, sum(rule(b, c) == TABLE1[t] for t, (b, c) in TABLE1_CELLS.items()))
    assert best == 18


def test_decide_all_reproduces_table(journal_decisions):
    assert {d.task: d.label.value for d in journal_decisions} == TABLE1
    assert [d.task for d in journal_decisions] == [f"t{i}" for i in range(1, 23)]
    overrides = [d for d in journal_decisions if d.provenance is Provenance.OVERRIDE]
    assert sorted(d.task for d in overrides) == ["t10", "t16", "t17", "t20"]
    assert all(d.reason for d in overrides)


def test_decide_all_without_overrides(journal_asis, journal_annot):
    plain = AnnotationSet({t: Annotation(a.benefit, a.cost) for t, a in journal_annot.entries.items()})
    got = {d.task: d.label.value for d in decide_all(journal_asis, plain)}
    flipped = {t for t in TABLE1 if got[t] != TABLE1[t]}
    assert flipped == {"t10", "t16", "t17", "t20"}
    assert got["t16"] == got["t17"] == got["t20"] == "A"
    assert got["t10"] == "S"


def test_decide_all_is_repeatable(journal_asis, journal_annot):
    first = format_decisions(decide_all(journal_asis, journal_annot))
    assert first == format_decisions(decide_all(journal_asis, journal_annot))
    assert first.count(" override ") == 4


def test_decide_all_empty():
    assert decide_all(ProcessModel("empty"), AnnotationSet()) == []


def test_decide_all_missing_annotation(journal_asis, journal_annot):
    partial = AnnotationSet({t: a for t, a in journal_annot.entries.items() if t != "t7"})
    with pytest.raises(MissingAnnotationError) as exc:
        decide_all(journal_asis, partial)
    assert exc.value.task_id == "t7"


def test_decide_all_unknown_task(journal_asis, journal_annot):
    extra = AnnotationSet({**journal_annot.entries, "t99": Annotation(H, L)})
    with pytest.raises(UnknownTaskError):
        decide_all(journal_asis, extra)


def test_override_needs_reason():
    with pytest.raises(ValueError):
        LabeledDecision("t1", A, Provenance.OVERRIDE, "  ")


def test_metrics_table(journal_decisions):
    m = automation_metrics(journal_decisions)
    assert m.counts == {A: 6, S: 7, M: 9}
    assert m.automation_degree == Fraction(19, 44)
    assert m.as_kv() == "A=6\nS=7\nM=9\nautomation_degree=19/44\n"


def test_metrics_all_automatic():
    m = automation_metrics([LabeledDecision(f"t{i}", A) for i in range(5)])
    assert m.counts == {A: 5, S: 0, M: 0}
    assert m.automation_degree == 1


def test_metrics_empty():
    m = automation_metrics([])
    assert m.counts == {A: 0, S: 0, M: 0}
    assert m.automation_degree == 0
    assert m.total == 0
