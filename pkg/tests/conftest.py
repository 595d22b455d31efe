from __future__ import annotations

import pytest

from bore import fixture_text
from bore.decision import decide_all
from bore.textfmt import parse_annotations, parse_model
from bore.transform import derive_tobe

TABLE1 = {
    "t1": "A", "t2": "S", "t3": "A", "t4": "A", "t5": "M", "t6": "M", "t7": "A", "t8": "M",
    "t9": "M", "t10": "M", "t11": "M", "t12": "S", "t13": "A", "t14": "S", "t15": "S",
    "t16": "S", "t17": "S", "t18": "M", "t19": "A", "t20": "S", "t21": "M", "t22": "M",
}

MINIMAL = """process "P"
role r
task t1 "Do" role=r
flow s -> t1
flow t1 -> e
start s
end e
"""


@pytest.fixture(scope="session")
def journal_asis():
    return parse_model(fixture_text("journal.asis"))


@pytest.fixture(scope="session")
def journal_annot():
    return parse_annotations(fixture_text("journal.annot"))


@pytest.fixture(scope="session")
def journal_decisions(journal_asis, journal_annot):
    return decide_all(journal_asis, journal_annot)


@pytest.fixture(scope="session")
def journal_tobe(journal_asis, journal_decisions):
    return derive_tobe(journal_asis, journal_decisions)


@pytest.fixture
def minimal():
    return parse_model(MINIMAL)
