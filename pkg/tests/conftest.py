import pytest

from factforge import load_descriptions, load_kb
from factforge.synth import (
    KIND_AUXILIARY,
    KIND_ENTITY,
    KIND_RELATION,
    KIND_SEPARATOR,
    STRATEGY_ENTITY_WIKI,
    STRATEGY_EVIDENCE,
    STRATEGY_KNOWLEDGE_WALK,
)

KEPLER_LINES = [
    "Johannes Kepler\tborn in\tItaly",
    "Johannes Kepler\tauthor of\tAstronomia nova",
]

CLINTON_LINES = [
    "Hillary Clinton\tparty affiliation\tDemocratic Party",
]

CLINTON_DESC_LINES = [
    "Hillary Clinton\tHillary Diane Rodham Clinton is an American politician, "
    "Member of the Democratic Party, she was the nominee ...",
]

EDINBURGH_LINES = [
    "University of Edinburgh\tlocated in\tScotland",
    "Scotland\tlocated in\tEurope",
    "Europe\tis a\tcontinent",
]

K4_NODES = ["north", "south", "east", "west"]
K4_LINES = [
    f"{a}\tlinked to\t{b}" for a in K4_NODES for b in K4_NODES if a != b
]

CHAIN_LINES = ["alpha\tfeeds\tbeta"]  # beta is a sink

CYCLE_LINES = [
    "one\tnext\ttwo",
    "two\tnext\tthree",
    "three\tnext\tone",
]


@pytest.fixture
def kepler_kb():
    return load_kb(KEPLER_LINES)


@pytest.fixture
def clinton_kb():
    return load_kb(CLINTON_LINES)


@pytest.fixture
def clinton_desc(clinton_kb):
    return load_descriptions(CLINTON_DESC_LINES, clinton_kb)


@pytest.fixture
def edinburgh_kb():
    return load_kb(EDINBURGH_LINES)


@pytest.fixture
def k4_kb():
    return load_kb(K4_LINES)


@pytest.fixture
def chain_kb():
    return load_kb(CHAIN_LINES)


@pytest.fixture
def cycle_kb():
    return load_kb(CYCLE_LINES)


def verify_document_provenance(kb, doc) -> int:
    """Independent verifier: walk the unit sequence, re-resolve every
    (entity, relation, entity) triple by surface, and look it up in the KB.

    Returns the number of triples checked; raises AssertionError on any
    violation. Deliberately ignores the document's provenance field.
    """
    relation_ids = {name: i for i, name in enumerate(kb.relation_names)}

    def resolve(e_unit, r_unit, t_unit):
        assert e_unit.kind == KIND_ENTITY and t_unit.kind == KIND_ENTITY
        assert r_unit.kind == KIND_RELATION
        s = kb.entity_id(e_unit.surface)
        r = relation_ids.get(r_unit.surface)
        t = kb.entity_id(t_unit.surface)
        assert s is not None and r is not None and t is not None
        assert kb.has_edge(s, r, t), (e_unit.surface, r_unit.surface, t_unit.surface)

    units = doc.units
    checked = 0
    if doc.strategy == STRATEGY_ENTITY_WIKI:
        assert len(units) % 4 == 0 and len(units) > 0
        for i in range(0, len(units), 4):
            resolve(units[i], units[i + 1], units[i + 2])
            assert units[i + 3].kind == KIND_SEPARATOR
            checked += 1
    elif doc.strategy == STRATEGY_EVIDENCE:
        assert len(units) == 4
        resolve(units[0], units[1], units[2])
        assert units[3].kind == KIND_AUXILIARY
        checked += 1
    elif doc.strategy == STRATEGY_KNOWLEDGE_WALK:
        assert len(units) % 2 == 1
        for i in range(0, len(units) - 2, 2):
            resolve(units[i], units[i + 1], units[i + 2])
            checked += 1
    else:
        raise AssertionError(f"unknown strategy {doc.strategy}")
    return checked
