import io

import numpy as np
import pytest

from factforge import KbLookupError, ParseError, kb_stats, load_descriptions, load_kb
from factforge.kb import INVERSE_RELATION_PREFIX

from conftest import CLINTON_DESC_LINES, K4_LINES, KEPLER_LINES


def test_fixture_counts():
    lines = [
        "ada\tknows\tboris",
        "boris\tknows\tclara",
        "ada\temploys\tdana",
    ]
    kb = load_kb(lines)
    assert kb.num_entities == 4
    assert kb.num_triples == 3


def test_empty_input_is_a_valid_empty_kb():
    kb = load_kb([])
    assert kb.num_entities == 0
    assert kb.num_triples == 0
    stats = kb_stats(kb)
    assert stats.num_entities == 0
    assert stats.num_relations == 0
    assert stats.num_triples == 0
    assert stats.num_entities_with_out_edges == 0


def test_duplicate_triples_collapse():
    lines = ["a\tr\tb"] * 5
    # Oracle: set-based dedup over the parsed lines.
    expected = len({tuple(line.split("\t")) for line in lines})
    kb = load_kb(lines)
    assert kb.num_triples == expected == 1


def test_malformed_line_reports_line_number():
    with pytest.raises(ParseError, match="line 2|:2:"):
        load_kb(["a\tr\tb", "bad line without tabs"])
    with pytest.raises(ParseError, match="empty field"):
        load_kb(["a\t\tb"])
    with pytest.raises(ParseError):
        load_kb(["a\tr\tb\textra"])


def test_comments_and_blank_lines_are_skipped():
    kb = load_kb(["# a comment", "", "a\tr\tb", "   "])
    assert kb.num_triples == 1


def test_interning_is_first_appearance_order():
    kb = load_kb(["zeta\tr\talpha", "alpha\ts\tzeta"])
    assert kb.entity_names == ("zeta", "alpha")
    assert kb.relation_names == ("r", "s")


def test_out_neighborhood_kepler(kepler_kb):
    kepler = kepler_kb.entity_id("Johannes Kepler")
    edges = kepler_kb.out_neighborhood(kepler)
    assert len(edges) == 2
    surfaces = [
        (kepler_kb.relation_names[r], kepler_kb.entity_names[t]) for r, t in edges
    ]
    assert ("born in", "Italy") in surfaces
    assert ("author of", "Astronomia nova") in surfaces


def test_out_neighborhood_sink_is_empty(kepler_kb):
    italy = kepler_kb.entity_id("Italy")
    assert kepler_kb.out_neighborhood(italy) == []


def test_out_neighborhood_out_of_range(kepler_kb):
    with pytest.raises(KbLookupError):
        kepler_kb.out_neighborhood(kepler_kb.num_entities)
    with pytest.raises(KbLookupError):
        kepler_kb.out_neighborhood(-1)


def test_stats_on_fixture():
    kb = load_kb(["a\tr\tb", "b\tr\tc", "a\ts\tc"])
    stats = kb.stats()
    assert stats.num_entities == 3
    assert stats.num_triples == 3
    assert stats.num_entities_with_out_edges == 2
    # histogram is consistent with the triple count
    assert sum(d * c for d, c in stats.out_degree_histogram.items()) == 3


def test_stats_complete_digraph(k4_kb):
    # Oracle: enumerate the 4*3 ordered pairs.
    expected = len([(a, b) for a in range(4) for b in range(4) if a != b])
    stats = k4_kb.stats()
    assert stats.num_triples == expected == 12
    assert stats.out_degree_histogram == {3: 4}


def test_adjacency_sorted_per_source():
    kb = load_kb(["s\tz\tb", "s\ta\tc", "s\ta\tb"])
    pairs = kb.out_neighborhood(kb.entity_id("s"))
    assert pairs == sorted(pairs)


def test_neighborhood_sizes_sum_to_triple_count(k4_kb, kepler_kb):
    for kb in (k4_kb, kepler_kb):
        total = sum(len(kb.out_neighborhood(e)) for e in range(kb.num_entities))
        assert total == kb.num_triples


def test_load_is_idempotent(tmp_path):
    path = tmp_path / "kb.tsv"
    path.write_text("\n".join(KEPLER_LINES) + "\n", encoding="utf-8")
    first = load_kb(path)
    second = load_kb(path)
    assert first.entity_names == second.entity_names
    assert first.relation_names == second.relation_names
    assert np.array_equal(first.offsets, second.offsets)
    assert np.array_equal(first.edge_relations, second.edge_relations)
    assert np.array_equal(first.edge_targets, second.edge_targets)


def test_name_round_trip(k4_kb):
    lines = [
        f"{k4_kb.entity_names[s]}\t{k4_kb.relation_names[r]}\t{k4_kb.entity_names[t]}"
        for s, r, t in k4_kb.iter_triples()
    ]
    reloaded = load_kb(lines)

    def name_triples(kb):
        return {
            (kb.entity_names[s], kb.relation_names[r], kb.entity_names[t])
            for s, r, t in kb.iter_triples()
        }

    assert name_triples(k4_kb) == name_triples(reloaded)


def test_has_edge(kepler_kb):
    kepler = kepler_kb.entity_id("Johannes Kepler")
    italy = kepler_kb.entity_id("Italy")
    born_in = kepler_kb.relation_names.index("born in")
    assert kepler_kb.has_edge(kepler, born_in, italy)
    assert not kepler_kb.has_edge(italy, born_in, kepler)


def test_add_inverse_materializes_reverse_edges():
    kb = load_kb(["a\tr\tb"], add_inverse=True)
    assert kb.num_triples == 2
    assert INVERSE_RELATION_PREFIX + "r" in kb.relation_names
    a, b = kb.entity_id("a"), kb.entity_id("b")
    inv = kb.relation_names.index(INVERSE_RELATION_PREFIX + "r")
    assert kb.has_edge(b, inv, a)


def test_edge_source_and_triple(k4_kb):
    for edge_id in range(k4_kb.num_triples):
        s, r, t = k4_kb.triple(edge_id)
        lo, hi = k4_kb.edge_range(s)
        assert lo <= edge_id < hi
        assert k4_kb.has_edge(s, r, t)


def test_arrays_are_read_only(kepler_kb):
    with pytest.raises(ValueError):
        kepler_kb.offsets[0] = 1


def test_load_descriptions_basic(clinton_kb):
    store = load_descriptions(CLINTON_DESC_LINES, clinton_kb)
    assert len(store) == 1
    clinton = clinton_kb.entity_id("Hillary Clinton")
    assert clinton in store
    assert store[clinton].startswith("Hillary Diane Rodham Clinton")
    assert store.skipped_unknown == 0


def test_load_descriptions_two_entities(kepler_kb):
    store = load_descriptions(
        ["Johannes Kepler\tA German astronomer.", "Italy\tA country in Europe."],
        kepler_kb,
    )
    assert len(store) == 2


def test_load_descriptions_unknown_entity_is_counted(kepler_kb):
    store = load_descriptions(["Nobody\tSome text."], kepler_kb)
    assert len(store) == 0
    assert store.skipped_unknown == 1


def test_load_descriptions_empty_paragraph_is_an_error(kepler_kb):
    with pytest.raises(ParseError):
        load_descriptions(["Johannes Kepler\t   "], kepler_kb)
    with pytest.raises(ParseError):
        load_descriptions(["Johannes Kepler"], kepler_kb)


def test_loading_from_stream_and_path_agree(tmp_path):
    text = "\n".join(K4_LINES) + "\n"
    path = tmp_path / "k4.tsv"
    path.write_text(text, encoding="utf-8")
    from_path = load_kb(path)
    from_stream = load_kb(io.StringIO(text))
    assert from_path.entity_names == from_stream.entity_names
    assert np.array_equal(from_path.edge_targets, from_stream.edge_targets)
