import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from factforge import (
    DatasetError,
    DatasetSplit,
    LabeledPair,
    ParseError,
    drop_nei,
    exclude_subset,
    format_pair_input,
    load_pairs,
    read_pairs,
    verify_split,
    write_pairs,
)
from factforge.datasets import (
    LABEL_FACTUAL,
    LABEL_NON_FACTUAL,
    AdapterManifest,
    format_input,
    load_manifest,
)


def jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def make_pair(pair_id, label=LABEL_FACTUAL, raw_label=None, **kwargs):
    return LabeledPair(
        id=pair_id,
        summary=kwargs.pop("summary", f"sum {pair_id}"),
        document=kwargs.pop("document", f"doc {pair_id}"),
        label=label,
        raw_label=raw_label,
        **kwargs,
    )


# --- load_pairs -------------------------------------------------------------


def test_factcollect_single_row(tmp_path):
    path = tmp_path / "fc.csv"
    path.write_text(
        "id,summary,document,label,subset\n"
        "fc-1,A short claim.,The source article.,factual,cnndm\n",
        encoding="utf-8",
    )
    pairs = load_pairs(path, "factcollect")
    assert len(pairs) == 1
    pair = pairs[0]
    assert pair.id == "fc-1"
    assert pair.label == LABEL_FACTUAL
    assert pair.subset == "cnndm"


def test_covidfact_auto_ids(tmp_path):
    path = jsonl(
        tmp_path / "cf.jsonl",
        [
            {"claim": "Claim one.", "evidence": "Evidence one.", "label": "SUPPORTED"},
            {"claim": "Claim two.", "evidence": "Evidence two.", "label": "REFUTED"},
        ],
    )
    pairs = load_pairs(path, "covidfact")
    assert [p.id for p in pairs] == ["covidfact-0", "covidfact-1"]
    assert [p.label for p in pairs] == [LABEL_FACTUAL, LABEL_NON_FACTUAL]


def test_healthver_three_way_loads_raw(tmp_path):
    path = tmp_path / "hv.csv"
    path.write_text(
        "id,claim,evidence,label\n"
        "h1,Claim a.,Evidence a.,Supports\n"
        "h2,Claim b.,Evidence b.,Refutes\n"
        "h3,Claim c.,Evidence c.,Neutral\n",
        encoding="utf-8",
    )
    pairs = load_pairs(path, "healthver")
    assert len(pairs) == 3
    assert [p.raw_label for p in pairs] == ["supports", "refutes", "neutral"]
    assert [p.label for p in pairs] == [LABEL_FACTUAL, LABEL_NON_FACTUAL, None]


def test_scifact_three_way(tmp_path):
    path = jsonl(
        tmp_path / "sf.jsonl",
        [
            {"id": "s1", "claim": "c.", "evidence": "e.", "label": "SUPPORT"},
            {"id": "s2", "claim": "c.", "evidence": "e.", "label": "NOT_ENOUGH_INFO"},
            {"id": "s3", "claim": "c.", "evidence": "e.", "label": "CONTRADICT"},
        ],
    )
    pairs = load_pairs(path, "scifact")
    assert [p.label for p in pairs] == [LABEL_FACTUAL, None, LABEL_NON_FACTUAL]


def test_frank_populates_scores_and_categories(tmp_path):
    path = jsonl(
        tmp_path / "frank.jsonl",
        [
            {
                "hash": "f1",
                "summary": "Summary one.",
                "article": "Article one.",
                "score": 0.9,
                "dataset": "cnndm",
                "error_categories": ["EntE", "CorefE"],
            },
            {
                "hash": "f2",
                "summary": "Summary two.",
                "article": "Article two.",
                "score": 0.2,
                "dataset": "xsum",
                "error_categories": ["OutE", "NoE"],
            },
        ],
    )
    pairs = load_pairs(path, "frank")
    assert pairs[0].human_score == 0.9
    assert pairs[0].error_categories == frozenset({"semantic_frame", "discourse"})
    assert pairs[0].label == LABEL_FACTUAL  # derived: score above threshold
    assert pairs[1].error_categories == frozenset({"content_verifiability"})
    assert pairs[1].label == LABEL_NON_FACTUAL
    assert pairs[1].subset == "xsum"


def test_unknown_format():
    with pytest.raises(DatasetError, match="unknown format"):
        load_pairs([], "mystery")


def test_missing_required_column(tmp_path):
    path = tmp_path / "fc.csv"
    path.write_text("id,summary,label\nx,s,factual\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="missing required column"):
        load_pairs(path, "factcollect")


def test_unparseable_label_reports_line(tmp_path):
    path = tmp_path / "fc.csv"
    path.write_text(
        "id,summary,document,label\na,s,d,factual\nb,s,d,gibberish\n",
        encoding="utf-8",
    )
    with pytest.raises(ParseError, match=":3:"):
        load_pairs(path, "factcollect")


def test_empty_text_rejected(tmp_path):
    path = jsonl(tmp_path / "cf.jsonl", [{"claim": " ", "evidence": "e.", "label": "SUPPORTED"}])
    with pytest.raises(ParseError, match="non-empty"):
        load_pairs(path, "covidfact")


def test_manifest_override(tmp_path):
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(
        json.dumps(
            {
                "container": "jsonl",
                "columns": {
                    "id": "key",
                    "summary": "short",
                    "document": "long",
                    "label": "verdict",
                },
                "label_aliases": {"yes": "factual", "no": "non_factual"},
            }
        ),
        encoding="utf-8",
    )
    data = jsonl(
        tmp_path / "data.jsonl",
        [{"key": "k1", "short": "s.", "long": "d.", "verdict": "YES"}],
    )
    pairs = load_pairs(data, "factcollect", load_manifest(manifest_path))
    assert pairs[0].label == LABEL_FACTUAL


def test_manifest_missing_key():
    with pytest.raises(DatasetError, match="manifest missing"):
        load_manifest({"container": "csv"})


# --- drop_nei ---------------------------------------------------------------


def _three_way_fixture():
    labels = ["support", "refute", "nei", "support", "refute", "nei"]
    return [
        make_pair(
            f"p{i}",
            label=None if raw == "nei" else None,
            raw_label=raw,
        )
        for i, raw in enumerate(labels)
    ]


def test_drop_nei_maps_and_filters():
    pairs = _three_way_fixture()
    kept = drop_nei(pairs)
    assert len(kept) == 4
    assert [p.label for p in kept] == [
        LABEL_FACTUAL,
        LABEL_NON_FACTUAL,
        LABEL_FACTUAL,
        LABEL_NON_FACTUAL,
    ]
    assert [p.id for p in kept] == ["p0", "p1", "p3", "p4"]  # order preserved


def test_drop_nei_all_nei():
    pairs = [make_pair(f"n{i}", label=None, raw_label="nei") for i in range(3)]
    assert drop_nei(pairs) == []


def test_drop_nei_idempotent():
    pairs = _three_way_fixture()
    once = drop_nei(pairs)
    assert drop_nei(once) == once


def test_drop_nei_unmapped_raw_label():
    with pytest.raises(DatasetError, match="unmapped raw label"):
        drop_nei([make_pair("x", label=None, raw_label="sideways")])


def test_drop_nei_output_length_identity():
    pairs = _three_way_fixture()
    nei_count = sum(1 for p in pairs if p.raw_label == "nei")
    assert len(drop_nei(pairs)) == len(pairs) - nei_count


# --- formatting -------------------------------------------------------------


def test_format_pair_input_basic():
    pair = make_pair("x", summary="a.", document="b.")
    assert format_pair_input(pair) == "a. [SEP] b."


def test_format_pair_input_preserves_existing_sep():
    pair = make_pair("x", summary="a [SEP] z", document="b.")
    assert format_pair_input(pair) == "a [SEP] z [SEP] b."


@given(
    st.text(alphabet="ab c.", min_size=1).filter(lambda s: s.strip()),
    st.text(alphabet="xy z.", min_size=1).filter(lambda s: s.strip()),
)
def test_format_injects_exactly_one_separator(summary, document):
    before = summary.count("[SEP]") + document.count("[SEP]")
    assert format_input(summary, document).count("[SEP]") == before + 1


# --- split verification -----------------------------------------------------


def test_verify_split_passes_on_expected_counts():
    split = DatasetSplit(
        train=tuple(make_pair(f"t{i}") for i in range(87)),
        dev=tuple(make_pair(f"d{i}", label=LABEL_NON_FACTUAL) for i in range(3)),
        test=tuple(make_pair(f"e{i}") for i in range(6)),
        expected_counts=(87, 3, 6),
    )
    report = verify_split(split)
    assert report["passed"]
    assert report["size_match"]
    assert report["id_overlaps"] == []
    assert report["label_distribution"]["dev"] == {LABEL_NON_FACTUAL: 3}


def test_verify_split_flags_overlap():
    split = DatasetSplit(
        train=(make_pair("shared"), make_pair("t1")),
        dev=(make_pair("d1"),),
        test=(make_pair("shared"),),
    )
    report = verify_split(split)
    assert not report["passed"]
    assert report["id_overlaps"] == [{"id": "shared", "splits": ["train", "test"]}]


def test_verify_split_flags_size_mismatch():
    split = DatasetSplit(
        train=(make_pair("a"),), dev=(), test=(), expected_counts=(2, 0, 0)
    )
    report = verify_split(split)
    assert not report["passed"]
    assert not report["size_match"]


# --- canonical round trip ---------------------------------------------------


def test_canonical_round_trip(tmp_path):
    pairs = [
        make_pair("r1", subset="cnndm", human_score=0.5),
        make_pair(
            "r2",
            label=LABEL_NON_FACTUAL,
            error_categories=frozenset({"discourse"}),
        ),
    ]
    out = tmp_path / "pairs.jsonl"
    assert write_pairs(pairs, out) == 2
    loaded = read_pairs(out)
    assert [p.id for p in loaded] == ["r1", "r2"]
    assert loaded[0].human_score == 0.5
    assert loaded[1].error_categories == frozenset({"discourse"})
    # write(read(write(x))) is byte-identical
    out2 = tmp_path / "pairs2.jsonl"
    write_pairs(loaded, out2)
    assert out.read_bytes() == out2.read_bytes()


def test_write_rejects_unbinarized_pairs(tmp_path):
    with pytest.raises(DatasetError, match="drop_nei"):
        write_pairs([make_pair("x", label=None, raw_label="nei")], tmp_path / "x.jsonl")


def test_read_pairs_validates(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id":"a","summary":"s","document":"d","label":"maybe"}\n', encoding="utf-8")
    with pytest.raises(ParseError, match="binary"):
        read_pairs(path)
    path.write_text(
        '{"id":"a","summary":"s","document":"d","label":"factual","error_categories":["bogus"]}\n',
        encoding="utf-8",
    )
    with pytest.raises(ParseError, match="bogus"):
        read_pairs(path)


# --- subset exclusion -------------------------------------------------------


def test_exclude_subset_case_insensitive():
    pairs = [
        make_pair("a", subset="FRANK"),
        make_pair("b", subset="cnndm"),
        make_pair("c"),
    ]
    kept = exclude_subset(pairs, "frank")
    assert [p.id for p in kept] == ["b", "c"]


# --- real-data checks (run only when the released files are supplied) --------


def test_scifact_real_counts():
    import os

    path = os.environ.get("SCIFACT_PATH")
    if not path:
        pytest.skip("SCIFACT_PATH not set; real-data count check skipped")
    pairs = drop_nei(load_pairs(path, "scifact"))
    assert len(pairs) == 773
    counts = {label: sum(1 for p in pairs if p.label == label) for label in
              (LABEL_FACTUAL, LABEL_NON_FACTUAL)}
    assert counts == {LABEL_FACTUAL: 508, LABEL_NON_FACTUAL: 265}
