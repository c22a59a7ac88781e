"""Dataset adapters: heterogeneous source files -> canonical labeled pairs.

Source datasets ship in assorted CSV/JSONL shapes, so each format is
described by an adapter manifest mapping source columns to the canonical
fields (id, summary, document, label, subset, human_score,
error_categories). Built-in manifests cover the five supported formats
and can be overridden from a JSON file when a release changes columns.

Three-way sources (support / refute / not-enough-information) load with
the raw label retained and the binary label unset; ``drop_nei`` removes
the NEI rows and binarizes the rest.
"""

from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import DatasetError, ParseError
from .fileio import describe_source, iter_numbered_lines, open_text_sink

LABEL_FACTUAL = "factual"
LABEL_NON_FACTUAL = "non_factual"
LABEL_NEI = "nei"

SEP_TOKEN = "[SEP]"

CATEGORIES = ("semantic_frame", "discourse", "content_verifiability")

CANONICAL_FIELDS = (
    "id",
    "summary",
    "document",
    "label",
    "subset",
    "human_score",
    "error_categories",
)

# Normalized source label -> canonical label. Manifests may extend this.
DEFAULT_LABEL_ALIASES = {
    "factual": LABEL_FACTUAL,
    "correct": LABEL_FACTUAL,
    "support": LABEL_FACTUAL,
    "supports": LABEL_FACTUAL,
    "supported": LABEL_FACTUAL,
    "entailment": LABEL_FACTUAL,
    "true": LABEL_FACTUAL,
    "1": LABEL_FACTUAL,
    "non_factual": LABEL_NON_FACTUAL,
    "not_factual": LABEL_NON_FACTUAL,
    "incorrect": LABEL_NON_FACTUAL,
    "refute": LABEL_NON_FACTUAL,
    "refutes": LABEL_NON_FACTUAL,
    "refuted": LABEL_NON_FACTUAL,
    "contradict": LABEL_NON_FACTUAL,
    "contradiction": LABEL_NON_FACTUAL,
    "false": LABEL_NON_FACTUAL,
    "0": LABEL_NON_FACTUAL,
    "nei": LABEL_NEI,
    "neutral": LABEL_NEI,
    "not_enough_info": LABEL_NEI,
    "not_enough_information": LABEL_NEI,
}

# FRANK-style fine-grained error tags -> the coarse three-way typology.
FRANK_CATEGORY_MAP = {
    "prede": "semantic_frame",
    "ente": "semantic_frame",
    "circe": "semantic_frame",
    "semantic_frame": "semantic_frame",
    "corefe": "discourse",
    "linke": "discourse",
    "discourse": "discourse",
    "oute": "content_verifiability",
    "grame": "content_verifiability",
    "content_verifiability": "content_verifiability",
}
FRANK_CATEGORY_IGNORE = ("noe", "othe", "other")


@dataclass(frozen=True)
class LabeledPair:
    """A (summary, document, label) record in canonical form.

    ``label`` is None only for not-yet-binarized NEI rows from three-way
    sources; ``raw_label`` then carries the normalized source label.
    """

    id: str
    summary: str
    document: str
    label: str | None
    subset: str | None = None
    human_score: float | None = None
    error_categories: frozenset[str] | None = None
    raw_label: str | None = None


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[LabeledPair, ...]
    dev: tuple[LabeledPair, ...]
    test: tuple[LabeledPair, ...]
    expected_counts: tuple[int, int, int] | None = None


@dataclass(frozen=True)
class AdapterManifest:
    """Column mapping and label handling for one source format."""

    container: str  # "csv" or "jsonl"
    columns: dict[str, str | None]
    three_way: bool = False
    label_aliases: dict[str, str] = field(default_factory=dict)
    category_map: dict[str, str] = field(default_factory=dict)
    category_ignore: tuple[str, ...] = ()
    # Used when the source has no label column: factual iff score > threshold.
    derive_label_threshold: float | None = None

    def resolved_aliases(self) -> dict[str, str]:
        merged = dict(DEFAULT_LABEL_ALIASES)
        merged.update(self.label_aliases)
        return merged


BUILTIN_MANIFESTS: dict[str, AdapterManifest] = {
    "factcollect": AdapterManifest(
        container="csv",
        columns={
            "id": "id",
            "summary": "summary",
            "document": "document",
            "label": "label",
            "subset": "subset",
        },
    ),
    "covidfact": AdapterManifest(
        container="jsonl",
        columns={"id": None, "summary": "claim", "document": "evidence", "label": "label"},
    ),
    "healthver": AdapterManifest(
        container="csv",
        columns={"id": "id", "summary": "claim", "document": "evidence", "label": "label"},
        three_way=True,
    ),
    "scifact": AdapterManifest(
        container="jsonl",
        columns={"id": "id", "summary": "claim", "document": "evidence", "label": "label"},
        three_way=True,
    ),
    "frank": AdapterManifest(
        container="jsonl",
        columns={
            "id": "hash",
            "summary": "summary",
            "document": "article",
            "label": None,
            "subset": "dataset",
            "human_score": "score",
            "error_categories": "error_categories",
        },
        category_map=FRANK_CATEGORY_MAP,
        category_ignore=FRANK_CATEGORY_IGNORE,
        derive_label_threshold=0.5,
    ),
}

FORMATS = tuple(BUILTIN_MANIFESTS)

_NORMALIZE_RE = re.compile(r"[\s\-]+")


def normalize_label(raw: str) -> str:
    return _NORMALIZE_RE.sub("_", raw.strip().lower())


def load_manifest(source) -> AdapterManifest:
    """Read an adapter manifest from a JSON file or mapping."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    else:
        payload = dict(source)
    try:
        return AdapterManifest(
            container=payload["container"],
            columns=dict(payload["columns"]),
            three_way=bool(payload.get("three_way", False)),
            label_aliases=dict(payload.get("label_aliases", {})),
            category_map=dict(payload.get("category_map", {})),
            category_ignore=tuple(payload.get("category_ignore", ())),
            derive_label_threshold=payload.get("derive_label_threshold"),
        )
    except KeyError as exc:
        raise DatasetError(f"manifest missing required key {exc.args[0]!r}") from exc


def _iter_rows(source, manifest: AdapterManifest):
    """Yield (line number, row dict) per record."""
    if manifest.container == "csv":
        if isinstance(source, (str, os.PathLike)):
            handle = open(source, "r", encoding="utf-8", newline="")
            close = True
        else:
            handle, close = source, False
        try:
            reader = csv.DictReader(handle)
            for i, row in enumerate(reader):
                yield i + 2, row  # header is line 1
        finally:
            if close:
                handle.close()
    elif manifest.container == "jsonl":
        for lineno, line in iter_numbered_lines(source):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(
                    f"invalid JSON: {exc.msg}", source=describe_source(source), line=lineno
                ) from exc
            if not isinstance(row, dict):
                raise ParseError(
                    "record is not a JSON object", source=describe_source(source), line=lineno
                )
            yield lineno, row
    else:
        raise DatasetError(f"unknown container {manifest.container!r}")


def load_pairs(source, fmt: str, manifest: AdapterManifest | None = None) -> list[LabeledPair]:
    """Load one source file into canonical pairs using the format's manifest."""
    if manifest is None:
        if fmt not in BUILTIN_MANIFESTS:
            raise DatasetError(
                f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}"
            )
        manifest = BUILTIN_MANIFESTS[fmt]
    aliases = manifest.resolved_aliases()
    columns = manifest.columns
    for required in ("summary", "document"):
        if columns.get(required) is None:
            raise DatasetError(f"manifest for {fmt!r} does not map {required!r}")
    pairs: list[LabeledPair] = []
    src_name = describe_source(source)

    for index, (lineno, row) in enumerate(_iter_rows(source, manifest)):
        def fail(msg: str) -> ParseError:
            return ParseError(msg, source=src_name, line=lineno)

        def cell(canonical: str, required: bool = True):
            column = columns.get(canonical)
            if column is None:
                return None
            if column not in row:
                if required:
                    raise DatasetError(
                        f"{src_name or fmt}: missing required column {column!r}"
                    )
                return None
            value = row[column]
            if value is None and required:
                raise fail(f"null value in column {column!r}")
            return value

        summary = str(cell("summary")).strip()
        document = str(cell("document")).strip()
        if not summary or not document:
            raise fail("summary and document must be non-empty")
        raw_id = cell("id")
        pair_id = str(raw_id).strip() if raw_id is not None else f"{fmt}-{index}"
        if not pair_id:
            raise fail("empty id")

        human_score = None
        score_cell = cell("human_score", required=False)
        if score_cell is not None and score_cell != "":
            try:
                human_score = float(score_cell)
            except (TypeError, ValueError):
                raise fail(f"unparseable human score {score_cell!r}") from None
            if not math.isfinite(human_score):
                raise fail(f"human score must be finite, got {human_score}")

        label: str | None = None
        raw_label: str | None = None
        if columns.get("label") is not None:
            raw_value = cell("label")
            raw_label = normalize_label(str(raw_value))
            mapped = aliases.get(raw_label)
            if mapped is None:
                raise fail(f"unparseable label {raw_value!r}")
            label = None if mapped == LABEL_NEI else mapped
        elif manifest.derive_label_threshold is not None:
            if human_score is None:
                raise fail("cannot derive label without a human score")
            label = (
                LABEL_FACTUAL
                if human_score > manifest.derive_label_threshold
                else LABEL_NON_FACTUAL
            )

        subset = None
        subset_cell = cell("subset", required=False)
        if subset_cell is not None and str(subset_cell).strip():
            subset = str(subset_cell).strip()

        categories = None
        cat_cell = cell("error_categories", required=False)
        if cat_cell is not None:
            categories = _map_categories(cat_cell, manifest, fail)

        pairs.append(
            LabeledPair(
                id=pair_id,
                summary=summary,
                document=document,
                label=label,
                subset=subset,
                human_score=human_score,
                error_categories=categories,
                raw_label=raw_label,
            )
        )
    return pairs


def _map_categories(value, manifest: AdapterManifest, fail) -> frozenset[str] | None:
    if isinstance(value, str):
        tags = [t for t in re.split(r"[;,]", value) if t.strip()]
    elif isinstance(value, (list, tuple)):
        tags = [str(t) for t in value]
    else:
        raise fail(f"unsupported error_categories value {value!r}")
    mapped = set()
    for tag in tags:
        normalized = normalize_label(tag)
        if normalized in manifest.category_ignore:
            continue
        target = manifest.category_map.get(normalized, normalized)
        if target not in CATEGORIES:
            raise fail(f"unknown error category {tag!r}")
        mapped.add(target)
    return frozenset(mapped) if mapped else None


def drop_nei(pairs: Sequence[LabeledPair]) -> list[LabeledPair]:
    """Remove NEI rows and binarize the rest; order-preserving, idempotent."""
    out: list[LabeledPair] = []
    for pair in pairs:
        if pair.raw_label is not None:
            mapped = DEFAULT_LABEL_ALIASES.get(pair.raw_label)
            if mapped is None:
                raise DatasetError(
                    f"pair {pair.id!r}: unmapped raw label {pair.raw_label!r}"
                )
            if mapped == LABEL_NEI:
                continue
            out.append(replace(pair, label=mapped))
        elif pair.label in (LABEL_FACTUAL, LABEL_NON_FACTUAL):
            out.append(pair)
        else:
            raise DatasetError(f"pair {pair.id!r} has neither raw nor binary label")
    return out


def exclude_subset(pairs: Sequence[LabeledPair], tag: str) -> list[LabeledPair]:
    """Drop pairs whose subset tag matches ``tag`` (case-insensitive)."""
    needle = tag.strip().lower()
    return [p for p in pairs if (p.subset or "").strip().lower() != needle]


def format_pair_input(pair: LabeledPair) -> str:
    """The classifier input string: summary, a literal [SEP], document."""
    return format_input(pair.summary, pair.document)


def format_input(summary: str, document: str) -> str:
    # [SEP] already inside the texts passes through verbatim; the trainer's
    # tokenizer owns special-token semantics.
    return f"{summary} {SEP_TOKEN} {document}"


def verify_split(split: DatasetSplit) -> dict:
    """Size, id-disjointness, and label-distribution report for a split."""
    sizes = {
        "train": len(split.train),
        "dev": len(split.dev),
        "test": len(split.test),
    }
    report: dict = {"sizes": sizes, "passed": True}

    if split.expected_counts is not None:
        expected = {
            "train": split.expected_counts[0],
            "dev": split.expected_counts[1],
            "test": split.expected_counts[2],
        }
        report["expected"] = expected
        report["size_match"] = sizes == expected
        if not report["size_match"]:
            report["passed"] = False

    ids: dict[str, str] = {}
    overlaps: list[dict] = []
    for name, part in (("train", split.train), ("dev", split.dev), ("test", split.test)):
        for pair in part:
            if pair.id in ids:
                overlaps.append({"id": pair.id, "splits": [ids[pair.id], name]})
            else:
                ids[pair.id] = name
    report["id_overlaps"] = overlaps
    if overlaps:
        report["passed"] = False

    report["label_distribution"] = {
        name: _label_counts(part)
        for name, part in (("train", split.train), ("dev", split.dev), ("test", split.test))
    }
    return report


def _label_counts(pairs: Iterable[LabeledPair]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for pair in pairs:
        key = pair.label if pair.label is not None else LABEL_NEI
        counts[key] = counts.get(key, 0) + 1
    return counts


def write_pairs(pairs: Iterable[LabeledPair], sink) -> int:
    """Serialize pairs to the canonical line-delimited format."""
    count = 0
    with open_text_sink(sink) as handle:
        for pair in pairs:
            if pair.label not in (LABEL_FACTUAL, LABEL_NON_FACTUAL):
                raise DatasetError(
                    f"pair {pair.id!r} has non-binary label {pair.label!r}; "
                    "apply drop_nei before writing"
                )
            payload: dict = {
                "id": pair.id,
                "summary": pair.summary,
                "document": pair.document,
                "label": pair.label,
            }
            if pair.subset is not None:
                payload["subset"] = pair.subset
            if pair.human_score is not None:
                payload["human_score"] = pair.human_score
            if pair.error_categories:
                payload["error_categories"] = sorted(pair.error_categories)
            handle.write(json.dumps(payload, ensure_ascii=False, separators=(",", ":")))
            handle.write("\n")
            count += 1
    return count


def read_pairs(source) -> list[LabeledPair]:
    """Load canonical pairs, validating every invariant."""
    pairs: list[LabeledPair] = []
    for lineno, line in iter_numbered_lines(source):
        if not line.strip():
            continue

        def fail(msg: str) -> ParseError:
            return ParseError(msg, source=describe_source(source), line=lineno)

        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise fail(f"invalid JSON: {exc.msg}") from exc
        if not isinstance(payload, dict):
            raise fail("record is not a JSON object")
        unknown = set(payload) - set(CANONICAL_FIELDS)
        if unknown:
            raise fail(f"unknown fields {sorted(unknown)}")
        for key in ("id", "summary", "document", "label"):
            if key not in payload or not isinstance(payload[key], str) or not payload[key].strip():
                raise fail(f"field {key!r} must be a non-empty string")
        if payload["label"] not in (LABEL_FACTUAL, LABEL_NON_FACTUAL):
            raise fail(f"label must be binary, got {payload['label']!r}")
        human_score = payload.get("human_score")
        if human_score is not None:
            if isinstance(human_score, bool) or not isinstance(human_score, (int, float)):
                raise fail("human_score must be a number")
            human_score = float(human_score)
            if not math.isfinite(human_score):
                raise fail("human_score must be finite")
        categories = payload.get("error_categories")
        if categories is not None:
            if not isinstance(categories, list) or not all(
                isinstance(c, str) for c in categories
            ):
                raise fail("error_categories must be an array of strings")
            bad = [c for c in categories if c not in CATEGORIES]
            if bad:
                raise fail(f"unknown error categories {bad}")
            categories = frozenset(categories)
        subset = payload.get("subset")
        if subset is not None and not isinstance(subset, str):
            raise fail("subset must be a string")
        pairs.append(
            LabeledPair(
                id=payload["id"],
                summary=payload["summary"],
                document=payload["document"],
                label=payload["label"],
                subset=subset,
                human_score=human_score,
                error_categories=categories,
            )
        )
    return pairs
