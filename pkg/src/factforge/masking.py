"""Whole-unit masking and the line-delimited corpus format.

Masking replaces an entity or relation unit's entire surface with one
literal ``[MASK]``, whatever its word count; expanding to tokenizer-level
mask tokens is the trainer's job. Evidence documents carry a forced mask
on the object slot; random masking applies on top of it to the remaining
units. If random selection picks nothing and p > 0, one uniformly chosen
unit is masked so every document carries a training signal (disable with
``allow_unmasked``).

Unit-level unmasking is always exact. Text-level reconstruction (replace
each ``[MASK]`` occurrence by its target surface, in order) additionally
assumes no original surface contains the literal ``[MASK]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from . import kernels
from .errors import ConfigError, IntegrityError, ParseError
from .fileio import describe_source, iter_numbered_lines, open_text_sink
from .rng import Stream, derive_seed
from .synth import KIND_ENTITY, KIND_RELATION, STRATEGIES, Document

MASK_SURFACE = "[MASK]"
MASKABLE_KINDS = (KIND_ENTITY, KIND_RELATION)

CORPUS_FIELDS = (
    "id",
    "strategy",
    "text",
    "masked_text",
    "targets",
    "source_entities",
    "seed",
)


@dataclass(frozen=True)
class MaskedDocument:
    document: Document
    masked_unit_indices: tuple[int, ...]  # ascending
    targets: tuple[tuple[int, str], ...]  # (unit index, original surface)
    masked_text: str


@dataclass(frozen=True)
class CorpusRecord:
    """One serialized corpus line; field names are the trainer contract."""

    id: str
    strategy: str
    text: str
    masked_text: str
    targets: tuple[tuple[int, str], ...]
    source_entities: tuple[str, ...]
    seed: int

    @classmethod
    def from_masked(cls, md: MaskedDocument, seed: int) -> "CorpusRecord":
        doc = md.document
        seen: list[str] = []
        for unit in doc.units:
            if unit.kind == KIND_ENTITY and unit.surface not in seen:
                seen.append(unit.surface)
        return cls(
            id=doc.id,
            strategy=doc.strategy,
            text=doc.render(),
            masked_text=md.masked_text,
            targets=md.targets,
            source_entities=tuple(seen),
            seed=seed,
        )

    def to_json_line(self) -> str:
        payload = {
            "id": self.id,
            "strategy": self.strategy,
            "text": self.text,
            "masked_text": self.masked_text,
            "targets": [{"unit": i, "surface": s} for i, s in self.targets],
            "source_entities": list(self.source_entities),
            "seed": self.seed,
        }
        return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))

    def restore_text(self) -> str:
        """Rebuild the unmasked text from masked_text plus targets."""
        pieces = self.masked_text.split(MASK_SURFACE)
        if len(pieces) - 1 != len(self.targets):
            raise IntegrityError(
                f"record {self.id!r}: {len(pieces) - 1} [MASK] occurrences "
                f"vs {len(self.targets)} targets"
            )
        out = [pieces[0]]
        for (_, surface), piece in zip(self.targets, pieces[1:]):
            out.append(surface)
            out.append(piece)
        restored = "".join(out)
        if restored != self.text:
            raise IntegrityError(f"record {self.id!r}: masked_text does not restore to text")
        return restored


def mask_rng(seed: int, doc_id: str) -> Stream:
    """The masking stream is a pure function of (run seed, document id)."""
    return Stream(derive_seed(seed, "mask:" + doc_id))


def mask_document(
    doc: Document,
    p: float,
    rng: Stream,
    *,
    allow_unmasked: bool = False,
    forced_only: bool = False,
) -> MaskedDocument:
    """Mask each entity/relation unit independently with probability ``p``.

    Forced indices (the evidence object slot) are always masked and do
    not consume randomness. ``forced_only`` suppresses random masking on
    documents that carry forced masks.
    """
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"mask probability must be in [0, 1], got {p}")
    forced = set(doc.forced_mask)
    maskable = [i for i in doc.maskable_indices() if i not in forced]

    chosen = set(forced)
    if not (forced_only and forced):
        picks, rng.state = kernels.bernoulli_select(len(maskable), p, rng.state)
        chosen.update(maskable[j] for j in picks)
        if p > 0 and not chosen and maskable and not allow_unmasked:
            chosen.add(maskable[rng.next_below(len(maskable))])

    indices = tuple(sorted(chosen))
    targets = tuple((i, doc.units[i].surface) for i in indices)
    masked_text = " ".join(
        MASK_SURFACE if i in chosen else unit.surface
        for i, unit in enumerate(doc.units)
    )
    return MaskedDocument(
        document=doc,
        masked_unit_indices=indices,
        targets=targets,
        masked_text=masked_text,
    )


def mask_stream(
    docs: Iterable[Document], seed: int, p: float, **options
) -> Iterator[MaskedDocument]:
    """Mask a document stream, deriving one rng per document id."""
    for doc in docs:
        yield mask_document(doc, p, mask_rng(seed, doc.id), **options)


def unmask(md: MaskedDocument) -> str:
    """Validate a masked document and return its unmasked rendering."""
    doc = md.document
    if len(md.targets) != len(md.masked_unit_indices):
        raise IntegrityError(
            f"document {doc.id!r}: {len(md.targets)} targets vs "
            f"{len(md.masked_unit_indices)} masked indices"
        )
    if list(md.masked_unit_indices) != sorted(set(md.masked_unit_indices)):
        raise IntegrityError(f"document {doc.id!r}: masked indices not strictly ascending")
    forced = set(doc.forced_mask)
    for (index, surface), masked_index in zip(md.targets, md.masked_unit_indices):
        if index != masked_index:
            raise IntegrityError(f"document {doc.id!r}: target/index mismatch at {index}")
        if not 0 <= index < len(doc.units):
            raise IntegrityError(f"document {doc.id!r}: dangling target index {index}")
        unit = doc.units[index]
        if unit.kind not in MASKABLE_KINDS and index not in forced:
            raise IntegrityError(
                f"document {doc.id!r}: masked a {unit.kind} unit at {index}"
            )
        if unit.surface != surface:
            raise IntegrityError(
                f"document {doc.id!r}: target surface mismatch at {index}"
            )
    chosen = set(md.masked_unit_indices)
    expected = " ".join(
        MASK_SURFACE if i in chosen else unit.surface
        for i, unit in enumerate(doc.units)
    )
    if expected != md.masked_text:
        raise IntegrityError(f"document {doc.id!r}: masked_text inconsistent with targets")
    return doc.render()


def write_corpus(masked_docs: Iterable[MaskedDocument], sink, *, seed: int) -> int:
    """Serialize masked documents one record per line; returns the count."""
    count = 0
    with open_text_sink(sink) as handle:
        for md in masked_docs:
            handle.write(CorpusRecord.from_masked(md, seed).to_json_line())
            handle.write("\n")
            count += 1
    return count


def read_corpus(source) -> Iterator[CorpusRecord]:
    """Parse a corpus file, validating the record schema strictly."""
    for lineno, line in iter_numbered_lines(source):
        if not line.strip():
            continue
        yield parse_record(line, source=describe_source(source), lineno=lineno)


def parse_record(line: str, *, source=None, lineno: int | None = None) -> CorpusRecord:
    """Decode and validate one corpus line against the exact field contract."""

    def fail(msg: str) -> ParseError:
        return ParseError(msg, source=source, line=lineno)

    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise fail(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise fail("record is not a JSON object")
    if set(payload) != set(CORPUS_FIELDS):
        missing = sorted(set(CORPUS_FIELDS) - set(payload))
        extra = sorted(set(payload) - set(CORPUS_FIELDS))
        raise fail(f"record fields mismatch (missing {missing}, extra {extra})")
    for key in ("id", "strategy", "text", "masked_text"):
        if not isinstance(payload[key], str):
            raise fail(f"field {key!r} must be a string")
    if payload["strategy"] not in STRATEGIES:
        raise fail(f"unknown strategy {payload['strategy']!r}")
    if not isinstance(payload["seed"], int) or isinstance(payload["seed"], bool):
        raise fail("field 'seed' must be an integer")
    if not isinstance(payload["targets"], list):
        raise fail("field 'targets' must be an array")
    targets = []
    for item in payload["targets"]:
        if (
            not isinstance(item, dict)
            or set(item) != {"unit", "surface"}
            or not isinstance(item["unit"], int)
            or isinstance(item["unit"], bool)
            or not isinstance(item["surface"], str)
        ):
            raise fail("targets items must be {unit: int, surface: str}")
        targets.append((item["unit"], item["surface"]))
    if not isinstance(payload["source_entities"], list) or not all(
        isinstance(s, str) for s in payload["source_entities"]
    ):
        raise fail("field 'source_entities' must be an array of strings")
    return CorpusRecord(
        id=payload["id"],
        strategy=payload["strategy"],
        text=payload["text"],
        masked_text=payload["masked_text"],
        targets=tuple(targets),
        source_entities=tuple(payload["source_entities"]),
        seed=payload["seed"],
    )

