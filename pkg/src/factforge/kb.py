"""Immutable knowledge-base store.

Triples are interned to dense ids in first-appearance order and held as a
CSR-style out-adjacency: ``offsets[e] .. offsets[e+1]`` delimits entity
``e``'s out-edges, sorted by (relation id, target id). The position of an
edge in the flat arrays is its stable triple id, used for provenance.
Everything is read-only after load, so any number of threads or forked
workers may share one instance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import KbLookupError, ParseError
from .fileio import describe_source, iter_numbered_lines

logger = logging.getLogger(__name__)

COMMENT_PREFIX = "#"
INVERSE_RELATION_PREFIX = "inverse "


@dataclass(frozen=True)
class KbStats:
    """Size summary of a knowledge base."""

    num_entities: int
    num_relations: int
    num_triples: int
    num_entities_with_out_edges: int
    out_degree_histogram: dict[int, int]

    def as_dict(self) -> dict:
        return {
            "num_entities": self.num_entities,
            "num_relations": self.num_relations,
            "num_triples": self.num_triples,
            "num_entities_with_out_edges": self.num_entities_with_out_edges,
            "out_degree_histogram": dict(sorted(self.out_degree_histogram.items())),
        }


@dataclass(frozen=True, eq=False)
class KnowledgeBase:
    entity_names: tuple[str, ...]
    relation_names: tuple[str, ...]
    offsets: np.ndarray  # int64, length num_entities + 1
    edge_relations: np.ndarray  # int32 per edge
    edge_targets: np.ndarray  # int32 per edge
    entity_ids: dict[str, int] = field(repr=False)
    # (relation << 32) | target per edge; sorted within each source segment,
    # which makes has_edge a binary search.
    _edge_keys: np.ndarray = field(repr=False, default=None)

    @property
    def num_entities(self) -> int:
        return len(self.entity_names)

    @property
    def num_relations(self) -> int:
        return len(self.relation_names)

    @property
    def num_triples(self) -> int:
        return int(self.edge_targets.shape[0])

    def _check_entity(self, entity: int) -> None:
        if not 0 <= entity < self.num_entities:
            raise KbLookupError(
                f"entity id {entity} out of range [0, {self.num_entities})"
            )

    def out_degree(self, entity: int) -> int:
        self._check_entity(entity)
        return int(self.offsets[entity + 1] - self.offsets[entity])

    def out_neighborhood(self, entity: int) -> list[tuple[int, int]]:
        """Sorted (relation id, target id) out-edges of ``entity``."""
        self._check_entity(entity)
        lo, hi = int(self.offsets[entity]), int(self.offsets[entity + 1])
        rels = self.edge_relations[lo:hi]
        tgts = self.edge_targets[lo:hi]
        return [(int(r), int(t)) for r, t in zip(rels, tgts)]

    def edge_range(self, entity: int) -> tuple[int, int]:
        """Edge-id interval [lo, hi) of ``entity``'s out-edges."""
        self._check_entity(entity)
        return int(self.offsets[entity]), int(self.offsets[entity + 1])

    def edge_source(self, edge_id: int) -> int:
        """Subject entity of the edge at ``edge_id``."""
        if not 0 <= edge_id < self.num_triples:
            raise KbLookupError(f"edge id {edge_id} out of range")
        return int(np.searchsorted(self.offsets, edge_id, side="right") - 1)

    def triple(self, edge_id: int) -> tuple[int, int, int]:
        """(subject, relation, object) ids of the edge at ``edge_id``."""
        src = self.edge_source(edge_id)
        return src, int(self.edge_relations[edge_id]), int(self.edge_targets[edge_id])

    def has_edge(self, subject: int, relation: int, target: int) -> bool:
        self._check_entity(subject)
        lo, hi = int(self.offsets[subject]), int(self.offsets[subject + 1])
        key = (relation << 32) | target
        pos = lo + int(np.searchsorted(self._edge_keys[lo:hi], key))
        return pos < hi and int(self._edge_keys[pos]) == key

    def entity_id(self, name: str) -> int | None:
        return self.entity_ids.get(name)

    def iter_triples(self) -> Iterator[tuple[int, int, int]]:
        for subject in range(self.num_entities):
            lo, hi = int(self.offsets[subject]), int(self.offsets[subject + 1])
            for j in range(lo, hi):
                yield subject, int(self.edge_relations[j]), int(self.edge_targets[j])

    def stats(self) -> KbStats:
        degrees = np.diff(self.offsets)
        values, counts = np.unique(degrees, return_counts=True)
        histogram = {int(v): int(c) for v, c in zip(values, counts)}
        return KbStats(
            num_entities=self.num_entities,
            num_relations=self.num_relations,
            num_triples=self.num_triples,
            num_entities_with_out_edges=int(np.count_nonzero(degrees)),
            out_degree_histogram=histogram,
        )


@dataclass(frozen=True)
class DescriptionStore:
    """Entity id -> description paragraph; entities without one are absent."""

    descriptions: dict[int, str]
    skipped_unknown: int = 0

    def __contains__(self, entity_id: int) -> bool:
        return entity_id in self.descriptions

    def __getitem__(self, entity_id: int) -> str:
        return self.descriptions[entity_id]

    def __len__(self) -> int:
        return len(self.descriptions)

    def get(self, entity_id: int, default=None):
        return self.descriptions.get(entity_id, default)


def load_kb(source, *, add_inverse: bool = False) -> KnowledgeBase:
    """Parse ``subject<TAB>relation<TAB>object`` lines into a KnowledgeBase.

    Blank lines and ``#``-prefixed comments are skipped; duplicate triples
    collapse to one edge. ``add_inverse`` materializes a reverse edge per
    triple under a relation surface prefixed with ``"inverse "``.
    """
    raw: list[tuple[str, str, str]] = []
    for lineno, line in iter_numbered_lines(source):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_PREFIX):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(
                f"expected 3 tab-separated fields, got {len(parts)}",
                source=describe_source(source),
                line=lineno,
            )
        subject, relation, target = (p.strip() for p in parts)
        if not subject or not relation or not target:
            raise ParseError(
                "empty field in triple", source=describe_source(source), line=lineno
            )
        raw.append((subject, relation, target))

    if add_inverse:
        raw.extend([(t, INVERSE_RELATION_PREFIX + r, s) for s, r, t in list(raw)])

    entity_ids: dict[str, int] = {}
    relation_ids: dict[str, int] = {}
    edges = np.empty((len(raw), 3), dtype=np.int64)
    for i, (subject, relation, target) in enumerate(raw):
        si = entity_ids.setdefault(subject, len(entity_ids))
        ri = relation_ids.setdefault(relation, len(relation_ids))
        ti = entity_ids.setdefault(target, len(entity_ids))
        edges[i, 0] = si
        edges[i, 1] = ri
        edges[i, 2] = ti

    num_entities = len(entity_ids)
    if len(raw) > 0:
        order = np.lexsort((edges[:, 2], edges[:, 1], edges[:, 0]))
        edges = edges[order]
        keep = np.ones(len(edges), dtype=bool)
        keep[1:] = np.any(edges[1:] != edges[:-1], axis=1)
        edges = edges[keep]

    counts = np.bincount(edges[:, 0], minlength=num_entities) if len(edges) else np.zeros(num_entities, dtype=np.int64)
    offsets = np.zeros(num_entities + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    edge_relations = edges[:, 1].astype(np.int32)
    edge_targets = edges[:, 2].astype(np.int32)
    edge_keys = (edges[:, 1] << 32) | edges[:, 2]

    for arr in (offsets, edge_relations, edge_targets, edge_keys):
        arr.setflags(write=False)

    return KnowledgeBase(
        entity_names=tuple(entity_ids),
        relation_names=tuple(relation_ids),
        offsets=offsets,
        edge_relations=edge_relations,
        edge_targets=edge_targets,
        entity_ids=entity_ids,
        _edge_keys=edge_keys,
    )


def load_descriptions(source, kb: KnowledgeBase) -> DescriptionStore:
    """Parse ``entity<TAB>paragraph`` lines keyed by resolved entity ids.

    Lines naming entities absent from the KB are counted and skipped, not
    fatal; a later line for the same entity overwrites the earlier one.
    """
    descriptions: dict[int, str] = {}
    skipped = 0
    for lineno, line in iter_numbered_lines(source):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_PREFIX):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(
                f"expected 2 tab-separated fields, got {len(parts)}",
                source=describe_source(source),
                line=lineno,
            )
        name, paragraph = parts[0].strip(), parts[1].strip()
        if not name or not paragraph:
            raise ParseError(
                "empty entity or description", source=describe_source(source), line=lineno
            )
        entity = kb.entity_id(name)
        if entity is None:
            skipped += 1
            continue
        descriptions[entity] = paragraph
    if skipped:
        logger.info("descriptions: skipped %d lines naming unknown entities", skipped)
    return DescriptionStore(descriptions=descriptions, skipped_unknown=skipped)


def out_neighborhood(kb: KnowledgeBase, entity: int) -> list[tuple[int, int]]:
    return kb.out_neighborhood(entity)


def kb_stats(kb: KnowledgeBase) -> KbStats:
    return kb.stats()

