"""Pretraining-document synthesis over a loaded knowledge base.

Three generators, one per corpus flavor:

* entity fact sheets ("entity_wiki"): one document per entity with
  out-edges, concatenating its one-hop facts, each fact closed by [SEP];
* evidence-backed triples ("evidence"): a sampled triple whose object
  slot is a forced mask target, followed by the subject's description
  paragraph as auxiliary context;
* K-hop walks ("knowledge_walk"): a random walk verbalized into a single
  compositional sentence, no separators.

Document ``i`` draws all of its randomness from a stream derived from
(config seed, strategy tag, i), so generation can be split across any
number of workers and merged by index with output identical to a serial
run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import kernels
from .errors import ConfigError, SynthesisError
from .kb import DescriptionStore, KnowledgeBase
from .rng import Stream, derive_seed

logger = logging.getLogger(__name__)

STRATEGY_ENTITY_WIKI = "entity_wiki"
STRATEGY_EVIDENCE = "evidence"
STRATEGY_KNOWLEDGE_WALK = "knowledge_walk"
STRATEGIES = (STRATEGY_ENTITY_WIKI, STRATEGY_EVIDENCE, STRATEGY_KNOWLEDGE_WALK)

KIND_ENTITY = "entity"
KIND_RELATION = "relation"
KIND_SEPARATOR = "separator"
KIND_AUXILIARY = "auxiliary"

SEPARATOR_SURFACE = "[SEP]"

DEAD_END_TRUNCATE = "truncate"
DEAD_END_RESAMPLE = "resample"

# Bounded retry budget before a resampling policy gives up and truncates.
WALK_RESAMPLE_ATTEMPTS = 8

_UNITS_PER_FACT = 4  # entity, relation, entity, separator


@dataclass(frozen=True)
class Unit:
    kind: str
    surface: str


SEP_UNIT = Unit(KIND_SEPARATOR, SEPARATOR_SURFACE)


@dataclass(frozen=True)
class Document:
    """A synthesized pretraining sentence as an ordered sequence of units."""

    id: str
    strategy: str
    units: tuple[Unit, ...]
    provenance: tuple[int, ...]  # edge ids of the source triples
    seed_offset: int
    forced_mask: tuple[int, ...] = ()  # unit indices the masker must always mask

    def render(self) -> str:
        return " ".join(unit.surface for unit in self.units)

    def maskable_indices(self) -> list[int]:
        return [
            i
            for i, unit in enumerate(self.units)
            if unit.kind in (KIND_ENTITY, KIND_RELATION)
        ]


@dataclass(frozen=True)
class Walk:
    """A validated hop sequence; every step is a stored KB edge."""

    start: int
    steps: tuple[tuple[int, int], ...]  # (relation id, target entity id)
    edge_ids: tuple[int, ...]

    def entities(self) -> tuple[int, ...]:
        return (self.start, *(target for _, target in self.steps))

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class SynthConfig:
    """Synthesis knobs; defaults follow the reference experiment settings."""

    n: int = 100_000
    k: int = 5
    mask_prob: float = 0.15
    seed: int = 0
    max_units_per_doc: int = 480
    dead_end_policy: str = DEAD_END_TRUNCATE
    sample_with_replacement: bool = True
    no_revisit: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.mask_prob <= 1.0:
            raise ConfigError(f"mask_prob must be in [0, 1], got {self.mask_prob}")
        if self.max_units_per_doc < 3:
            raise ConfigError(
                f"max_units_per_doc must be >= 3, got {self.max_units_per_doc}"
            )
        if self.dead_end_policy not in (DEAD_END_TRUNCATE, DEAD_END_RESAMPLE):
            raise ConfigError(
                f"dead_end_policy must be truncate or resample, got {self.dead_end_policy!r}"
            )


def eligible_start_entities(kb: KnowledgeBase) -> np.ndarray:
    """Entity ids with out-degree >= 1, ascending."""
    degrees = np.diff(kb.offsets)
    return np.nonzero(degrees > 0)[0].astype(np.int64)


def sample_walk(
    kb: KnowledgeBase,
    start: int,
    k: int,
    rng: Stream,
    *,
    dead_end_policy: str = DEAD_END_TRUNCATE,
    max_attempts: int = WALK_RESAMPLE_ATTEMPTS,
    no_revisit: bool = False,
) -> Walk:
    """Sample a walk of up to ``k`` hops from ``start``.

    Each hop is uniform over the current entity's out-edges. Dead ends
    before hop ``k`` either truncate the walk or trigger a bounded number
    of whole-walk retries, after which the truncated walk is accepted.
    With ``no_revisit``, walks repeating an entity are rejected the same
    bounded way, then cut just before the first revisit.
    """
    if k < 1:
        raise ConfigError(f"walk length must be >= 1, got {k}")
    if kb.out_degree(start) == 0:
        raise SynthesisError(f"walk start entity {start} has no out-edges")

    attempts = 0
    while True:
        edge_ids, rng.state = kernels.walk_steps(
            kb.offsets, kb.edge_targets, start, k, rng.state
        )
        attempts += 1
        if no_revisit and _first_revisit(kb, start, edge_ids) is not None:
            if attempts < max_attempts:
                continue
            edge_ids = edge_ids[: _first_revisit(kb, start, edge_ids)]
            break
        if (
            len(edge_ids) < k
            and dead_end_policy == DEAD_END_RESAMPLE
            and attempts < max_attempts
        ):
            continue
        break

    steps = tuple(
        (int(kb.edge_relations[j]), int(kb.edge_targets[j])) for j in edge_ids
    )
    return Walk(start=start, steps=steps, edge_ids=tuple(int(j) for j in edge_ids))


def _first_revisit(kb: KnowledgeBase, start: int, edge_ids) -> int | None:
    """Index of the first step whose target was already visited, else None."""
    seen = {start}
    for i, j in enumerate(edge_ids):
        target = int(kb.edge_targets[j])
        if target in seen:
            return i
        seen.add(target)
    return None


# --- entity wiki ---------------------------------------------------------


def build_entity_wiki_doc(
    kb: KnowledgeBase, cfg: SynthConfig, ordinal: int, entity: int
) -> Document:
    lo, hi = kb.edge_range(entity)
    max_facts = max(1, cfg.max_units_per_doc // _UNITS_PER_FACT)
    kept = min(hi - lo, max_facts)
    subject = Unit(KIND_ENTITY, kb.entity_names[entity])
    units: list[Unit] = []
    for j in range(lo, lo + kept):
        units.append(subject)
        units.append(Unit(KIND_RELATION, kb.relation_names[int(kb.edge_relations[j])]))
        units.append(Unit(KIND_ENTITY, kb.entity_names[int(kb.edge_targets[j])]))
        units.append(SEP_UNIT)
    return Document(
        id=f"wiki-{entity}",
        strategy=STRATEGY_ENTITY_WIKI,
        units=tuple(units),
        provenance=tuple(range(lo, lo + kept)),
        seed_offset=ordinal,
    )


def synth_entity_wiki(kb: KnowledgeBase, cfg: SynthConfig) -> Iterator[Document]:
    """One document per entity with out-edges, in entity-id order."""
    for ordinal, entity in enumerate(eligible_start_entities(kb)):
        yield build_entity_wiki_doc(kb, cfg, ordinal, int(entity))


# --- evidence extraction --------------------------------------------------


def eligible_evidence_edges(kb: KnowledgeBase, desc: DescriptionStore) -> np.ndarray:
    """Edge ids whose subject entity has a description, ascending."""
    described = [e for e in range(kb.num_entities) if e in desc]
    spans = [np.arange(*kb.edge_range(e), dtype=np.int64) for e in described]
    if not spans:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(spans)


def evidence_permutation(count: int, seed: int) -> np.ndarray:
    """Deterministic shuffle of [0, count) used for no-replacement sampling."""
    perm = list(range(count))
    Stream(derive_seed(seed, "evidence-perm")).shuffle(perm)
    return np.asarray(perm, dtype=np.int64)


def evidence_doc_count(n_eligible: int, cfg: SynthConfig) -> int:
    if n_eligible == 0:
        return 0
    if cfg.sample_with_replacement:
        return cfg.n
    return min(cfg.n, n_eligible)


def build_evidence_doc(
    kb: KnowledgeBase,
    desc: DescriptionStore,
    cfg: SynthConfig,
    i: int,
    eligible: np.ndarray,
    perm: np.ndarray | None,
) -> Document:
    if perm is None:
        stream = Stream(derive_seed(cfg.seed, "evidence", i))
        edge_id = int(eligible[stream.next_below(len(eligible))])
    else:
        edge_id = int(eligible[int(perm[i])])
    subject, relation, target = kb.triple(edge_id)
    units = (
        Unit(KIND_ENTITY, kb.entity_names[subject]),
        Unit(KIND_RELATION, kb.relation_names[relation]),
        Unit(KIND_ENTITY, kb.entity_names[target]),
        Unit(KIND_AUXILIARY, desc[subject]),
    )
    return Document(
        id=f"evidence-{i}",
        strategy=STRATEGY_EVIDENCE,
        units=units,
        provenance=(edge_id,),
        seed_offset=i,
        forced_mask=(2,),  # the object slot is always masked downstream
    )


def synth_evidence(
    kb: KnowledgeBase, desc: DescriptionStore, cfg: SynthConfig
) -> Iterator[Document]:
    """cfg.n sampled triple-plus-description documents.

    Sampling is uniform over triples whose subject has a description;
    without replacement the stream ends once eligible triples are
    exhausted.
    """
    eligible = eligible_evidence_edges(kb, desc)
    if len(eligible) == 0:
        logger.warning(
            "evidence synthesis: no triple has a described subject; empty corpus"
        )
        return
    perm = (
        None
        if cfg.sample_with_replacement
        else evidence_permutation(len(eligible), cfg.seed)
    )
    for i in range(evidence_doc_count(len(eligible), cfg)):
        yield build_evidence_doc(kb, desc, cfg, i, eligible, perm)


# --- knowledge walk -------------------------------------------------------


def build_walk_doc(
    kb: KnowledgeBase, cfg: SynthConfig, i: int, starts: np.ndarray
) -> Document:
    stream = Stream(derive_seed(cfg.seed, "walk", i))
    start = int(starts[stream.next_below(len(starts))])
    walk = sample_walk(
        kb,
        start,
        cfg.k,
        stream,
        dead_end_policy=cfg.dead_end_policy,
        no_revisit=cfg.no_revisit,
    )
    units: list[Unit] = [Unit(KIND_ENTITY, kb.entity_names[start])]
    for relation, target in walk.steps:
        units.append(Unit(KIND_RELATION, kb.relation_names[relation]))
        units.append(Unit(KIND_ENTITY, kb.entity_names[target]))
    return Document(
        id=f"walk-{i}",
        strategy=STRATEGY_KNOWLEDGE_WALK,
        units=tuple(units),
        provenance=walk.edge_ids,
        seed_offset=i,
    )


def synth_knowledge_walk(kb: KnowledgeBase, cfg: SynthConfig) -> Iterator[Document]:
    """cfg.n walk documents with uniformly sampled start entities."""
    starts = eligible_start_entities(kb)
    if len(starts) == 0:
        raise SynthesisError("knowledge walk synthesis: no entity has out-edges")
    for i in range(cfg.n):
        yield build_walk_doc(kb, cfg, i, starts)
