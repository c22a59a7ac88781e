"""Corpus emission: synthesis + masking + serialization, serial or parallel.

Document ``i`` is a pure function of (kb, config, i), so the index space
can be chunked across forked workers and the serialized chunks written
back in index order; output bytes are identical for any worker count.
"""

from __future__ import annotations

import hashlib
import multiprocessing
from dataclasses import dataclass

import numpy as np

from . import kernels, synth
from .errors import ConfigError, SynthesisError
from .kb import DescriptionStore, KnowledgeBase
from .masking import CorpusRecord, mask_document, mask_rng
from .synth import (
    STRATEGY_ENTITY_WIKI,
    STRATEGY_EVIDENCE,
    STRATEGY_KNOWLEDGE_WALK,
    SynthConfig,
)

_CHUNK_SIZE = 2048


@dataclass(frozen=True)
class CorpusRunStats:
    """Post-run statistics reported alongside the corpus file."""

    records: int
    whitespace_tokens: int
    duplicate_documents: int
    backend: str

    @property
    def duplicate_rate(self) -> float:
        return self.duplicate_documents / self.records if self.records else 0.0

    def as_dict(self) -> dict:
        return {
            "records": self.records,
            "whitespace_tokens": self.whitespace_tokens,
            "duplicate_documents": self.duplicate_documents,
            "duplicate_rate": self.duplicate_rate,
            "kernel_backend": self.backend,
        }


@dataclass(frozen=True)
class _SynthPlan:
    """Everything a worker needs to build document i deterministically."""

    kb: KnowledgeBase
    desc: DescriptionStore | None
    cfg: SynthConfig
    strategy: str
    count: int
    wiki_entities: np.ndarray | None
    eligible_edges: np.ndarray | None
    permutation: np.ndarray | None
    walk_starts: np.ndarray | None
    allow_unmasked: bool
    forced_only: bool

    def build_document(self, i: int):
        if self.strategy == STRATEGY_ENTITY_WIKI:
            return synth.build_entity_wiki_doc(
                self.kb, self.cfg, i, int(self.wiki_entities[i])
            )
        if self.strategy == STRATEGY_EVIDENCE:
            return synth.build_evidence_doc(
                self.kb, self.desc, self.cfg, i, self.eligible_edges, self.permutation
            )
        return synth.build_walk_doc(self.kb, self.cfg, i, self.walk_starts)

    def render_record(self, i: int) -> tuple[str, str]:
        """(serialized line, rendered text) for document i."""
        doc = self.build_document(i)
        masked = mask_document(
            doc,
            self.cfg.mask_prob,
            mask_rng(self.cfg.seed, doc.id),
            allow_unmasked=self.allow_unmasked,
            forced_only=self.forced_only,
        )
        record = CorpusRecord.from_masked(masked, self.cfg.seed)
        return record.to_json_line(), record.text


def make_plan(
    kb: KnowledgeBase,
    cfg: SynthConfig,
    strategy: str,
    desc: DescriptionStore | None = None,
    *,
    allow_unmasked: bool = False,
    forced_only: bool = False,
) -> _SynthPlan:
    wiki_entities = eligible_edges = permutation = walk_starts = None
    if strategy == STRATEGY_ENTITY_WIKI:
        wiki_entities = synth.eligible_start_entities(kb)
        count = len(wiki_entities)
    elif strategy == STRATEGY_EVIDENCE:
        if desc is None:
            raise ConfigError("evidence synthesis requires a description store")
        eligible_edges = synth.eligible_evidence_edges(kb, desc)
        if not cfg.sample_with_replacement and len(eligible_edges):
            permutation = synth.evidence_permutation(len(eligible_edges), cfg.seed)
        count = synth.evidence_doc_count(len(eligible_edges), cfg)
    elif strategy == STRATEGY_KNOWLEDGE_WALK:
        walk_starts = synth.eligible_start_entities(kb)
        if len(walk_starts) == 0:
            raise SynthesisError("knowledge walk synthesis: no entity has out-edges")
        count = cfg.n
    else:
        raise ConfigError(f"unknown strategy {strategy!r}")
    return _SynthPlan(
        kb=kb,
        desc=desc,
        cfg=cfg,
        strategy=strategy,
        count=count,
        wiki_entities=wiki_entities,
        eligible_edges=eligible_edges,
        permutation=permutation,
        walk_starts=walk_starts,
        allow_unmasked=allow_unmasked,
        forced_only=forced_only,
    )


# Workers inherit the plan through fork; no pickling of the KB per task.
_WORKER_PLAN: _SynthPlan | None = None


def _render_chunk(bounds: tuple[int, int]):
    lo, hi = bounds
    lines: list[str] = []
    hashes: list[bytes] = []
    tokens = 0
    for i in range(lo, hi):
        line, text = _WORKER_PLAN.render_record(i)
        lines.append(line)
        tokens += len(text.split())
        hashes.append(hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest())
    return "".join(f"{line}\n" for line in lines), tokens, hashes


def run_synthesis(
    kb: KnowledgeBase,
    cfg: SynthConfig,
    strategy: str,
    out_path,
    desc: DescriptionStore | None = None,
    *,
    workers: int = 1,
    allow_unmasked: bool = False,
    forced_only: bool = False,
) -> CorpusRunStats:
    """Emit a masked corpus file; returns run statistics.

    The output bytes depend only on (kb, cfg, strategy, masking options),
    never on ``workers``.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    plan = make_plan(
        kb, cfg, strategy, desc, allow_unmasked=allow_unmasked, forced_only=forced_only
    )
    bounds = [
        (lo, min(lo + _CHUNK_SIZE, plan.count))
        for lo in range(0, plan.count, _CHUNK_SIZE)
    ]

    seen: set[bytes] = set()
    duplicates = 0
    tokens = 0
    records = 0

    global _WORKER_PLAN
    _WORKER_PLAN = plan
    try:
        with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
            if workers == 1 or len(bounds) <= 1:
                chunks = map(_render_chunk, bounds)
                for blob, chunk_tokens, hashes in chunks:
                    handle.write(blob)
                    tokens += chunk_tokens
                    records += len(hashes)
                    for digest in hashes:
                        if digest in seen:
                            duplicates += 1
                        else:
                            seen.add(digest)
            else:
                ctx = multiprocessing.get_context("fork")
                with ctx.Pool(processes=workers) as pool:
                    for blob, chunk_tokens, hashes in pool.imap(_render_chunk, bounds):
                        handle.write(blob)
                        tokens += chunk_tokens
                        records += len(hashes)
                        for digest in hashes:
                            if digest in seen:
                                duplicates += 1
                            else:
                                seen.add(digest)
    finally:
        _WORKER_PLAN = None

    return CorpusRunStats(
        records=records,
        whitespace_tokens=tokens,
        duplicate_documents=duplicates,
        backend=kernels.BACKEND,
    )
