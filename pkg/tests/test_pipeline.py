import hashlib
import os
import subprocess
import sys

import pytest

from factforge import SynthConfig, load_descriptions, load_kb, read_corpus
from factforge.errors import ConfigError
from factforge.pipeline import run_synthesis
from factforge.synth import (
    STRATEGY_ENTITY_WIKI,
    STRATEGY_EVIDENCE,
    STRATEGY_KNOWLEDGE_WALK,
)

from conftest import K4_LINES


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def medium_kb():
    # Enough entities that multi-chunk parallel runs exercise real merging.
    lines = [f"node{i}\tpoints to\tnode{(i * 7 + 1) % 50}" for i in range(50)]
    lines += [f"node{i}\tskips to\tnode{(i * 3 + 2) % 50}" for i in range(50)]
    return load_kb(lines)


def test_worker_count_does_not_change_bytes(medium_kb, tmp_path):
    cfg = SynthConfig(n=5000, k=4, mask_prob=0.15, seed=99)
    paths = []
    for name, workers in (("w1a.jsonl", 1), ("w1b.jsonl", 1), ("w4.jsonl", 4)):
        out = tmp_path / name
        stats = run_synthesis(medium_kb, cfg, STRATEGY_KNOWLEDGE_WALK, out, workers=workers)
        assert stats.records == 5000
        paths.append(out)
    digests = {digest(p) for p in paths}
    assert len(digests) == 1


def test_stats_match_file_contents(medium_kb, tmp_path):
    cfg = SynthConfig(n=200, k=3, mask_prob=0.15, seed=5)
    out = tmp_path / "c.jsonl"
    stats = run_synthesis(medium_kb, cfg, STRATEGY_KNOWLEDGE_WALK, out)
    records = list(read_corpus(out))
    assert stats.records == len(records) == 200
    assert stats.whitespace_tokens == sum(len(r.text.split()) for r in records)
    texts = [r.text for r in records]
    assert stats.duplicate_documents == len(texts) - len(set(texts))
    assert 0.0 <= stats.duplicate_rate <= 1.0


def test_entity_wiki_plan_count(medium_kb, tmp_path):
    cfg = SynthConfig(seed=1)
    out = tmp_path / "wiki.jsonl"
    stats = run_synthesis(medium_kb, cfg, STRATEGY_ENTITY_WIKI, out)
    expected = sum(1 for e in range(medium_kb.num_entities) if medium_kb.out_degree(e) > 0)
    assert stats.records == expected


def test_evidence_without_replacement_is_bounded(tmp_path):
    kb = load_kb(K4_LINES)
    desc = load_descriptions([f"{n}\tabout {n}." for n in ("north", "south")], kb)
    cfg = SynthConfig(n=10_000, seed=2, sample_with_replacement=False)
    out = tmp_path / "ev.jsonl"
    stats = run_synthesis(kb, cfg, STRATEGY_EVIDENCE, out, desc)
    assert stats.records == 6 <= kb.num_triples


def test_evidence_requires_descriptions(tmp_path):
    kb = load_kb(K4_LINES)
    with pytest.raises(ConfigError):
        run_synthesis(kb, SynthConfig(seed=1), STRATEGY_EVIDENCE, tmp_path / "x.jsonl")


def test_unknown_strategy_rejected(medium_kb, tmp_path):
    with pytest.raises(ConfigError):
        run_synthesis(medium_kb, SynthConfig(seed=1), "mystery", tmp_path / "x.jsonl")


def test_workers_validated(medium_kb, tmp_path):
    with pytest.raises(ConfigError):
        run_synthesis(
            medium_kb, SynthConfig(seed=1), STRATEGY_KNOWLEDGE_WALK, tmp_path / "x.jsonl", workers=0
        )


def test_parallel_wiki_and_evidence_match_serial(medium_kb, tmp_path):
    desc_lines = [f"node{i}\tthe write-up of node {i}." for i in range(0, 50, 2)]
    desc = load_descriptions(desc_lines, medium_kb)
    for strategy, kwargs in (
        (STRATEGY_ENTITY_WIKI, {}),
        (STRATEGY_EVIDENCE, {"desc": desc}),
    ):
        cfg = SynthConfig(n=3000, seed=13)
        outs = []
        for name, workers in (("s", 1), ("p", 3)):
            out = tmp_path / f"{strategy}-{name}.jsonl"
            run_synthesis(medium_kb, cfg, strategy, out, workers=workers, **kwargs)
            outs.append(out)
        assert digest(outs[0]) == digest(outs[1])


def test_kernel_backend_does_not_change_bytes(tmp_path):
    pytest.importorskip("factforge._speedups")
    kb_path = tmp_path / "kb.tsv"
    kb_path.write_text(
        "".join(f"a{i}\tr\ta{(i * 3 + 1) % 40}\n" for i in range(40)), encoding="utf-8"
    )
    digests = {}
    for backend in ("c", "py"):
        out = tmp_path / f"{backend}.jsonl"
        env = dict(os.environ, FACTFORGE_KERNELS=backend)
        subprocess.run(
            [sys.executable, "-m", "factforge.cli", "synth", "walk",
             "--kb", str(kb_path), "--n", "500", "--k", "4", "--seed", "17",
             "--out", str(out)],
            check=True,
            capture_output=True,
            env=env,
        )
        digests[backend] = digest(out)
    assert digests["c"] == digests["py"]
