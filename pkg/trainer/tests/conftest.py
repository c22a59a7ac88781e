import json
import shutil
import subprocess

import pytest

from factforge_trainer import TrainSpec, finetune_classifier, pretrain_mlm

FACTFORGE = shutil.which("factforge")


def run_factforge(*argv):
    assert FACTFORGE is not None, (
        "the factforge CLI must be installed (pip install -e ..) — the bridge "
        "consumes it as its external interface"
    )
    return subprocess.run(
        [FACTFORGE, *argv], capture_output=True, text=True, check=False
    )


def write_pairs_file(path, pairs, human_scores=False):
    """Pairs in the canonical labeled-pairs format (the file contract)."""
    with open(path, "w", encoding="utf-8") as handle:
        for pair_id, summary, document, label in pairs:
            record = {
                "id": pair_id,
                "summary": summary,
                "document": document,
                "label": label,
            }
            if human_scores:
                record["human_score"] = 1.0 if label == "factual" else 0.0
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


def separable_pairs(count, offset=0):
    """A linearly separable synthetic set: marker words decide the label."""
    pairs = []
    for i in range(count):
        n = offset + i
        if i % 2 == 0:
            summary = f"the report confirms the alpha finding alpha in study {n}"
            label = "factual"
        else:
            summary = f"the report invents an omega story omega about study {n}"
            label = "non_factual"
        document = f"the recorded evidence describes the alpha finding of study {n}"
        pairs.append((f"pair-{n}", summary, document, label))
    return pairs


@pytest.fixture(scope="session")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("bridge")


@pytest.fixture(scope="session")
def toy_corpus(workdir):
    """A 500-document walk corpus emitted by the primary CLI."""
    kb = workdir / "kb.tsv"
    lines = [f"city{i}\troad to\tcity{(i * 7 + 1) % 60}" for i in range(60)]
    lines += [f"city{i}\trail to\tcity{(i * 11 + 5) % 60}" for i in range(60)]
    kb.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    out = workdir / "corpus.jsonl"
    proc = run_factforge(
        "synth", "walk", "--kb", str(kb), "--n", "500", "--k", "4",
        "--mask-prob", "0.15", "--seed", "97", "--out", str(out),
    )
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="session")
def checkpoint(toy_corpus, workdir):
    return pretrain_mlm(toy_corpus, TrainSpec(), workdir / "checkpoint", seed=1)


@pytest.fixture(scope="session")
def pair_files(workdir):
    train = write_pairs_file(workdir / "train.jsonl", separable_pairs(160))
    dev = write_pairs_file(workdir / "dev.jsonl", separable_pairs(40, offset=1000))
    test = write_pairs_file(
        workdir / "test.jsonl", separable_pairs(40, offset=2000), human_scores=True
    )
    return {"train": train, "dev": dev, "test": test}


@pytest.fixture(scope="session")
def finetuned(checkpoint, pair_files, workdir):
    # The smoke run uses a learning rate suited to the tiny model; the
    # reference defaults are pinned by test_spec_defaults_match_reference_table.
    return finetune_classifier(
        checkpoint,
        pair_files["train"],
        pair_files["dev"],
        TrainSpec(),
        workdir / "classifier",
        seed=3,
        learning_rate=1e-3,
    )
