"""Command-line entry point.

Subcommands: ``stats``, ``synth entity-wiki|evidence|walk``,
``dataset prepare``, ``eval classify``, ``eval correlate``.

Exit codes: 0 success, 1 domain errors (parse/integrity/undefined
metric), 2 usage errors. Option precedence is flags > config file >
defaults; the resolved configuration (including the seed, explicit or
drawn from os.urandom and printed at start) is echoed into each run's
output metadata.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

from . import __version__, datasets, metrics, pipeline
from .errors import ConfigError, DatasetError, FactforgeError
from .kb import load_kb, load_descriptions
from .masking import MASK_SURFACE  # noqa: F401  (re-exported for scripts)
from .synth import (
    DEAD_END_RESAMPLE,
    DEAD_END_TRUNCATE,
    STRATEGY_ENTITY_WIKI,
    STRATEGY_EVIDENCE,
    STRATEGY_KNOWLEDGE_WALK,
    SynthConfig,
)

_STRATEGY_BY_FLAG = {
    "entity-wiki": STRATEGY_ENTITY_WIKI,
    "evidence": STRATEGY_EVIDENCE,
    "walk": STRATEGY_KNOWLEDGE_WALK,
}

_WORKERS_ENV = "FACTFORGE_WORKERS"


@dataclass
class RunConfig:
    """Resolved settings for one invocation; field names match flag dests."""

    subcommand: str
    strategy: str | None = None
    kb: str | None = None
    descriptions: str | None = None
    out: str | None = None
    in_path: str | None = None
    gold: str | None = None
    pred: str | None = None
    n: int = 100_000
    k: int = 5
    mask_prob: float = 0.15
    seed: int | None = None
    workers: int = 1
    max_units_per_doc: int = 480
    dead_end_policy: str = DEAD_END_TRUNCATE
    no_revisit: bool = False
    add_inverse: bool = False
    without_replacement: bool = False
    allow_unmasked: bool = False
    evidence_forced_only: bool = False
    format: str | None = None
    manifest: str | None = None
    drop_nei: bool = False
    exclude_subset: str | None = None
    group_by: str | None = None
    binary: bool = False
    p_method: str = "t"
    ablate_categories: bool = False
    config: str | None = None

    def public_dict(self) -> dict:
        payload = dataclasses.asdict(self)
        return {k: v for k, v in payload.items() if v is not None}


_STRUCTURAL_DESTS = {"command", "dataset_command", "eval_command", "strategy", "help"}

_BOOL_FIELDS = {
    "no_revisit",
    "add_inverse",
    "without_replacement",
    "allow_unmasked",
    "evidence_forced_only",
    "drop_nei",
    "binary",
    "ablate_categories",
}
_INT_FIELDS = {"n", "k", "seed", "workers", "max_units_per_doc"}
_FLOAT_FIELDS = {"mask_prob"}


def _positive_int(value: str) -> int:
    parsed = int(value)
    if parsed < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {parsed}")
    return parsed


def _min_units(value: str) -> int:
    parsed = int(value)
    if parsed < 3:
        raise argparse.ArgumentTypeError(f"must be >= 3, got {parsed}")
    return parsed


def _unit_interval(value: str) -> float:
    parsed = float(value)
    if not 0.0 <= parsed <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {parsed}")
    return parsed


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        default=None,
        help="config file of 'key = value' lines; flags take precedence",
    )


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="factforge",
        description="Knowledge-base factuality corpora, dataset adapters, and evaluation",
    )
    parser.add_argument("--version", action="version", version=f"factforge {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    stats = commands.add_parser("stats", help="print knowledge-base statistics as JSON")
    stats.add_argument("--kb", default=None, help="triples file (subject\\trelation\\tobject)")
    stats.add_argument(
        "--add-inverse",
        dest="add_inverse",
        action="store_true",
        default=None,
        help="materialize reverse edges with an 'inverse ' relation prefix",
    )
    _add_common(stats)
    registry["stats"] = stats

    synth = commands.add_parser("synth", help="emit a masked pretraining corpus")
    synth.add_argument(
        "strategy",
        choices=sorted(_STRATEGY_BY_FLAG),
        help="corpus flavor to synthesize",
    )
    synth.add_argument("--kb", default=None, help="triples file")
    synth.add_argument(
        "--descriptions",
        default=None,
        help="entity\\tparagraph file (required for the evidence strategy)",
    )
    synth.add_argument("--out", default=None, help="output corpus path (JSON lines)")
    synth.add_argument(
        "--n", type=_positive_int, default=None, help="document count (default 100000)"
    )
    synth.add_argument(
        "--k", type=_positive_int, default=None, help="walk hop count (default 5)"
    )
    synth.add_argument(
        "--mask-prob",
        dest="mask_prob",
        type=_unit_interval,
        default=None,
        help="masking probability (default 0.15)",
    )
    synth.add_argument(
        "--seed",
        type=int,
        default=None,
        help="master seed; without it one is drawn from os.urandom and printed",
    )
    synth.add_argument(
        "--max-units-per-doc",
        dest="max_units_per_doc",
        type=_min_units,
        default=None,
        help="entity-wiki truncation cap in units (default 480)",
    )
    synth.add_argument(
        "--dead-end-policy",
        dest="dead_end_policy",
        choices=[DEAD_END_TRUNCATE, DEAD_END_RESAMPLE],
        default=None,
        help="what to do when a walk dead-ends early (default truncate)",
    )
    synth.add_argument(
        "--no-revisit",
        dest="no_revisit",
        action="store_true",
        default=None,
        help="reject walks that revisit an entity, with bounded resampling",
    )
    synth.add_argument(
        "--add-inverse",
        dest="add_inverse",
        action="store_true",
        default=None,
        help="materialize reverse edges before synthesis",
    )
    replacement = synth.add_mutually_exclusive_group()
    replacement.add_argument(
        "--with-replacement",
        dest="without_replacement",
        action="store_false",
        default=None,
        help="sample evidence triples with replacement (default)",
    )
    replacement.add_argument(
        "--without-replacement",
        dest="without_replacement",
        action="store_true",
        default=None,
        help="sample evidence triples without replacement",
    )
    synth.add_argument(
        "--allow-unmasked",
        dest="allow_unmasked",
        action="store_true",
        default=None,
        help="drop the guarantee of at least one mask per document",
    )
    synth.add_argument(
        "--evidence-forced-only",
        dest="evidence_forced_only",
        action="store_true",
        default=None,
        help="mask only the built-in object slot of evidence documents",
    )
    synth.add_argument(
        "--workers",
        type=_positive_int,
        default=None,
        help=f"worker processes; never changes output bytes (default ${_WORKERS_ENV} or 1)",
    )
    _add_common(synth)
    registry["synth"] = synth

    dataset = commands.add_parser("dataset", help="dataset adapter commands")
    dataset_commands = dataset.add_subparsers(dest="dataset_command", required=True)
    prepare = dataset_commands.add_parser(
        "prepare", help="convert a source dataset to canonical labeled pairs"
    )
    prepare.add_argument(
        "--format",
        choices=sorted(datasets.FORMATS),
        default=None,
        help="source dataset format",
    )
    prepare.add_argument("--in", dest="in_path", default=None, help="source file")
    prepare.add_argument("--out", default=None, help="canonical pairs output path")
    prepare.add_argument(
        "--manifest",
        default=None,
        help="JSON adapter manifest overriding the built-in column mapping",
    )
    prepare.add_argument(
        "--drop-nei",
        dest="drop_nei",
        action="store_true",
        default=None,
        help="remove not-enough-information rows and binarize the rest",
    )
    prepare.add_argument(
        "--exclude-subset",
        dest="exclude_subset",
        default=None,
        help="drop pairs carrying this subset tag (e.g. frank)",
    )
    _add_common(prepare)
    registry["dataset prepare"] = prepare

    evaluate = commands.add_parser("eval", help="score predictions against gold pairs")
    eval_commands = evaluate.add_subparsers(dest="eval_command", required=True)

    classify = eval_commands.add_parser(
        "classify", help="balanced accuracy and micro F1 of hard labels"
    )
    classify.add_argument("--gold", default=None, help="canonical pairs file")
    classify.add_argument("--pred", default=None, help="predictions file")
    classify.add_argument(
        "--group-by",
        dest="group_by",
        choices=["subset"],
        default=None,
        help="also report one row per subset tag",
    )
    _add_common(classify)
    registry["eval classify"] = classify

    correlate = eval_commands.add_parser(
        "correlate", help="Pearson/Spearman correlation with human scores"
    )
    correlate.add_argument("--gold", default=None, help="canonical pairs file with human scores")
    correlate.add_argument("--pred", default=None, help="predictions file")
    correlate.add_argument(
        "--group-by",
        dest="group_by",
        choices=["subset"],
        default=None,
        help="also report one row per subset tag",
    )
    correlate.add_argument(
        "--binary",
        action="store_true",
        default=None,
        help="correlate hard labels (0/1) instead of P(factual)",
    )
    correlate.add_argument(
        "--p-method",
        dest="p_method",
        choices=["t", "permutation"],
        default=None,
        help="p-value method; permutation is exact and limited to small n",
    )
    correlate.add_argument(
        "--ablate-categories",
        dest="ablate_categories",
        action="store_true",
        default=None,
        help="report correlation deltas from removing each error category",
    )
    _add_common(correlate)
    registry["eval correlate"] = correlate

    return parser, registry


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = stripped.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _coerce(field_name: str, raw: str):
    if field_name in _BOOL_FIELDS:
        lowered = raw.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"config value for {field_name} must be a boolean, got {raw!r}")
    try:
        if field_name in _INT_FIELDS:
            return int(raw)
        if field_name in _FLOAT_FIELDS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"config value for {field_name}: {exc}") from exc
    return raw


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Apply flags > config file > defaults and build the RunConfig."""
    subcommand = ns.command
    if subcommand == "dataset":
        subcommand = f"dataset {ns.dataset_command}"
    elif subcommand == "eval":
        subcommand = f"eval {ns.eval_command}"

    file_values: dict[str, str] = {}
    config_path = getattr(ns, "config", None)
    if config_path:
        file_values = _parse_config_file(config_path)

    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    resolved: dict[str, object] = {"subcommand": subcommand}
    if getattr(ns, "strategy", None):
        resolved["strategy"] = _STRATEGY_BY_FLAG[ns.strategy]

    consumed = set()
    for name, field_def in fields.items():
        if name in ("subcommand", "strategy"):
            continue
        flag_value = getattr(ns, name, None)
        key = "in" if name == "in_path" else name.replace("_", "-")
        if flag_value is not None:
            resolved[name] = flag_value
            consumed.add(key)
        elif key in file_values:
            resolved[name] = _coerce(name, file_values[key])
            consumed.add(key)
        elif field_def.default is not dataclasses.MISSING:
            resolved[name] = field_def.default

    unknown = set(file_values) - consumed - {
        "in" if f == "in_path" else f.replace("_", "-") for f in fields
    }
    if unknown:
        raise ConfigError(f"unknown config file keys: {sorted(unknown)}")

    rc = RunConfig(**resolved)
    if rc.workers == RunConfig.workers and "workers" not in file_values and getattr(ns, "workers", None) is None:
        rc.workers = int(os.environ.get(_WORKERS_ENV, "1"))
    if rc.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {rc.workers}")
    return rc


def _require(parser: argparse.ArgumentParser, rc: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(rc, name) is None:
            flag = "--in" if name == "in_path" else "--" + name.replace("_", "-")
            parser.error(f"{rc.subcommand}: {flag} is required")


def _ensure_seed(rc: RunConfig) -> None:
    if rc.seed is None:
        rc.seed = int.from_bytes(os.urandom(8), "big")
        print(f"factforge: seed not given; using {rc.seed} (from os.urandom)", file=sys.stderr)


def _write_sidecar(out_path: str, rc: RunConfig, extra: dict) -> None:
    payload = {"config": rc.public_dict(), **extra}
    with open(out_path + ".meta.json", "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")


def _print_table(headers: list[str], rows: list[list[str]]) -> None:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(row):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
    print(fmt(headers), file=sys.stderr)
    print(fmt(["-" * w for w in widths]), file=sys.stderr)
    for row in rows:
        print(fmt(row), file=sys.stderr)


def cmd_stats(parser, rc: RunConfig) -> int:
    _require(parser, rc, "kb")
    kb = load_kb(rc.kb, add_inverse=rc.add_inverse)
    print(json.dumps(kb.stats().as_dict(), ensure_ascii=False))
    return 0


def cmd_synth(parser, rc: RunConfig) -> int:
    _require(parser, rc, "kb", "out")
    if rc.strategy == STRATEGY_EVIDENCE:
        _require(parser, rc, "descriptions")
    _ensure_seed(rc)
    cfg = SynthConfig(
        n=rc.n,
        k=rc.k,
        mask_prob=rc.mask_prob,
        seed=rc.seed,
        max_units_per_doc=rc.max_units_per_doc,
        dead_end_policy=rc.dead_end_policy,
        sample_with_replacement=not rc.without_replacement,
        no_revisit=rc.no_revisit,
    )
    kb = load_kb(rc.kb, add_inverse=rc.add_inverse)
    desc = None
    if rc.strategy == STRATEGY_EVIDENCE:
        desc = load_descriptions(rc.descriptions, kb)
    print(f"factforge: resolved config: {json.dumps(rc.public_dict(), sort_keys=True)}", file=sys.stderr)
    stats = pipeline.run_synthesis(
        kb,
        cfg,
        rc.strategy,
        rc.out,
        desc,
        workers=rc.workers,
        allow_unmasked=rc.allow_unmasked,
        forced_only=rc.evidence_forced_only,
    )
    _write_sidecar(rc.out, rc, {"corpus": stats.as_dict()})
    print(
        f"factforge: wrote {stats.records} records to {rc.out} "
        f"({stats.whitespace_tokens} whitespace tokens, "
        f"duplicate rate {stats.duplicate_rate:.4f})",
        file=sys.stderr,
    )
    return 0


def cmd_dataset_prepare(parser, rc: RunConfig) -> int:
    _require(parser, rc, "format", "in_path", "out")
    manifest = datasets.load_manifest(rc.manifest) if rc.manifest else None
    pairs = datasets.load_pairs(rc.in_path, rc.format, manifest)
    loaded = len(pairs)
    if rc.drop_nei:
        pairs = datasets.drop_nei(pairs)
    elif any(pair.label is None for pair in pairs):
        raise DatasetError(
            f"{rc.in_path}: format {rc.format!r} has NEI rows; pass --drop-nei"
        )
    if rc.exclude_subset:
        pairs = datasets.exclude_subset(pairs, rc.exclude_subset)
    written = datasets.write_pairs(pairs, rc.out)
    _write_sidecar(rc.out, rc, {"pairs": {"loaded": loaded, "written": written}})
    print(f"factforge: wrote {written} of {loaded} pairs to {rc.out}", file=sys.stderr)
    return 0


def cmd_eval_classify(parser, rc: RunConfig) -> int:
    _require(parser, rc, "gold", "pred")
    pairs = datasets.read_pairs(rc.gold)
    predictions = metrics.read_predictions(rc.pred)
    rows = metrics.evaluate_classification(pairs, predictions, group_by=rc.group_by)
    report = {"command": rc.subcommand, "config": rc.public_dict(), "groups": rows}
    print(json.dumps(report, ensure_ascii=False))
    _print_table(
        ["group", "n", "bacc", "micro_f1"],
        [
            [row["group"], str(row["n"]), f"{row['bacc']:.4f}", f"{row['micro_f1']:.4f}"]
            for row in rows
        ],
    )
    return 0


def cmd_eval_correlate(parser, rc: RunConfig) -> int:
    _require(parser, rc, "gold", "pred")
    pairs = datasets.read_pairs(rc.gold)
    predictions = metrics.read_predictions(rc.pred)
    rows = metrics.correlate(
        pairs,
        predictions,
        use_binary=rc.binary,
        p_method=rc.p_method,
        group_by=rc.group_by,
    )
    report = {"command": rc.subcommand, "config": rc.public_dict(), "groups": rows}
    if rc.ablate_categories:
        joined = metrics.join_predictions(pairs, predictions)
        scores = [
            (1.0 if record.pred_label == datasets.LABEL_FACTUAL else 0.0)
            if rc.binary
            else record.score_factual
            for _, record in joined
        ]
        report["ablation"] = metrics.category_ablation(
            [pair for pair, _ in joined], scores, p_method=rc.p_method
        )
    print(json.dumps(report, ensure_ascii=False))
    _print_table(
        ["group", "n", "pearson", "p", "spearman", "p"],
        [
            [
                row["group"],
                str(row["n"]),
                f"{row['pearson']['coefficient']:.4f}",
                f"{row['pearson']['p_value']:.3g}",
                f"{row['spearman']['coefficient']:.4f}",
                f"{row['spearman']['p_value']:.3g}",
            ]
            for row in rows
        ],
    )
    return 0


_HANDLERS = {
    "stats": cmd_stats,
    "synth": cmd_synth,
    "dataset prepare": cmd_dataset_prepare,
    "eval classify": cmd_eval_classify,
    "eval correlate": cmd_eval_correlate,
}


def run(argv=None) -> int:
    """Parse argv and dispatch; raises SystemExit(2) on usage errors."""
    parser, _ = build_parser()
    ns = parser.parse_args(argv)
    rc = resolve_config(ns)
    return _HANDLERS[rc.subcommand](parser, rc)


def main(argv=None) -> int:
    try:
        return run(argv)
    except FactforgeError as exc:
        print(f"factforge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
