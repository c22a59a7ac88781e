"""Classifier and correlation statistics for factuality evaluation.

Balanced accuracy, micro-averaged F1 (which equals plain accuracy in the
single-label binary setting), and Pearson/Spearman correlation with
two-sided p-values from the Student-t statistic t = r*sqrt((n-2)/(1-r^2)).
Undefined situations (single-class gold, zero variance) raise
UndefinedMetricError instead of returning sentinel numbers.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as scipy_stats

from .datasets import LABEL_FACTUAL, LABEL_NON_FACTUAL, CATEGORIES, LabeledPair
from .errors import DatasetError, ParseError, UndefinedMetricError
from .fileio import describe_source, iter_numbered_lines

# Full enumeration of permutation p-values is capped at 8! = 40320 permutations.
PERMUTATION_MAX_N = 8


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts; the positive class is factual."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_labels(cls, gold: Sequence, pred: Sequence, positive) -> "ConfusionMatrix":
        tp = fp = tn = fn = 0
        for g, p in zip(gold, pred):
            if g == positive:
                if p == positive:
                    tp += 1
                else:
                    fn += 1
            else:
                if p == positive:
                    fp += 1
                else:
                    tn += 1
        return cls(tp=tp, fp=fp, tn=tn, fn=fn)


@dataclass(frozen=True)
class CorrelationResult:
    coefficient: float
    p_value: float
    n: int


@dataclass(frozen=True)
class PredictionRecord:
    """One classifier output: hard label plus P(factual)."""

    id: str
    pred_label: str
    score_factual: float


def _check_lengths(gold: Sequence, pred: Sequence) -> None:
    if len(gold) == 0:
        raise UndefinedMetricError("empty input")
    if len(gold) != len(pred):
        raise UndefinedMetricError(
            f"length mismatch: {len(gold)} gold vs {len(pred)} predictions"
        )


def balanced_accuracy(gold: Sequence, pred: Sequence) -> float:
    """(TPR + TNR) / 2; requires both classes present in gold."""
    _check_lengths(gold, pred)
    classes = sorted(set(gold), key=repr)
    if len(classes) != 2:
        raise UndefinedMetricError(
            f"balanced accuracy needs exactly 2 gold classes, got {len(classes)}"
        )
    recalls = []
    for cls in classes:
        hits = sum(1 for g, p in zip(gold, pred) if g == cls and p == cls)
        support = sum(1 for g in gold if g == cls)
        recalls.append(hits / support)
    return sum(recalls) / 2.0


def micro_f1(gold: Sequence, pred: Sequence) -> float:
    """Micro-averaged F1 over all classes.

    With one label per example, micro precision = micro recall = accuracy,
    so this equals accuracy; the counts are aggregated explicitly anyway.
    """
    _check_lengths(gold, pred)
    classes = set(gold) | set(pred)
    tp = fp = fn = 0
    for cls in classes:
        tp += sum(1 for g, p in zip(gold, pred) if g == cls and p == cls)
        fp += sum(1 for g, p in zip(gold, pred) if g != cls and p == cls)
        fn += sum(1 for g, p in zip(gold, pred) if g == cls and p != cls)
    return 2 * tp / (2 * tp + fp + fn)


def _t_p_value(r: float, n: int) -> float:
    """Two-sided p from the t statistic with n - 2 degrees of freedom."""
    dof = n - 2
    if dof <= 0:
        return 1.0
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt(dof / (1.0 - r * r))
    return float(2.0 * scipy_stats.t.sf(abs(t), dof))


def _permutation_p_value(x: np.ndarray, y: np.ndarray, observed: float) -> float:
    """Exact two-sided permutation p over all n! permutations of y."""
    n = len(x)
    if n > PERMUTATION_MAX_N:
        raise UndefinedMetricError(
            f"exact permutation p-value is limited to n <= {PERMUTATION_MAX_N}, got {n}"
        )
    hits = 0
    total = 0
    threshold = abs(observed) - 1e-12
    for perm in itertools.permutations(range(n)):
        total += 1
        if abs(_pearson_coefficient(x, y[list(perm)])) >= threshold:
            hits += 1
    return hits / total


def _pearson_coefficient(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    r = float(np.dot(dx, dy)) / denom
    return max(-1.0, min(1.0, r))


def _as_float_array(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise UndefinedMetricError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise UndefinedMetricError(f"{name} contains non-finite values")
    return arr


def pearson(
    x: Sequence[float], y: Sequence[float], *, p_method: str = "t"
) -> CorrelationResult:
    """Product-moment correlation with a two-sided p-value."""
    xa = _as_float_array(x, "x")
    ya = _as_float_array(y, "y")
    if len(xa) != len(ya):
        raise UndefinedMetricError(f"length mismatch: {len(xa)} vs {len(ya)}")
    n = len(xa)
    if n < 2:
        raise UndefinedMetricError(f"correlation needs n >= 2, got {n}")
    if np.ptp(xa) == 0 or np.ptp(ya) == 0:
        raise UndefinedMetricError("correlation undefined for zero-variance input")
    r = _pearson_coefficient(xa, ya)
    if p_method == "t":
        p = _t_p_value(r, n)
    elif p_method == "permutation":
        p = _permutation_p_value(xa, ya, r)
    else:
        raise UndefinedMetricError(f"unknown p-value method {p_method!r}")
    return CorrelationResult(coefficient=r, p_value=p, n=n)


def spearman(
    x: Sequence[float], y: Sequence[float], *, p_method: str = "t"
) -> CorrelationResult:
    """Pearson correlation of average-ranked data (ties share the mean rank)."""
    xa = _as_float_array(x, "x")
    ya = _as_float_array(y, "y")
    if len(xa) != len(ya):
        raise UndefinedMetricError(f"length mismatch: {len(xa)} vs {len(ya)}")
    if len(xa) < 2:
        raise UndefinedMetricError(f"correlation needs n >= 2, got {len(xa)}")
    rx = scipy_stats.rankdata(xa, method="average")
    ry = scipy_stats.rankdata(ya, method="average")
    return pearson(rx, ry, p_method=p_method)


def join_predictions(
    pairs: Sequence[LabeledPair], predictions: Iterable[PredictionRecord]
) -> list[tuple[LabeledPair, PredictionRecord]]:
    by_id: dict[str, PredictionRecord] = {}
    for record in predictions:
        if record.id in by_id:
            raise DatasetError(f"duplicate prediction id {record.id!r}")
        by_id[record.id] = record
    joined = []
    for pair in pairs:
        record = by_id.pop(pair.id, None)
        if record is None:
            raise DatasetError(f"missing prediction for id {pair.id!r}")
        joined.append((pair, record))
    if by_id:
        stray = next(iter(by_id))
        raise DatasetError(f"prediction id {stray!r} not present in gold pairs")
    return joined


def evaluate_classification(
    pairs: Sequence[LabeledPair],
    predictions: Iterable[PredictionRecord],
    group_by: str | None = None,
) -> list[dict]:
    """Join gold pairs with predictions by id and score them.

    Returns one row for all data plus, when ``group_by="subset"``, one row
    per subset tag in first-appearance order.
    """
    if group_by not in (None, "subset"):
        raise DatasetError(f"unsupported group_by {group_by!r}")
    joined = join_predictions(pairs, predictions)

    def _row(name: str, items) -> dict:
        gold = [pair.label for pair, _ in items]
        pred = [record.pred_label for _, record in items]
        cm = ConfusionMatrix.from_labels(gold, pred, positive=LABEL_FACTUAL)
        return {
            "group": name,
            "n": len(items),
            "bacc": balanced_accuracy(gold, pred),
            "micro_f1": micro_f1(gold, pred),
            "confusion": {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn},
        }

    rows = [_row("all", joined)]
    if group_by == "subset":
        order: list[str] = []
        groups: dict[str, list] = {}
        for pair, record in joined:
            tag = pair.subset or "(untagged)"
            if tag not in groups:
                order.append(tag)
                groups[tag] = []
            groups[tag].append((pair, record))
        rows.extend(_row(tag, groups[tag]) for tag in order)
    return rows


def correlate(
    pairs: Sequence[LabeledPair],
    predictions: Iterable[PredictionRecord],
    *,
    use_binary: bool = False,
    p_method: str = "t",
    group_by: str | None = None,
) -> list[dict]:
    """Correlate model scores with human judgments, overall and per subset."""
    if group_by not in (None, "subset"):
        raise DatasetError(f"unsupported group_by {group_by!r}")
    joined = join_predictions(pairs, predictions)
    for pair, _ in joined:
        if pair.human_score is None:
            raise DatasetError(f"pair {pair.id!r} has no human score")

    def _score(record: PredictionRecord) -> float:
        if use_binary:
            return 1.0 if record.pred_label == LABEL_FACTUAL else 0.0
        return record.score_factual

    def _row(name: str, items) -> dict:
        human = [pair.human_score for pair, _ in items]
        scores = [_score(record) for _, record in items]
        pe = pearson(scores, human, p_method=p_method)
        sp = spearman(scores, human, p_method=p_method)
        return {
            "group": name,
            "n": len(items),
            "pearson": {"coefficient": pe.coefficient, "p_value": pe.p_value},
            "spearman": {"coefficient": sp.coefficient, "p_value": sp.p_value},
        }

    rows = [_row("all", joined)]
    if group_by == "subset":
        order: list[str] = []
        groups: dict[str, list] = {}
        for pair, record in joined:
            tag = pair.subset or "(untagged)"
            if tag not in groups:
                order.append(tag)
                groups[tag] = []
            groups[tag].append((pair, record))
        rows.extend(_row(tag, groups[tag]) for tag in order)
    return rows


def category_ablation(
    pairs: Sequence[LabeledPair], scores: Sequence[float], *, p_method: str = "t"
) -> dict[str, dict]:
    """Correlation change from removing each error category.

    For each category c, recomputes Pearson and Spearman on the pairs not
    tagged c and reports (coefficient without c) - (coefficient on all).
    Categories whose removal leaves fewer than two points, or a constant
    vector, are reported as undefined rather than raised.
    """
    if len(pairs) != len(scores):
        raise DatasetError(
            f"length mismatch: {len(pairs)} pairs vs {len(scores)} scores"
        )
    for pair in pairs:
        if pair.human_score is None:
            raise DatasetError(f"pair {pair.id!r} has no human score")
    human = [pair.human_score for pair in pairs]
    base_pearson = pearson(scores, human, p_method=p_method)
    base_spearman = spearman(scores, human, p_method=p_method)

    report: dict[str, dict] = {}
    for category in CATEGORIES:
        kept = [
            (score, pair.human_score)
            for pair, score in zip(pairs, scores)
            if category not in (pair.error_categories or ())
        ]
        entry: dict = {"n_excluded": len(pairs) - len(kept), "n_kept": len(kept)}
        try:
            sub_scores = [s for s, _ in kept]
            sub_human = [h for _, h in kept]
            pe = pearson(sub_scores, sub_human, p_method=p_method)
            sp = spearman(sub_scores, sub_human, p_method=p_method)
        except UndefinedMetricError as exc:
            entry.update({"defined": False, "reason": str(exc)})
        else:
            entry.update(
                {
                    "defined": True,
                    "pearson_delta": pe.coefficient - base_pearson.coefficient,
                    "spearman_delta": sp.coefficient - base_spearman.coefficient,
                }
            )
        report[category] = entry
    return report


def read_predictions(source) -> list[PredictionRecord]:
    """Parse a predictions file of {id, pred_label, score_factual} lines."""
    records: list[PredictionRecord] = []
    for lineno, line in iter_numbered_lines(source):
        if not line.strip():
            continue

        def fail(msg: str) -> ParseError:
            return ParseError(msg, source=describe_source(source), line=lineno)

        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise fail(f"invalid JSON: {exc.msg}") from exc
        if not isinstance(payload, dict) or set(payload) != {
            "id",
            "pred_label",
            "score_factual",
        }:
            raise fail("prediction records need exactly id, pred_label, score_factual")
        if not isinstance(payload["id"], str) or not payload["id"]:
            raise fail("field 'id' must be a non-empty string")
        if payload["pred_label"] not in (LABEL_FACTUAL, LABEL_NON_FACTUAL):
            raise fail(f"unknown pred_label {payload['pred_label']!r}")
        score = payload["score_factual"]
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise fail("field 'score_factual' must be a number")
        score = float(score)
        if not math.isfinite(score) or not 0.0 <= score <= 1.0:
            raise fail(f"score_factual must be a finite number in [0, 1], got {score}")
        records.append(
            PredictionRecord(
                id=payload["id"],
                pred_label=payload["pred_label"],
                score_factual=score,
            )
        )
    return records

