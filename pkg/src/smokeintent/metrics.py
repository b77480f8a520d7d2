"""Evaluation: confusion counts, accuracy, per-class precision/recall/F1
with macro and weighted averages, seeded k-fold cross-validation, and the
train/test comparison table across model families.

Rendered reports round to 2 decimals; the underlying values keep full
precision and are what the data files carry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ingest import Dataset, SplitSpec, train_test_split
from .models import TrainedModel, predict_labels


class MetricsError(ValueError):
    pass


@dataclass
class ConfusionMatrix:
    labels: list[int]  # class order for both axes
    counts: np.ndarray  # counts[i, j]: predicted labels[i], observed labels[j]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def index(self, cls: int) -> int:
        try:
            return self.labels.index(cls)
        except ValueError:
            raise MetricsError(f"class {cls} not in label set {self.labels}") from None


def confusion(y_true, y_pred, labels: Sequence[int] | None = None) -> ConfusionMatrix:
    """Tally an N x N matrix of (predicted, observed) label pairs."""
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise MetricsError("y_true and y_pred must be equal-length and non-empty")
    seen = set(np.unique(y_true)) | set(np.unique(y_pred))
    if labels is None:
        labels = sorted(int(v) for v in seen)
    else:
        labels = [int(v) for v in labels]
        outside = sorted(int(v) for v in seen - set(labels))
        if outside:
            raise MetricsError(f"labels {outside} outside the declared class set {labels}")
    pos = {c: i for i, c in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        counts[pos[int(p)], pos[int(t)]] += 1
    return ConfusionMatrix(labels=labels, counts=counts)


def accuracy(cm: ConfusionMatrix) -> float:
    """Correct classifications over all classifications."""
    if cm.total == 0:
        raise MetricsError("empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    zero_division: bool = False  # set when any denominator was zero


def precision_recall_f1(cm: ConfusionMatrix, cls: int) -> ClassMetrics:
    """Per-class precision TP/(TP+FP), recall TP/(TP+FN), and their
    harmonic mean. Zero denominators yield 0 and set the flag."""
    i = cm.index(cls)
    tp = float(cm.counts[i, i])
    predicted = float(cm.counts[i, :].sum())  # TP + FP
    observed = float(cm.counts[:, i].sum())  # TP + FN
    flagged = False
    if predicted > 0:
        precision = tp / predicted
    else:
        precision, flagged = 0.0, True
    if observed > 0:
        recall = tp / observed
    else:
        recall, flagged = 0.0, True
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1, flagged = 0.0, True
    return ClassMetrics(precision, recall, f1, support=int(observed), zero_division=flagged)


@dataclass
class ClassReport:
    per_class: dict[int, ClassMetrics]
    macro: tuple[float, float, float]  # unweighted mean of (precision, recall, f1)
    weighted: tuple[float, float, float]  # support-weighted mean
    accuracy: float
    total: int


def report(y_true, y_pred, labels: Sequence[int] | None = None) -> ClassReport:
    cm = confusion(y_true, y_pred, labels)
    per_class = {cls: precision_recall_f1(cm, cls) for cls in cm.labels}
    k = len(per_class)
    triples = [(m.precision, m.recall, m.f1) for m in per_class.values()]
    supports = [m.support for m in per_class.values()]
    macro = tuple(sum(t[j] for t in triples) / k for j in range(3))
    total = sum(supports)
    weighted = tuple(sum(t[j] * s for t, s in zip(triples, supports)) / total for j in range(3))
    return ClassReport(per_class=per_class, macro=macro, weighted=weighted,
                       accuracy=accuracy(cm), total=total)


def render_report(rep: ClassReport, class_names: dict[int, str] | None = None) -> str:
    """Fixed-width per-class table: precision, recall, F1, cases, then the
    macro and weighted average rows, at 2 decimals."""
    names = class_names or {}
    width = max([12] + [len(names.get(c, str(c))) for c in rep.per_class])
    header = f"{'':<{width}}  Precision  Recall  F1-Score  Cases"
    lines = [header]
    for cls, m in rep.per_class.items():
        label = names.get(cls, str(cls))
        lines.append(f"{label:<{width}}  {m.precision:9.2f}  {m.recall:6.2f}  {m.f1:8.2f}  {m.support:5d}")
    mp, mr, mf = rep.macro
    wp, wr, wf = rep.weighted
    lines.append(f"{'Macro Avg':<{width}}  {mp:9.2f}  {mr:6.2f}  {mf:8.2f}  {rep.total:5d}")
    lines.append(f"{'Weighted Avg':<{width}}  {wp:9.2f}  {wr:6.2f}  {wf:8.2f}  {rep.total:5d}")
    lines.append(f"Accuracy: {rep.accuracy:.4f}")
    return "\n".join(lines)


# --- cross-validation and model comparison -----------------------------------

FitFn = Callable[[np.ndarray, np.ndarray], TrainedModel]


@dataclass(frozen=True)
class ModelSpec:
    name: str
    fit: FitFn


@dataclass
class CvResult:
    fold_scores: list[float]
    mean_score: float


def _fold_assignment(y: np.ndarray, k: int, seed: int, stratified: bool) -> np.ndarray:
    n = len(y)
    rng = np.random.default_rng(seed)
    folds = np.empty(n, dtype=np.int64)
    if stratified:
        classes, counts = np.unique(y, return_counts=True)
        thin = [int(c) for c, cnt in zip(classes, counts) if cnt < k]
        if thin:
            raise MetricsError(f"stratified {k}-fold CV needs >= {k} rows per class; classes {thin} are too small")
        for c in classes:
            members = np.nonzero(y == c)[0]
            members = members[rng.permutation(len(members))]
            folds[members] = np.arange(len(members)) % k
    else:
        order = rng.permutation(n)
        folds[order] = np.arange(n) % k
    return folds


def cross_validate(fit: FitFn, X, y, k: int = 5, seed: int = 0, stratified: bool = True) -> CvResult:
    """Mean held-out-fold accuracy over a deterministic seeded k-fold split."""
    X = np.asarray(X)
    y = np.asarray(y)
    if k < 2:
        raise MetricsError("k must be >= 2")
    if k > len(y):
        raise MetricsError(f"k={k} exceeds the {len(y)} available rows")
    folds = _fold_assignment(y, k, seed, stratified)
    scores = []
    for i in range(k):
        held = folds == i
        if not held.any():
            raise MetricsError(f"fold {i} is empty")
        model = fit(X[~held], y[~held])
        predicted = predict_labels(model, X[held])
        scores.append(float(np.mean(predicted == y[held])))
    return CvResult(fold_scores=scores, mean_score=float(np.mean(scores)))


@dataclass
class ComparisonRow:
    name: str
    training_score: float  # mean validation-fold accuracy on the train split
    test_score: float  # held-out test accuracy


@dataclass
class ComparisonTable:
    rows: list[ComparisonRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "models": [r.name for r in self.rows],
            "training_score": [r.training_score for r in self.rows],
            "test_score": [r.test_score for r in self.rows],
        }

    def render(self) -> str:
        width = max(len("Training Score"), *(len(r.name) for r in self.rows)) if self.rows else 14
        cols = "  ".join(f"{r.name:>{max(len(r.name), 8)}}" for r in self.rows)
        lines = [f"{'':<{width}}  {cols}"]
        for title, attr in (("Training Score", "training_score"), ("Test Score", "test_score")):
            cells = "  ".join(f"{getattr(r, attr):>{max(len(r.name), 8)}.4f}" for r in self.rows)
            lines.append(f"{title:<{width}}  {cells}")
        return "\n".join(lines)


def compare_models(
    ds: Dataset,
    split: SplitSpec,
    specs: Sequence[ModelSpec],
    k: int = 5,
    cv_seed: int | None = None,
) -> ComparisonTable:
    """Train each spec on the train split; report CV training score and
    held-out test accuracy."""
    if not specs:
        raise MetricsError("need at least one model spec")
    train, test = train_test_split(ds, split)
    table = ComparisonTable()
    for spec in specs:
        cv = cross_validate(spec.fit, train.X, train.y, k=k,
                            seed=split.seed if cv_seed is None else cv_seed,
                            stratified=split.stratified)
        model = spec.fit(train.X, train.y)
        predicted = predict_labels(model, test.X)
        test_score = float(np.mean(predicted == test.y))
        table.rows.append(ComparisonRow(spec.name, cv.mean_score, test_score))
    return table
