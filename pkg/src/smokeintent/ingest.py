"""Data preparation: raw survey CSV -> modeling-ready dataset.

Stages mirror the preparation pipeline: parse, impute nulls as 0,
filter to the never-smoker cohort, derive the binary intention label,
and split train/test. A synthetic generator produces catalog-conformant
CSVs with a planted signal for desk-scale testing.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .schema import KIND_MULTI, QuestionCatalog, QuestionRole, SurveyQuestion

TARGET_POLICIES = ("q16-only", "any-of-six")
LABEL_COLUMN = "__label__"


class IngestError(ValueError):
    """Raised when an input file or configuration violates the pipeline contract."""


class DomainViolation(IngestError):
    """Feature values outside a column's declared domain (plus 0)."""

    def __init__(self, cells: list[tuple[int, str, int]]):
        self.cells = cells
        shown = ", ".join(f"(row {r}, {c}={v})" for r, c, v in cells[:20])
        more = "" if len(cells) <= 20 else f" and {len(cells) - 20} more"
        super().__init__(f"values outside declared domains: {shown}{more}")


@dataclass
class RawTable:
    columns: list[str]
    rows: list[list[int | None]]
    extra_columns: tuple[str, ...] = ()  # header names absent from the catalog
    row_ids: list[int] = field(default_factory=list)  # original data-row indices

    def __post_init__(self):
        if not self.row_ids:
            self.row_ids = list(range(len(self.rows)))

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise IngestError(f"column {name!r} absent from table") from None


@dataclass
class Dataset:
    feature_names: list[str]
    X: np.ndarray  # (n, d) integer codes, 0 = unanswered
    y: np.ndarray  # (n,) binary labels
    row_ids: np.ndarray  # original row indices, for traceability

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.int64)
        self.y = np.asarray(self.y, dtype=np.int64)
        self.row_ids = np.asarray(self.row_ids, dtype=np.int64)
        if self.X.shape[0] != self.y.shape[0]:
            raise IngestError(f"X has {self.X.shape[0]} rows but y has {self.y.shape[0]}")
        if self.X.shape[0] != self.row_ids.shape[0]:
            raise IngestError("row_ids length does not match X")
        bad = set(np.unique(self.y)) - {0, 1}
        if bad:
            raise IngestError(f"labels must be 0/1, found {sorted(bad)}")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise IngestError(f"test_fraction must be in (0,1), got {self.test_fraction}")


@dataclass(frozen=True)
class CohortConfig:
    """Which cohort-selection questions the never-smoker filter applies.

    Q59 (refused tobacco sale) is listed as a non-smoker selector but its
    wording presupposes purchase attempts, so it is disabled by default.
    The non-e-smoker selector (Q28) is an optional extra filter.
    """

    disabled: tuple[str, ...] = ("Q59",)
    include_non_esmoker: bool = False

    def enabled_questions(self, catalog: QuestionCatalog) -> list[SurveyQuestion]:
        selected = [q for q in catalog.by_role(QuestionRole.COHORT_NON_SMOKER) if q.id not in self.disabled]
        if self.include_non_esmoker:
            selected += [q for q in catalog.by_role(QuestionRole.COHORT_NON_ESMOKER) if q.id not in self.disabled]
        return selected


def _parse_cell(text: str) -> int | None:
    """Integer code, or None for empty/unparseable cells."""
    text = text.strip()
    if not text:
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        return None
    return int(value) if value.is_integer() else None


def parse_csv(data: bytes | str, catalog: QuestionCatalog) -> RawTable:
    """Parse a UTF-8 CSV with a header row into a RawTable.

    Header names are matched against the catalog's expanded column ids;
    unknown columns are retained but flagged in ``extra_columns``.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("missing header row (empty input)") from None
    header = [h.strip() for h in header]
    known = {c.column_id for c in catalog.columns()}
    if known and not (set(header) & known):
        raise IngestError(f"header shares no column with the catalog; unmatched names: {sorted(header)}")
    extra = tuple(h for h in header if h not in known)

    rows: list[list[int | None]] = []
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue  # trailing blank line
        if len(record) != len(header):
            raise IngestError(f"line {lineno}: expected {len(header)} cells, got {len(record)}")
        rows.append([_parse_cell(cell) for cell in record])
    if not rows:
        raise IngestError("no data rows")
    return RawTable(columns=header, rows=rows, extra_columns=extra)


def read_csv(path, catalog: QuestionCatalog) -> RawTable:
    with open(path, "rb") as fh:
        return parse_csv(fh.read(), catalog)


def count_nulls(table: RawTable) -> int:
    return sum(cell is None for row in table.rows for cell in row)


def impute_nulls(table: RawTable) -> RawTable:
    """Replace every null with code 0 (= unanswered). Idempotent."""
    rows = [[0 if cell is None else cell for cell in row] for row in table.rows]
    return RawTable(table.columns, rows, table.extra_columns, list(table.row_ids))


def filter_never_smokers(
    table: RawTable, catalog: QuestionCatalog, config: CohortConfig | None = None
) -> tuple[RawTable, dict[str, int]]:
    """Keep only rows answering "never/no" to every enabled cohort question.

    Returns the filtered table and a per-question removal count (rows are
    attributed to the first enabled question, in catalog order, that
    rejects them). Unanswered cohort questions reject the row: membership
    in the never-smoker cohort must be affirmative.
    """
    config = config or CohortConfig()
    questions = config.enabled_questions(catalog)
    indices = []
    for q in questions:
        indices.append((q, table.column_index(q.id)))

    removed = {q.id: 0 for q, _ in indices}
    kept_rows: list[list[int | None]] = []
    kept_ids: list[int] = []
    for row, rid in zip(table.rows, table.row_ids):
        culprit = None
        for q, col in indices:
            if row[col] not in q.keep_codes:
                culprit = q.id
                break
        if culprit is None:
            kept_rows.append(row)
            kept_ids.append(rid)
        else:
            removed[culprit] += 1
    return RawTable(table.columns, kept_rows, table.extra_columns, kept_ids), removed


@dataclass
class TargetSummary:
    policy: str
    n_dropped: int
    n_yes: int
    n_no: int


def _resolve_single_target(catalog: QuestionCatalog) -> SurveyQuestion:
    targets = catalog.by_role(QuestionRole.TARGET)
    if not targets:
        raise IngestError("catalog has no target questions")
    for q in targets:
        if q.id == "Q16":
            return q
    return targets[0]


def derive_target(
    table: RawTable, catalog: QuestionCatalog, policy: str = "q16-only"
) -> tuple[Dataset, TargetSummary]:
    """Build the feature matrix and binary label from an imputed, filtered table.

    ``q16-only``: label from the single next-year cigarette question.
    ``any-of-six``: 1 if any target question has a yes-class answer, 0 if
    all six are answered no-class; otherwise the row is dropped.
    Feature values are validated against their column domains.
    """
    if policy not in TARGET_POLICIES:
        raise IngestError(f"unknown target policy {policy!r} (expected one of {TARGET_POLICIES})")

    feature_cols = catalog.feature_columns()
    missing = [c.column_id for c in feature_cols if c.column_id not in table.columns]
    if missing:
        raise IngestError(f"predictor columns absent from table: {missing}")
    feat_idx = [table.column_index(c.column_id) for c in feature_cols]

    if policy == "q16-only":
        targets = [_resolve_single_target(catalog)]
    else:
        targets = catalog.by_role(QuestionRole.TARGET)
        if not targets:
            raise IngestError("catalog has no target questions")
    target_idx = [table.column_index(q.id) for q in targets]

    X_rows: list[list[int]] = []
    y: list[int] = []
    row_ids: list[int] = []
    dropped = 0
    for row, rid in zip(table.rows, table.row_ids):
        answers = [row[i] for i in target_idx]
        if any(a is None for a in answers):
            raise IngestError("table contains nulls; run impute_nulls first")
        if policy == "q16-only":
            q, a = targets[0], answers[0]
            if a in q.yes_codes:
                label = 1
            elif a in q.no_codes:
                label = 0
            else:
                dropped += 1
                continue
        else:
            if any(a in q.yes_codes for q, a in zip(targets, answers)):
                label = 1
            elif all(a in q.no_codes for q, a in zip(targets, answers)):
                label = 0
            else:
                dropped += 1
                continue
        X_rows.append([row[i] for i in feat_idx])
        y.append(label)
        row_ids.append(rid)

    X = np.asarray(X_rows, dtype=np.int64).reshape(len(X_rows), len(feature_cols))
    bad_cells = []
    for j, colspec in enumerate(feature_cols):
        if X.shape[0] == 0:
            break
        allowed = np.array((0,) + colspec.codes, dtype=np.int64)
        offending = np.nonzero(~np.isin(X[:, j], allowed))[0]
        bad_cells.extend((int(row_ids[i]), colspec.column_id, int(X[i, j])) for i in offending)
    if bad_cells:
        raise DomainViolation(sorted(bad_cells))

    ds = Dataset([c.column_id for c in feature_cols], X, np.asarray(y, dtype=np.int64), np.asarray(row_ids))
    summary = TargetSummary(policy=policy, n_dropped=dropped, n_yes=int(ds.y.sum()), n_no=int((ds.y == 0).sum()))
    return ds, summary


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def train_test_split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint train/test partition; |test| = round(test_fraction * n).

    Deterministic for a fixed seed. Stratified splits keep per-class
    proportions within one row of proportional (largest-remainder
    apportionment of the test quota over classes).
    """
    n = ds.n_rows
    if n == 0:
        raise IngestError("cannot split an empty dataset")
    n_test = _round_half_up(spec.test_fraction * n)
    rng = np.random.default_rng(spec.seed)

    if spec.stratified:
        classes, counts = np.unique(ds.y, return_counts=True)
        if len(classes) >= 2 and np.any(counts < 2):
            thin = [int(c) for c, k in zip(classes, counts) if k < 2]
            raise IngestError(f"stratified split needs >= 2 rows per class; classes {thin} are too small")
        quotas = spec.test_fraction * counts
        base = np.floor(quotas).astype(int)
        shortfall = n_test - int(base.sum())
        # distribute the remainder by largest fractional part, lowest class first on ties
        order = sorted(range(len(classes)), key=lambda i: (-(quotas[i] - base[i]), classes[i]))
        for i in order[:max(shortfall, 0)]:
            base[i] += 1
        test_idx: list[int] = []
        for cls, take in zip(classes, base):
            members = np.nonzero(ds.y == cls)[0]
            perm = rng.permutation(len(members))
            test_idx.extend(members[perm[:take]].tolist())
        test_mask = np.zeros(n, dtype=bool)
        test_mask[test_idx] = True
    else:
        perm = rng.permutation(n)
        test_mask = np.zeros(n, dtype=bool)
        test_mask[perm[:n_test]] = True

    def subset(mask: np.ndarray) -> Dataset:
        idx = np.nonzero(mask)[0]  # ascending: original order preserved
        return Dataset(ds.feature_names, ds.X[idx], ds.y[idx], ds.row_ids[idx])

    return subset(~test_mask), subset(test_mask)


# --- synthetic generation ----------------------------------------------------


@dataclass(frozen=True)
class SignalConfig:
    """Planted logistic signal for the synthetic generator.

    The intention label is drawn as Bernoulli(sigmoid(bias + sum of
    weight * feature-code)) and then flipped with probability ``noise``;
    all six target questions answer consistently with the drawn label.
    Weights are keyed by expanded predictor column id.
    """

    weights: dict[str, float] = field(default_factory=dict)
    bias: float = 0.0
    noise: float = 0.0
    missing_rate: float = 0.0  # per-cell null probability on predictor columns
    target_missing_rate: float = 0.0  # per-cell null probability on target columns
    ever_rate: float = 0.1  # cohort questions: probability of a non-keep answer


def generate_synthetic(
    n_rows: int, catalog: QuestionCatalog, signal: SignalConfig | None = None, seed: int = 0
) -> RawTable:
    """Draw catalog-conformant survey rows with a planted intention signal."""
    if n_rows < 1:
        raise IngestError(f"n_rows must be >= 1, got {n_rows}")
    signal = signal or SignalConfig()
    columns = catalog.columns()
    feature_ids = {c.column_id for c in catalog.feature_columns()}
    unknown = sorted(set(signal.weights) - feature_ids)
    if unknown:
        raise IngestError(f"signal references non-predictor columns: {unknown}")

    rng = np.random.default_rng(seed)
    by_qid = {q.id: q for q in catalog.questions}
    rows: list[list[int | None]] = []
    for _ in range(n_rows):
        row: list[int | None] = []
        z = signal.bias
        for col in columns:
            q = by_qid[col.question_id]
            if q.role is QuestionRole.PREDICTOR:
                if col.option_code is not None:
                    value = int(rng.integers(0, 2))
                else:
                    value = int(rng.choice(q.domain.nonzero_codes))
                if signal.missing_rate and rng.random() < signal.missing_rate:
                    row.append(None)
                    value = 0  # the model sees imputed 0
                else:
                    row.append(value)
                z += signal.weights.get(col.column_id, 0.0) * value
            elif q.role is QuestionRole.TARGET:
                row.append(None)  # filled once the planted label is drawn
            else:
                if rng.random() < signal.ever_rate:
                    choices = [c for c in q.domain.nonzero_codes if c not in q.keep_codes]
                else:
                    choices = list(q.keep_codes)
                row.append(int(rng.choice(choices)))
        p = 1.0 / (1.0 + math.exp(-z))
        intent = rng.random() < p
        if signal.noise and rng.random() < signal.noise:
            intent = not intent
        # fill target answers consistently with the drawn intent
        for col_idx, col in enumerate(columns):
            q = by_qid[col.question_id]
            if q.role is QuestionRole.TARGET:
                if signal.target_missing_rate and rng.random() < signal.target_missing_rate:
                    row[col_idx] = None
                else:
                    codes = q.yes_codes if intent else q.no_codes
                    row[col_idx] = int(rng.choice(codes))
        rows.append(row)
    return RawTable(columns=[c.column_id for c in columns], rows=rows)


# --- CSV writers / readers ---------------------------------------------------


def raw_csv_bytes(table: RawTable) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow(["" if cell is None else cell for cell in row])
    return buf.getvalue().encode("utf-8")


def prepared_csv_bytes(ds: Dataset) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ds.feature_names + [LABEL_COLUMN])
    for features, label in zip(ds.X, ds.y):
        writer.writerow([int(v) for v in features] + [int(label)])
    return buf.getvalue().encode("utf-8")


def read_prepared_csv(path) -> Dataset:
    """Load a prepared-dataset CSV (feature columns then the label column)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: missing header row") from None
        if LABEL_COLUMN not in header:
            raise IngestError(f"{path}: no {LABEL_COLUMN} column; not a prepared dataset")
        label_at = header.index(LABEL_COLUMN)
        names = [h for i, h in enumerate(header) if i != label_at]
        X_rows, y = [], []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise IngestError(f"{path} line {lineno}: expected {len(header)} cells, got {len(record)}")
            try:
                values = [int(cell) for cell in record]
            except ValueError:
                raise IngestError(f"{path} line {lineno}: non-integer cell") from None
            y.append(values.pop(label_at))
            X_rows.append(values)
    if not X_rows:
        raise IngestError(f"{path}: no data rows")
    return Dataset(names, np.asarray(X_rows), np.asarray(y), np.arange(len(X_rows)))


# --- whole-pipeline ----------------------------------------------------------


@dataclass
class PreparationReport:
    catalog: str
    catalog_version: str
    target_policy: str
    rows_in: int
    nulls_imputed: int
    extra_columns: list[str]
    cohort_removed: dict[str, int]
    cohort_rows: int
    target_dropped: int
    rows_out: int
    n_yes: int
    n_no: int

    def to_dict(self) -> dict:
        return asdict(self)


def prepare(
    raw: RawTable,
    catalog: QuestionCatalog,
    policy: str = "q16-only",
    cohort: CohortConfig | None = None,
) -> tuple[Dataset, PreparationReport]:
    """Impute, filter, and derive the target in one pass, with an audit report."""
    nulls = count_nulls(raw)
    imputed = impute_nulls(raw)
    cohort_table, removed = filter_never_smokers(imputed, catalog, cohort)
    ds, target = derive_target(cohort_table, catalog, policy)
    report = PreparationReport(
        catalog=catalog.name,
        catalog_version=catalog.version,
        target_policy=policy,
        rows_in=len(raw.rows),
        nulls_imputed=nulls,
        extra_columns=list(raw.extra_columns),
        cohort_removed=removed,
        cohort_rows=len(cohort_table.rows),
        target_dropped=target.n_dropped,
        rows_out=ds.n_rows,
        n_yes=target.n_yes,
        n_no=target.n_no,
    )
    return ds, report
