"""Survey question catalog: ids, answer domains, and pipeline roles.

The catalog is data, not code. It is loaded from a plain-text schema file
(one block per question, see docs/FORMATS.md) so that synthetic or
future-year surveys can reuse the whole pipeline. The shipped
``data/nyts2018.schema`` is the reference instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

RESERVED_UNANSWERED = 0

KIND_SINGLE = "single-choice"
KIND_MULTI = "multi-select"
KIND_RANGE = "numeric-range"
_KINDS = (KIND_SINGLE, KIND_MULTI, KIND_RANGE)


class SchemaError(ValueError):
    """Raised when a schema document violates the catalog contract."""


class QuestionRole(Enum):
    PREDICTOR = "predictor"
    COHORT_NON_SMOKER = "cohort-non-smoker"
    COHORT_NON_ESMOKER = "cohort-non-esmoker"
    TARGET = "target"


@dataclass(frozen=True)
class AnswerCode:
    code: int
    label: str


@dataclass(frozen=True)
class AnswerDomain:
    """Answer encoding for one question. Code 0 is always "unanswered"."""

    kind: str
    codes: tuple[AnswerCode, ...]  # ordered, includes the reserved code 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SchemaError(f"unknown domain kind {self.kind!r}")
        values = [c.code for c in self.codes]
        if RESERVED_UNANSWERED not in values:
            raise SchemaError("domain must contain the reserved code 0")
        nonzero = [v for v in values if v != RESERVED_UNANSWERED]
        if any(v <= 0 for v in nonzero):
            raise SchemaError(f"non-zero codes must be positive, got {nonzero}")
        if len(set(nonzero)) != len(nonzero):
            raise SchemaError(f"duplicate answer codes: {nonzero}")
        if self.kind in (KIND_SINGLE, KIND_RANGE) and len(nonzero) < 2:
            raise SchemaError(f"{self.kind} domains need at least 2 non-zero codes")
        if self.kind == KIND_MULTI and len(nonzero) < 1:
            raise SchemaError("multi-select domains need at least 1 option")

    @property
    def nonzero_codes(self) -> tuple[int, ...]:
        return tuple(c.code for c in self.codes if c.code != RESERVED_UNANSWERED)

    def contains(self, code: int) -> bool:
        return any(c.code == code for c in self.codes)


@dataclass(frozen=True)
class SurveyQuestion:
    id: str
    text: str
    domain: AnswerDomain
    role: QuestionRole
    # cohort-selection questions: answers that keep the row in the cohort
    keep_codes: tuple[int, ...] = ()
    # target questions: answer classes for the binary intention label
    yes_codes: tuple[int, ...] = ()
    no_codes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.role in (QuestionRole.COHORT_NON_SMOKER, QuestionRole.COHORT_NON_ESMOKER):
            if not self.keep_codes:
                raise SchemaError(f"{self.id}: cohort question needs 'keep' codes")
            self._check_subset(self.keep_codes, "keep")
        if self.role is QuestionRole.TARGET:
            if not self.yes_codes or not self.no_codes:
                raise SchemaError(f"{self.id}: target question needs 'yes' and 'no' codes")
            self._check_subset(self.yes_codes, "yes")
            self._check_subset(self.no_codes, "no")
            if set(self.yes_codes) & set(self.no_codes):
                raise SchemaError(f"{self.id}: yes/no code sets overlap")

    def _check_subset(self, codes: tuple[int, ...], key: str):
        bad = [c for c in codes if not self.domain.contains(c) or c == RESERVED_UNANSWERED]
        if bad:
            raise SchemaError(f"{self.id}: '{key}' codes {bad} not in answer domain")


@dataclass(frozen=True)
class FeatureColumn:
    """One column of the feature matrix, after multi-select expansion.

    Single-choice and numeric-range questions map to one column holding the
    answer code; each multi-select option becomes a binary 0/1 sub-column.
    """

    column_id: str
    question_id: str
    option_code: int | None  # set for multi-select sub-columns
    codes: tuple[int, ...]  # allowed values, excluding the implicit 0

    def allows(self, value: int) -> bool:
        return value == RESERVED_UNANSWERED or value in self.codes


@dataclass(frozen=True)
class QuestionCatalog:
    name: str
    version: str
    questions: tuple[SurveyQuestion, ...] = field(default_factory=tuple)

    def __post_init__(self):
        ids = [q.id for q in self.questions]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise SchemaError(f"duplicate question ids: {dupes}")
        if self.is_nyts2018:
            self._check_nyts2018()

    @property
    def is_nyts2018(self) -> bool:
        return self.name == "nyts2018"

    @property
    def identity(self) -> str:
        """Canonical catalog identifier stamped on models and responses."""
        return f"{self.name}:{self.version}"

    def _check_nyts2018(self):
        expect = {
            QuestionRole.TARGET: {"Q15", "Q16", "Q17", "Q43", "Q44", "Q45"},
            QuestionRole.COHORT_NON_SMOKER: {"Q7", "Q19", "Q24", "Q39", "Q59"},
            QuestionRole.COHORT_NON_ESMOKER: {"Q28"},
        }
        for role, want in expect.items():
            got = {q.id for q in self.questions if q.role is role}
            if got != want:
                raise SchemaError(f"nyts2018 {role.value} questions must be {sorted(want)}, got {sorted(got)}")
        n_pred = len(self.predictors())
        if n_pred != 47:
            raise SchemaError(f"nyts2018 catalog must have 47 predictor questions, got {n_pred}")

    def predictors(self) -> list[SurveyQuestion]:
        """Predictor questions in catalog order."""
        return [q for q in self.questions if q.role is QuestionRole.PREDICTOR]

    def by_role(self, role: QuestionRole) -> list[SurveyQuestion]:
        return [q for q in self.questions if q.role is role]

    def question(self, qid: str) -> SurveyQuestion:
        for q in self.questions:
            if q.id == qid:
                return q
        raise KeyError(qid)

    def columns(self, questions: list[SurveyQuestion] | None = None) -> list[FeatureColumn]:
        """Expand questions into matrix columns, in catalog order."""
        out: list[FeatureColumn] = []
        for q in self.questions if questions is None else questions:
            if q.domain.kind == KIND_MULTI:
                for code in q.domain.nonzero_codes:
                    out.append(FeatureColumn(f"{q.id}_{code}", q.id, code, (1,)))
            else:
                out.append(FeatureColumn(q.id, q.id, None, q.domain.nonzero_codes))
        return out

    def feature_columns(self) -> list[FeatureColumn]:
        """Columns of the model feature matrix: predictors only, expanded."""
        return self.columns(self.predictors())


def predictor_questions(catalog: QuestionCatalog) -> list[SurveyQuestion]:
    """Questions with the predictor role, in catalog order."""
    return catalog.predictors()


class SubmissionError(ValueError):
    """An answer submission violates a question's domain."""

    def __init__(self, question_id: str, message: str):
        self.question_id = question_id
        super().__init__(f"{question_id}: {message}")


def build_feature_vector(catalog: QuestionCatalog, answers: dict) -> list[int]:
    """Turn an answers map (question id -> code, or list of option codes for
    multi-selects) into a feature vector in catalog column order.

    Omitted questions become 0, the "unanswered" code. Raises
    SubmissionError on unknown ids, out-of-domain codes, or a value of the
    wrong shape for the question kind.
    """
    predictors = {q.id: q for q in catalog.predictors()}
    for qid in answers:
        if qid not in predictors:
            raise SubmissionError(qid, "not a predictor question in this catalog")

    vector: list[int] = []
    for q in catalog.predictors():
        raw = answers.get(q.id)
        if q.domain.kind == KIND_MULTI:
            if raw is None:
                selected: set[int] = set()
            elif isinstance(raw, (list, tuple)):
                selected = set()
                for code in raw:
                    if not isinstance(code, int) or isinstance(code, bool):
                        raise SubmissionError(q.id, f"option code {code!r} is not an integer")
                    if code not in q.domain.nonzero_codes:
                        raise SubmissionError(q.id, f"option code {code} not in domain")
                    selected.add(code)
            else:
                raise SubmissionError(q.id, "multi-select answers must be a list of option codes")
            vector.extend(1 if code in selected else 0 for code in q.domain.nonzero_codes)
        else:
            if raw is None:
                code = RESERVED_UNANSWERED
            elif isinstance(raw, int) and not isinstance(raw, bool):
                code = raw
            else:
                raise SubmissionError(q.id, f"answer {raw!r} is not an integer code")
            if not q.domain.contains(code):
                raise SubmissionError(q.id, f"code {code} not in domain")
            vector.append(code)
    return vector


# --- schema document parsing -------------------------------------------------

_ROLES = {r.value: r for r in QuestionRole}


def _parse_codes(value: str, where: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in value.split())
    except ValueError:
        raise SchemaError(f"{where}: expected a list of integer codes, got {value!r}") from None


def loads_catalog(text: str) -> QuestionCatalog:
    """Parse a schema document from a string. See docs/FORMATS.md."""
    name = ""
    version = ""
    questions: list[SurveyQuestion] = []
    block_id: str | None = None
    block: dict = {}

    def finish_block():
        nonlocal block_id, block
        if block_id is None:
            return
        where = f"question {block_id}"
        role_raw = block.get("role")
        if role_raw is None:
            raise SchemaError(f"{where}: missing role")
        if role_raw not in _ROLES:
            raise SchemaError(f"{where}: unknown role {role_raw!r} (expected one of {sorted(_ROLES)})")
        kind = block.get("kind", KIND_SINGLE)
        codes = block.get("codes", [])
        if any(c.code == RESERVED_UNANSWERED for c in codes):
            raise SchemaError(f"{where}: code 0 is reserved for 'unanswered'")
        codes = [AnswerCode(RESERVED_UNANSWERED, "Unanswered")] + codes
        domain = AnswerDomain(kind=kind, codes=tuple(codes))
        try:
            questions.append(
                SurveyQuestion(
                    id=block_id,
                    text=block.get("text", ""),
                    domain=domain,
                    role=_ROLES[role_raw],
                    keep_codes=block.get("keep", ()),
                    yes_codes=block.get("yes", ()),
                    no_codes=block.get("no", ()),
                )
            )
        except SchemaError:
            raise
        block_id = None
        block = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            finish_block()
            block_id = line[1:-1].strip()
            if not block_id:
                raise SchemaError(f"line {lineno}: empty question id")
            continue
        if block_id is None:
            # header: "catalog <name>" / "version <string>"
            parts = line.split(None, 1)
            if len(parts) != 2 or parts[0] not in ("catalog", "version"):
                raise SchemaError(f"line {lineno}: expected 'catalog <name>' or 'version <v>', got {raw!r}")
            if parts[0] == "catalog":
                name = parts[1].strip()
            else:
                version = parts[1].strip()
            continue
        if "=" not in line:
            raise SchemaError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        where = f"line {lineno} ({block_id})"
        if key.startswith("code "):
            try:
                code = int(key[5:].strip())
            except ValueError:
                raise SchemaError(f"{where}: bad code key {key!r}") from None
            block.setdefault("codes", []).append(AnswerCode(code, value))
        elif key in ("text", "role", "kind"):
            block[key] = value
        elif key in ("keep", "yes", "no"):
            block[key] = _parse_codes(value, where)
        else:
            raise SchemaError(f"{where}: unknown key {key!r}")
    finish_block()
    return QuestionCatalog(name=name, version=version, questions=tuple(questions))


def load_catalog(source: str | Path) -> QuestionCatalog:
    """Load a question catalog from a schema file path."""
    return loads_catalog(Path(source).read_text(encoding="utf-8"))


def load_builtin_catalog(name: str = "nyts2018") -> QuestionCatalog:
    """Load a catalog shipped with the package (``nyts2018``)."""
    ref = resources.files("smokeintent.data").joinpath(f"{name}.schema")
    return loads_catalog(ref.read_text(encoding="utf-8"))
