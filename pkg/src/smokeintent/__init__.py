"""smokeintent: predict youth smoking intention from coded survey answers.

Pipeline modules: schema (question catalog), ingest (CSV to dataset),
models (six from-scratch classifiers), metrics (reports and comparison),
persistence (.imodel files), service (HTTP API), cli (orchestration).
"""

__version__ = "1.0.0"

from .ingest import (
    CohortConfig,
    Dataset,
    IngestError,
    RawTable,
    SignalConfig,
    SplitSpec,
    derive_target,
    filter_never_smokers,
    generate_synthetic,
    impute_nulls,
    parse_csv,
    prepare,
    train_test_split,
)
from .metrics import (
    ClassReport,
    ComparisonTable,
    ConfusionMatrix,
    ModelSpec,
    accuracy,
    compare_models,
    confusion,
    cross_validate,
    precision_recall_f1,
    report,
)
from .models import (
    MODEL_KINDS,
    PredictionResult,
    TrainedModel,
    fit_classifier,
    predict,
)
from .persistence import load_model, loads_model, model_bytes, save_model
from .schema import (
    AnswerDomain,
    QuestionCatalog,
    QuestionRole,
    SchemaError,
    SurveyQuestion,
    build_feature_vector,
    load_builtin_catalog,
    load_catalog,
    predictor_questions,
)
