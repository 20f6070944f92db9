"""Learn where methods grow new conditional branches, and suggest where yours could.

The package mines git history for commits that add if-statement paths to
existing methods, converts each change into a labeled control-flow-graph
example, trains graph-convolutional classifiers on those examples, and ranks
the edges of an unseen method by how likely they are to host a new branch.

Typical flow:

    records, stats = scan_repository(path, MinerConfig())
    rows, audit = build_rows(records)
    model, log = train_task(rows, "level1", TrainConfig())
    result = recommend(method_source, model)
"""

from .cfg import (
    LABEL_CLASSES,
    CfgBuildError,
    ControlFlowGraph,
    Edge,
    EdgeTag,
    MethodParseError,
    NodeKind,
    StatementKind,
    build_cfg,
    cfg_for_source,
    enumerate_paths,
    parse_method,
    structurally_equal,
)
from .dataset import (
    DatasetRow,
    read_dataset,
    read_records,
    row_from_example,
    write_dataset,
    write_feature_schema,
    write_records,
)
from .evaluate import (
    REFERENCE_METRICS,
    EvaluationReport,
    cross_validate,
    train_task,
)
from .features import (
    FEATURE_COLUMNS,
    N_FEATURES,
    InputSet,
    SplitExample,
    annotate_usage,
    extract_inputs,
    feature_schema,
    split_at_edge,
)
from .gcn import (
    GcnModel,
    TrainConfig,
    TrainingDiverged,
    load_model,
    predict_proba,
    save_model,
    train,
)
from .labeling import DropReason, LabeledExample, label_record, prune_added_path
from .metrics import (
    BinaryMetrics,
    MultilabelMetrics,
    binary_metrics,
    make_folds,
    multilabel_metrics,
    rank_auc,
)
from .mining import (
    MethodChangeRecord,
    MinerConfig,
    MiningStats,
    Polarity,
    dedupe_and_balance,
    scan_repository,
)
from .pipeline import BuildAudit, build_rows, mine_repositories
from .recommend import recommend
from .synthetic import generate_synthetic, oracle_scores

__version__ = "0.1.0"

__all__ = [
    "LABEL_CLASSES",
    "CfgBuildError",
    "ControlFlowGraph",
    "Edge",
    "EdgeTag",
    "MethodParseError",
    "NodeKind",
    "StatementKind",
    "build_cfg",
    "cfg_for_source",
    "enumerate_paths",
    "parse_method",
    "structurally_equal",
    "DatasetRow",
    "read_dataset",
    "read_records",
    "row_from_example",
    "write_dataset",
    "write_feature_schema",
    "write_records",
    "REFERENCE_METRICS",
    "EvaluationReport",
    "cross_validate",
    "train_task",
    "FEATURE_COLUMNS",
    "N_FEATURES",
    "InputSet",
    "SplitExample",
    "annotate_usage",
    "extract_inputs",
    "feature_schema",
    "split_at_edge",
    "GcnModel",
    "TrainConfig",
    "TrainingDiverged",
    "load_model",
    "predict_proba",
    "save_model",
    "train",
    "DropReason",
    "LabeledExample",
    "label_record",
    "prune_added_path",
    "BinaryMetrics",
    "MultilabelMetrics",
    "binary_metrics",
    "make_folds",
    "multilabel_metrics",
    "rank_auc",
    "MethodChangeRecord",
    "MinerConfig",
    "MiningStats",
    "Polarity",
    "dedupe_and_balance",
    "scan_repository",
    "BuildAudit",
    "build_rows",
    "mine_repositories",
    "recommend",
    "generate_synthetic",
    "oracle_scores",
    "__version__",
]
