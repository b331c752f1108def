"""Human-steerable next-activity prediction for business processes.

The pipeline: parse or simulate an event log, encode every prefix of every
trace, train a small feed-forward network to predict the next activity,
distill that network into a decision tree, let a reviewer cut or retrain
parts of the tree, relabel the prefixes with the edited tree, and fine-tune
the network on the corrected labels. Metrics (accuracy, fidelity, group
parity) are tracked across iterations against the original labels.

Everything is deterministic for a given seed, end to end.
"""

__version__ = "0.1.0"

from .bundle import export_document, load_session, save_session
from .encoding import (
    END,
    PAD,
    EncodingSpec,
    PrefixDataset,
    build_dataset,
    build_encoding_spec,
    dump_dataset,
    encode_prefix,
    extract_prefixes,
    load_dataset,
)
from .errors import (
    CorruptBundle,
    DimensionMismatch,
    EditFailed,
    EmptyDataset,
    EmptyGroup,
    EmptyLog,
    EventLevelAttributeUnsupported,
    FairsteerError,
    InvalidProbability,
    InvalidShape,
    LabelDimensionMismatch,
    MalformedXml,
    MissingConceptName,
    NonTerminatingModel,
    NotInternal,
    PrefixOutOfRange,
    UnknownAttribute,
    UnknownNode,
)
from .eventlog import (
    AttributeSpec,
    Event,
    EventLog,
    ParseReport,
    Trace,
    infer_schema,
    parse_xes,
    parse_xes_with_report,
    serialize_xes,
)
from .loop import (
    LoopState,
    MetricsReport,
    ParityProbe,
    ParityResult,
    RelabelResult,
    bootstrap,
    compute_metrics,
    demographic_parity,
    relabel_dataset,
    run_iteration,
    seed_config,
)
from .mlp import (
    MlpModel,
    TrainConfig,
    accuracy,
    fine_tune,
    finetune_config,
    forward,
    init_model,
    load_checkpoint,
    loss_and_gradients,
    model_from_checkpoint,
    model_to_checkpoint,
    predict,
    save_checkpoint,
    train,
)
from .simulate import (
    ACCEPT_ONLINE,
    ACCEPT_PHONE,
    DELIVER,
    MAMMARY,
    PROSTATE,
    REFUSE,
    REGISTER,
    SIM_BASE_TIME,
    AttributeGenerator,
    Guard,
    Outcome,
    ProcessModel,
    SimConfig,
    Transition,
    builtin_cancer_screening,
    check_terminating,
    dump_model,
    ground_truth_rates,
    load_model,
    model_from_json,
    model_to_json,
    simulate,
    validate_model,
    visit_probability,
)
from .surgery import (
    EditRecord,
    RemoveNode,
    RetrainSubtreeExcluding,
    action_from_json,
    action_to_json,
    actions_from_json,
    apply_edits,
    edit_log_from_json,
    edit_log_to_json,
    leaves_predicting,
    load_edits,
    nodes_testing_attribute,
    remove_node,
    retrain_subtree_excluding,
    routed_samples,
)
from .tree import (
    DecisionTree,
    DistillationDataset,
    TreeNode,
    TreeParams,
    dump_tree,
    fidelity,
    induce_tree,
    label_with_model,
    load_tree,
    tree_from_canonical,
    tree_to_canonical,
    validate_tree,
)

__all__ = [
    "__version__",
    # errors
    "FairsteerError",
    "MalformedXml",
    "MissingConceptName",
    "EventLevelAttributeUnsupported",
    "UnknownAttribute",
    "PrefixOutOfRange",
    "EmptyLog",
    "EmptyDataset",
    "InvalidShape",
    "DimensionMismatch",
    "LabelDimensionMismatch",
    "UnknownNode",
    "NotInternal",
    "EditFailed",
    "InvalidProbability",
    "NonTerminatingModel",
    "EmptyGroup",
    "CorruptBundle",
    # event logs
    "Event",
    "Trace",
    "EventLog",
    "AttributeSpec",
    "ParseReport",
    "parse_xes",
    "parse_xes_with_report",
    "serialize_xes",
    "infer_schema",
    # encoding
    "PAD",
    "END",
    "EncodingSpec",
    "PrefixDataset",
    "build_encoding_spec",
    "build_dataset",
    "extract_prefixes",
    "encode_prefix",
    "dump_dataset",
    "load_dataset",
    # model
    "MlpModel",
    "TrainConfig",
    "init_model",
    "forward",
    "predict",
    "train",
    "fine_tune",
    "finetune_config",
    "accuracy",
    "save_checkpoint",
    "load_checkpoint",
    "loss_and_gradients",
    "model_from_checkpoint",
    "model_to_checkpoint",
    # tree
    "DecisionTree",
    "TreeNode",
    "TreeParams",
    "DistillationDataset",
    "label_with_model",
    "induce_tree",
    "fidelity",
    "validate_tree",
    "tree_to_canonical",
    "tree_from_canonical",
    "dump_tree",
    "load_tree",
    # surgery
    "RemoveNode",
    "RetrainSubtreeExcluding",
    "EditRecord",
    "remove_node",
    "retrain_subtree_excluding",
    "apply_edits",
    "routed_samples",
    "nodes_testing_attribute",
    "leaves_predicting",
    "action_from_json",
    "action_to_json",
    "actions_from_json",
    "edit_log_from_json",
    "edit_log_to_json",
    "load_edits",
    # simulation
    "ProcessModel",
    "Guard",
    "Outcome",
    "Transition",
    "AttributeGenerator",
    "SimConfig",
    "simulate",
    "builtin_cancer_screening",
    "check_terminating",
    "ground_truth_rates",
    "visit_probability",
    "model_to_json",
    "model_from_json",
    "load_model",
    "dump_model",
    "validate_model",
    "SIM_BASE_TIME",
    "REGISTER",
    "REFUSE",
    "ACCEPT_PHONE",
    "ACCEPT_ONLINE",
    "PROSTATE",
    "MAMMARY",
    "DELIVER",
    # loop
    "LoopState",
    "ParityProbe",
    "ParityResult",
    "MetricsReport",
    "RelabelResult",
    "bootstrap",
    "run_iteration",
    "seed_config",
    "demographic_parity",
    "compute_metrics",
    "relabel_dataset",
    # persistence
    "save_session",
    "load_session",
    "export_document",
]
