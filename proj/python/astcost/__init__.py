"""Python bindings for the astcost runtime-prediction toolkit."""

from ._astcost import (
    AstGraph,
    Checkpoint,
    DataError,
    Dataset,
    DivergenceError,
    LabeledGraph,
    ModelSpec,
    RunResult,
    Split,
    SplitPlan,
    Surrogate,
    SweepConfig,
    SynthConfig,
    TrainOptions,
    WorkloadMeta,
    extract_curves,
    generate,
    load_checkpoint,
    load_dataset,
    make_rewired_pairs,
    make_split,
    model_labels,
    oracle_runtime,
    paper_fractions,
    predict,
    resnet18_workloads,
    save_checkpoint,
    save_dataset,
    summarize,
    summary_csv,
    sweep,
    train_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
