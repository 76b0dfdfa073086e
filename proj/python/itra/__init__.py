"""Key-sequence video decomposition, relative descriptors, and
sparse-reconstruction classification."""

from ._itra import (
    InvalidDictionary,
    InvalidInput,
    IoError,
    EmptyResult,
    decompose,
    evaluate,
    itra_dim,
    joint_row_sparse,
    ksvd,
    omp,
    phog,
    run_experiment,
    synth_dataset,
    uniform_keyframes,
)

__all__ = [
    "InvalidDictionary",
    "InvalidInput",
    "IoError",
    "EmptyResult",
    "decompose",
    "evaluate",
    "itra_dim",
    "joint_row_sparse",
    "ksvd",
    "omp",
    "phog",
    "run_experiment",
    "synth_dataset",
    "uniform_keyframes",
]
