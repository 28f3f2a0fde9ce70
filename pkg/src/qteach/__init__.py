"""qteach: statevector simulation and teacher-student comparison of
dissipative quantum perceptrons and data re-uploading models."""

from .circuits import (
    ArchitectureId,
    CircuitSpec,
    Encoding,
    Family,
    bind,
    build,
    dissipative_qp,
    forward,
    forward_batch,
    parse_architecture,
    reuploading,
)
from .errors import (
    ConfigParseError,
    ConfigurationError,
    QTeachError,
    StructuralError,
    TrainingDivergedError,
    UnsupportedArchitectureError,
)
from .metrics import PredictionMap, accuracy, prediction_map, relative_entropy
from .qsim import GateKind, GateOp, QuantumState, apply_gate, expectation_z, new_state, probability_vector
from .teacher_student import LabeledGrid, generate_dataset, make_grid, run_experiment
from .training import Optimizer, TrainConfig, TrainRun, binarize, gradient, loss, train

__version__ = "0.1.0"

__all__ = [
    "ArchitectureId",
    "CircuitSpec",
    "ConfigParseError",
    "ConfigurationError",
    "Encoding",
    "Family",
    "GateKind",
    "GateOp",
    "LabeledGrid",
    "Optimizer",
    "PredictionMap",
    "QTeachError",
    "QuantumState",
    "StructuralError",
    "TrainConfig",
    "TrainRun",
    "TrainingDivergedError",
    "UnsupportedArchitectureError",
    "accuracy",
    "apply_gate",
    "binarize",
    "bind",
    "build",
    "dissipative_qp",
    "expectation_z",
    "forward",
    "forward_batch",
    "generate_dataset",
    "gradient",
    "loss",
    "make_grid",
    "new_state",
    "parse_architecture",
    "prediction_map",
    "probability_vector",
    "relative_entropy",
    "reuploading",
    "run_experiment",
    "train",
]
