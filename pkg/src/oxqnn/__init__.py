"""Quantum-circuit and MLP regression of oxide melting points."""
from .circuits import AnsatzSpec, EncoderSpec, build_ansatz, build_encoder
from .data import Dataset, generate_synthetic_dataset, kfold_split, load_dataset
from .errors import (ConfigError, DataError, DegenerateFeatureError, InvalidArgumentError, NumericalError,
                     OxqnnError, ResourceLimitError)
from .harness import MeanConfig, MlpConfig, QnnConfig, run_cross_validation, run_sweep
from .qnn import QnnModel, predict, train

__all__ = [
    "AnsatzSpec", "EncoderSpec", "build_ansatz", "build_encoder",
    "Dataset", "generate_synthetic_dataset", "kfold_split", "load_dataset",
    "ConfigError", "DataError", "DegenerateFeatureError", "InvalidArgumentError", "NumericalError",
    "OxqnnError", "ResourceLimitError",
    "MeanConfig", "MlpConfig", "QnnConfig", "run_cross_validation", "run_sweep",
    "QnnModel", "predict", "train",
]
__version__ = "0.1.0"
