"""Statevector QNN classifier with mutual-information training diagnostics."""
from .circuit import AnsatzSpec, Circuit, Gate, build_brickwall, circuit_unitary, run_statevector
from .datasets import Dataset, DatasetSpec, load_dataset, split
from .encoding import EncodingSpec, FeatureScaler, FeatureVector, encode, encode_batch
from .errors import ConfigError, DataError, NumericalError, QnnmiError
from .infodyn import SubsystemPartition, choi_state, mi_record, mi_trace, mutual_information
from .qcore import DensityMatrix, StateVector, UnitaryMatrix, partial_trace, reduced_density, von_neumann_entropy
from .runner import AggregateTrace, RunConfig, TrendReport, load_config, run_experiment, run_single, summarize
from .training import AdamState, BinaryClassifier, TrainConfig, adam_step, cross_entropy, forward, train

__version__ = "0.1.0"

__all__ = [
    "AdamState", "AggregateTrace", "AnsatzSpec", "BinaryClassifier", "Circuit", "ConfigError",
    "DataError", "Dataset", "DatasetSpec", "DensityMatrix", "EncodingSpec", "FeatureScaler",
    "FeatureVector", "Gate", "NumericalError", "QnnmiError", "RunConfig", "StateVector",
    "SubsystemPartition", "TrainConfig", "TrendReport", "UnitaryMatrix", "adam_step",
    "build_brickwall", "choi_state", "circuit_unitary", "cross_entropy", "encode", "encode_batch",
    "forward", "load_config", "load_dataset", "mi_record", "mi_trace", "mutual_information",
    "partial_trace", "reduced_density", "run_experiment", "run_single", "run_statevector",
    "split", "summarize", "train", "von_neumann_entropy",
]
