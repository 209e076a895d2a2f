"""Spike-driven temporal quantum encoding (SPATE) with angle and amplitude
baselines, an exact statevector simulator, encoding-quality metrics and a
hybrid QNN benchmark harness."""

__version__ = "0.1.0"

from .data import Dataset, gen_blobs, gen_circles, gen_moons, load_csv, stratified_kfold
from .encoders import EncoderConfig, embed, encode_states
from .errors import (CapacityError, DatasetError, DegenerateInputError, InvalidArgumentError,
                     SpateError, UndefinedMetricError)
from .harness import ExperimentConfig, TuningGrid, run_qnn_study, run_quality_study
from .metrics import all_metrics
from .numerics import RngStream
from .qnn import TrainConfig, evaluate, train
from .spikes import LifConfig, SpateParams

__all__ = [
    "__version__", "Dataset", "gen_blobs", "gen_circles", "gen_moons", "load_csv", "stratified_kfold",
    "EncoderConfig", "embed", "encode_states", "CapacityError", "DatasetError", "DegenerateInputError",
    "InvalidArgumentError", "SpateError", "UndefinedMetricError", "ExperimentConfig", "TuningGrid",
    "run_qnn_study", "run_quality_study", "all_metrics", "RngStream", "TrainConfig", "evaluate", "train",
    "LifConfig", "SpateParams",
]
