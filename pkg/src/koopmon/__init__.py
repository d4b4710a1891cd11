"""Business-as-usual modeling and calibrated anomaly detection for hourly sensor series."""

from .dpk import (DpkModel, ForecastPoint, FrequencySet, TrainConfig,
                  default_frequency_set, features, load_model, nll, predict,
                  predict_params, save_model, train)
from .errors import DegenerateDataError, FormatError, IngestError, KoopmonError
from .frames import SeriesFrame, StationPair, align_pair, log_transform, parse_csv

__all__ = [
    "DpkModel", "ForecastPoint", "FrequencySet", "TrainConfig",
    "default_frequency_set", "features", "load_model", "nll", "predict",
    "predict_params", "save_model", "train",
    "DegenerateDataError", "FormatError", "IngestError", "KoopmonError",
    "SeriesFrame", "StationPair", "align_pair", "log_transform", "parse_csv",
]
