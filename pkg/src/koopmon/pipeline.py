"""End-to-end orchestration shared by the CLI and the test suite.

Everything here operates on in-memory objects; the CLI layers file handling
on top.  Per-station work is independent and order-stable.
"""

import hashlib
import json
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from .dpk import DpkModel, FrequencySet, TrainConfig, train
from .frames import StationPair
from .regions import DEFAULT_EVR_THRESHOLD, hierarchy_eval, parse_regions_config
from .scoring import (DEFAULT_LAMBDA, DEFAULT_MIN_VALID_FRAC, SamplingDist,
                      ScoreSeries, StationVerdict, apply_iqr_filter, classify,
                      fit_sampling_dist, rolling_mean, zeta_series, zscore_series)

MIN_TRAIN_HOURS = 2 * 8766


@dataclass
class PipelineConfig:
    """One document drives a run; defaults are the production protocol."""

    train_interval: tuple[int, int]
    k: int = 168
    alpha: float = 0.001
    lam: float = DEFAULT_LAMBDA
    evr_threshold: float = DEFAULT_EVR_THRESHOLD
    min_valid_frac: float = DEFAULT_MIN_VALID_FRAC
    seed: int = 0
    use_domain_model: bool = True
    periods_hours: tuple[float, ...] = (24.0, 168.0, 8766.0)
    include_trend: bool = True
    regions: dict[str, list[str]] = field(default_factory=dict)
    lr: float = 1e-4
    weight_decay: float = 1e-3
    epochs: int = 400
    batch: int = 256
    layers: tuple[int, ...] = (64, 64)

    def __post_init__(self):
        t0, t1 = self.train_interval
        self.train_interval = (int(t0), int(t1))
        if t1 <= t0:
            raise ValueError("empty train interval")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.evr_threshold <= 1.0:
            raise ValueError("explained-variance threshold must lie in (0, 1]")
        if not 0.0 <= self.min_valid_frac <= 1.0:
            raise ValueError("min_valid_frac must lie in [0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.lam < 0.0:
            raise ValueError("lambda must be non-negative")
        if t1 - t0 < MIN_TRAIN_HOURS:
            warnings.warn(
                f"train interval covers {t1 - t0} hours; the protocol assumes "
                f">= {MIN_TRAIN_HOURS} (two years)", stacklevel=2)

    def frequency_set(self) -> FrequencySet:
        omegas = [2.0 * np.pi / p for p in self.periods_hours]
        return FrequencySet(omegas, self.include_trend)

    def train_config(self, seed_offset: int = 0) -> TrainConfig:
        return TrainConfig(seed=self.seed + seed_offset, lr=self.lr,
                           weight_decay=self.weight_decay, epochs=self.epochs,
                           batch=self.batch, hidden=tuple(self.layers))

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["train_interval"] = list(self.train_interval)
        doc["periods_hours"] = list(self.periods_hours)
        doc["layers"] = list(self.layers)
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PipelineConfig":
        kwargs = dict(doc)
        kwargs["train_interval"] = tuple(kwargs["train_interval"])
        if "periods_hours" in kwargs:
            kwargs["periods_hours"] = tuple(kwargs["periods_hours"])
        if "layers" in kwargs:
            kwargs["layers"] = tuple(kwargs["layers"])
        return cls(**kwargs)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_json_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _station_seed_offset(station_id: str, kind: str) -> int:
    # Stable per-(station, kind) seed spacing, independent of dict order.
    digest = hashlib.sha256(f"{station_id}/{kind}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def train_all(pairs: dict[str, StationPair], config: PipelineConfig,
              warm_starts: dict[tuple[str, str], DpkModel] | None = None,
              ) -> dict[tuple[str, str], DpkModel]:
    """Train one forecaster per (station, series kind) over the train interval."""
    t0, t1 = config.train_interval
    freqs = config.frequency_set().with_span(t0, t1 - 1)
    models = {}
    for sid in sorted(pairs):
        pair = pairs[sid]
        kinds = [("obs", pair.obs)]
        if config.use_domain_model:
            if pair.model is None:
                raise ValueError(f"station {sid}: domain-model series required but missing")
            kinds.append(("model", pair.model))
        for kind, frame in kinds:
            cfg = config.train_config(_station_seed_offset(sid, kind))
            warm = (warm_starts or {}).get((sid, kind))
            models[(sid, kind)] = train(frame.slice_hours(t0, t1), freqs, cfg,
                                        warm_start=warm)
    return models


def raw_scores(pairs: dict[str, StationPair],
               models: dict[tuple[str, str], DpkModel],
               config: PipelineConfig) -> dict[str, ScoreSeries]:
    """Per-station raw score stream over the full data span.

    With a domain model this is the differenced series (zeta); otherwise the
    plain observation z-scores.
    """
    out = {}
    for sid in sorted(pairs):
        pair = pairs[sid]
        obs_z = zscore_series(pair.obs, models[(sid, "obs")])
        if config.use_domain_model:
            mod_z = zscore_series(pair.model, models[(sid, "model")])
            out[sid] = zeta_series(obs_z, mod_z)
        else:
            out[sid] = obs_z
    return out


def bar_scores(raw: ScoreSeries, k: int, min_valid_frac: float) -> ScoreSeries:
    return rolling_mean(raw, k, min_valid_frac)


def filter_train_bars(train_bars: ScoreSeries, lam: float) -> ScoreSeries:
    return apply_iqr_filter(train_bars, lam)


@dataclass
class StationDetection:
    station_id: str
    dist: SamplingDist
    verdicts: list[StationVerdict]


def detect_stations(bars: dict[str, ScoreSeries], config: PipelineConfig,
                    t_range: tuple[int, int]) -> dict[str, StationDetection]:
    """Fit each station's sampling distribution on the train interval and
    classify the requested range."""
    t0, t1 = config.train_interval
    out = {}
    for sid in sorted(bars):
        train_slice = bars[sid].slice_hours(t0, t1)
        dist = fit_sampling_dist(train_slice, config.lam)
        test_slice = bars[sid].slice_hours(*t_range)
        out[sid] = StationDetection(sid, dist, classify(test_slice, dist, config.alpha))
    return out


def detect_regions(bars: dict[str, ScoreSeries], config: PipelineConfig,
                   t_range: tuple[int, int]):
    """Fit every configured region on IQR-filtered train bars, classify t_range."""
    t0, t1 = config.train_interval
    train_bars = {sid: filter_train_bars(bars[sid].slice_hours(t0, t1), config.lam)
                  for sid in bars}
    test_bars = {sid: bars[sid].slice_hours(*t_range) for sid in bars}
    regions = parse_regions_config(config.regions)
    return hierarchy_eval(regions, train_bars, test_bars, config.evr_threshold)
