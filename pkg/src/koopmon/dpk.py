"""Quasiperiodic probabilistic forecaster.

Observation hours map to sinusoidal features (plus a normalized-time trend
slot standing in for the zero-frequency limit) and a small network emits the
hourly Gaussian parameters.  Training maximizes likelihood over present
slots; prediction extrapolates arbitrarily far past the train span.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, FormatError
from .frames import SeriesFrame
from .nnet import AdamW, GaussianMlp

HOURS_PER_DAY = 24.0
HOURS_PER_WEEK = 168.0
HOURS_PER_YEAR = 8766.0  # mean Gregorian year

MODEL_FORMAT = "koopmon-dpk"
MODEL_VERSION = 1


@dataclass
class FrequencySet:
    """Angular frequencies (rad/hour) plus the optional long-term trend slot."""

    omegas: list[float]
    include_trend: bool = True
    train_span: tuple[int, int] | None = None

    def __post_init__(self):
        omegas = sorted(float(w) for w in self.omegas)
        if any(w <= 0.0 for w in omegas):
            raise ValueError("frequencies must be strictly positive")
        if len(set(omegas)) != len(omegas):
            raise ValueError("frequencies must be distinct")
        self.omegas = omegas
        if self.train_span is not None:
            self.train_span = (int(self.train_span[0]), int(self.train_span[1]))

    @property
    def n_features(self) -> int:
        return 2 * len(self.omegas) + (1 if self.include_trend else 0)

    def with_span(self, t_start: int, t_end: int) -> "FrequencySet":
        return FrequencySet(list(self.omegas), self.include_trend, (t_start, t_end))


def default_frequency_set(train_span: tuple[int, int] | None = None) -> FrequencySet:
    """Daily, weekly, and annual cycles plus the long-term trend."""
    omegas = [2.0 * math.pi / HOURS_PER_DAY,
              2.0 * math.pi / HOURS_PER_WEEK,
              2.0 * math.pi / HOURS_PER_YEAR]
    return FrequencySet(omegas, include_trend=True, train_span=train_span)


def features(t, freqs: FrequencySet) -> np.ndarray:
    """[cos(w1 t) .. cos(wk t), sin(w1 t) .. sin(wk t), tau?] for hour(s) t.

    tau is affine normalized time over the train span and is deliberately
    not clamped outside it.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    phases = t_arr[:, None] * np.asarray(freqs.omegas)[None, :]
    cols = [np.cos(phases), np.sin(phases)]
    if freqs.include_trend:
        if freqs.train_span is None:
            raise ValueError("trend feature requires a train span")
        t_start, t_end = freqs.train_span
        if t_end <= t_start:
            raise ValueError(f"degenerate train span [{t_start}, {t_end}]")
        cols.append(((t_arr - t_start) / (t_end - t_start))[:, None])
    out = np.hstack(cols)
    return out[0] if scalar else out


def nll(x: float, mu: float, sigma: float) -> float:
    """Gaussian negative log likelihood of one observation."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    r = (x - mu) / sigma
    return 0.5 * math.log(2.0 * math.pi * sigma * sigma) + 0.5 * r * r


@dataclass
class TrainConfig:
    """Optimizer settings; the defaults are the production protocol."""

    seed: int
    lr: float = 1e-4
    weight_decay: float = 1e-3
    epochs: int = 400
    batch: int = 256
    hidden: tuple[int, ...] = (64, 64)
    train_sigma: bool = True  # freeze the log-sigma head when False


@dataclass
class ForecastPoint:
    t: int
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass
class DpkModel:
    """Trained forecaster: frequency set plus network weights."""

    freqs: FrequencySet
    net: GaussianMlp
    activation_tag: str = "tanh"
    distribution_tag: str = "gaussian"
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.net.layer_sizes[0] != self.freqs.n_features:
            raise ValueError(
                f"network input width {self.net.layer_sizes[0]} does not match "
                f"feature width {self.freqs.n_features}")

    @property
    def layer_sizes(self) -> list[int]:
        return self.net.layer_sizes


def predict_params(model: DpkModel, times) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (mu, sigma) over an array of hours."""
    mu, log_sigma = model.net.forward(features(np.asarray(times, dtype=np.float64), model.freqs))
    return mu, np.exp(log_sigma)


def predict(model: DpkModel, t_range) -> list[ForecastPoint]:
    times = np.asarray(t_range, dtype=np.int64)
    mu, sigma = predict_params(model, times)
    return [ForecastPoint(int(t), float(m), float(s)) for t, m, s in zip(times, mu, sigma)]


def _fold_standardization(net: GaussianMlp, center: float, scale: float) -> None:
    # Training runs on standardized targets y = (x - center)/scale; absorbing
    # the transform into the linear head makes the stored weights raw-space.
    net.weights[-1][:, 0] *= scale
    net.biases[-1][0] = center + scale * net.biases[-1][0]
    net.biases[-1][1] += math.log(scale)


def _unfold_standardization(net: GaussianMlp, center: float, scale: float) -> None:
    net.weights[-1][:, 0] /= scale
    net.biases[-1][0] = (net.biases[-1][0] - center) / scale
    net.biases[-1][1] -= math.log(scale)


def train(s: SeriesFrame, freqs: FrequencySet, cfg: TrainConfig,
          warm_start: DpkModel | None = None) -> DpkModel:
    """Fit the Gaussian parameter network by maximum likelihood.

    Missing hours contribute nothing to the loss.  Deterministic for a given
    seed; a warm start reuses another station's weights in place of the
    random init (architectures must match).
    """
    mask = s.present_mask()
    if not mask.any():
        raise DegenerateDataError(f"station {s.station_id}: no present values to train on")
    hours = s.times()[mask].astype(np.float64)
    targets = s.values[mask]

    if freqs.include_trend and freqs.train_span is None:
        freqs = freqs.with_span(int(hours[0]), int(hours[-1]))

    slowest_period = 2.0 * math.pi / freqs.omegas[0]
    span = hours[-1] - hours[0]
    if targets.size < 1000 or span < 2.0 * slowest_period:
        warnings.warn(
            f"station {s.station_id}: {targets.size} present values over {span:.0f} h; "
            f"want >= 1000 values spanning >= {2 * slowest_period:.0f} h for the slowest frequency",
            stacklevel=2)

    center = float(targets.mean())
    scale = float(targets.std())
    if scale == 0.0:
        scale = 1.0
    y = (targets - center) / scale
    phi = features(hours, freqs)

    root = np.random.default_rng(cfg.seed)
    init_rng, shuffle_rng = root.spawn(2)
    if warm_start is not None:
        if warm_start.net.layer_sizes != [freqs.n_features] + list(cfg.hidden) + [2]:
            raise ValueError(
                f"warm start layers {warm_start.net.layer_sizes} do not match "
                f"requested architecture {[freqs.n_features] + list(cfg.hidden) + [2]}")
        net = warm_start.net.copy()
        _unfold_standardization(net, center, scale)
    else:
        net = GaussianMlp.create(freqs.n_features, list(cfg.hidden), init_rng)

    optimizer = AdamW(net, cfg.lr, cfg.weight_decay)
    n = targets.size
    batch = min(cfg.batch, n)
    epoch_nll = []
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        batch_losses = []
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            loss, grad_w, grad_b = net.loss_and_grads(phi[idx], y[idx],
                                                      sigma_grad=cfg.train_sigma)
            if not math.isfinite(loss):
                raise RuntimeError(f"non-finite training loss at epoch {epoch}")
            optimizer.step(net, grad_w, grad_b)
            batch_losses.append(loss)
        epoch_nll.append(float(np.mean(batch_losses)))

    _fold_standardization(net, center, scale)
    model = DpkModel(freqs, net)
    model.train_meta = {
        "epochs": cfg.epochs,
        "learning_rate": cfg.lr,
        "weight_decay": cfg.weight_decay,
        "seed": cfg.seed,
        "final_nll": net.mean_nll(phi, targets),
        "first_epoch_nll": epoch_nll[0] if epoch_nll else None,
        "epoch_nll": epoch_nll,
        "n_train": int(n),
    }
    return model


def save_model(model: DpkModel, path) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "frequencies": {
            "omegas_rad_per_hour": list(model.freqs.omegas),
            "include_trend": model.freqs.include_trend,
            "train_span": list(model.freqs.train_span) if model.freqs.train_span else None,
        },
        "layer_sizes": model.layer_sizes,
        "activation": model.activation_tag,
        "distribution": model.distribution_tag,
        "weights": [w.tolist() for w in model.net.weights],
        "biases": [b.tolist() for b in model.net.biases],
        "train_meta": model.train_meta,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> DpkModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: cannot read model file: {exc}") from exc
    if doc.get("format") != MODEL_FORMAT:
        raise FormatError(f"{path}: unexpected format tag {doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise FormatError(
            f"{path}: model format version {doc.get('version')!r}, expected {MODEL_VERSION}")
    freq_doc = doc["frequencies"]
    span = freq_doc.get("train_span")
    freqs = FrequencySet(freq_doc["omegas_rad_per_hour"], freq_doc["include_trend"],
                         tuple(span) if span else None)
    weights = [np.asarray(w, dtype=np.float64) for w in doc["weights"]]
    biases = [np.asarray(b, dtype=np.float64) for b in doc["biases"]]
    sizes = doc["layer_sizes"]
    for i, (w, b) in enumerate(zip(weights, biases)):
        if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
            raise FormatError(f"{path}: layer {i} shape {w.shape} inconsistent with {sizes}")
    model = DpkModel(freqs, GaussianMlp(weights, biases),
                     doc["activation"], doc["distribution"])
    model.train_meta = doc.get("train_meta", {})
    return model
