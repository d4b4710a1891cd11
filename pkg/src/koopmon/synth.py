"""Labeled synthetic station networks for calibration and detection checks.

Observation series are quasiperiodic signals plus noise, optional shared
confounders, and injected additive anomalies (log-space shifts).  The
companion "domain model" series carries everything the simulated external
model is supposed to know: the seasonal structure, the trend, the confounder
when shared, and its own independent noise, but never the anomalies.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .frames import SeriesFrame, StationPair

TRAIN_HOURS_DEFAULT = 2 * 8766  # two mean years, the production protocol


@dataclass
class Confounder:
    """Shared exogenous bump, e.g. unusual weather; explained by the domain model."""

    amplitude: float
    window: tuple[int, int]
    shared_with_model: bool = True


@dataclass
class Anomaly:
    """Additive log-space shift on a station subset over [t_a, t_b)."""

    stations: list[int]
    window: tuple[int, int]
    shift: float

    def __post_init__(self):
        if self.shift == 0.0:
            raise ValueError("anomaly shift must be nonzero")


@dataclass
class ScenarioSpec:
    n_stations: int
    span: tuple[int, int]
    seasonal_amps: dict[float, float]  # period hours -> amplitude
    noise_sigma: float
    confounder: Confounder | None = None
    anomalies: list[Anomaly] = field(default_factory=list)
    seed: int = 0
    baseline: float = 3.0
    trend_delta: float = 0.0  # total drift across the span
    model_noise_sigma: float | None = None  # defaults to noise_sigma

    def __post_init__(self):
        if not self.noise_sigma >= 0.0:
            raise ValueError("noise sigma must be non-negative")
        t0, t_end = self.span
        if t_end <= t0:
            raise ValueError("empty scenario span")
        for window in self._windows():
            if window[0] < t0 or window[1] > t_end or window[1] <= window[0]:
                raise ValueError(f"window {window} outside span {self.span}")
        for anom in self.anomalies:
            for j in anom.stations:
                if not 0 <= j < self.n_stations:
                    raise ValueError(f"anomaly references station index {j}")

    def _windows(self):
        windows = [a.window for a in self.anomalies]
        if self.confounder is not None:
            windows.append(self.confounder.window)
        return windows

    @property
    def n_hours(self) -> int:
        return self.span[1] - self.span[0]


@dataclass
class LabeledDataset:
    """Per-station obs/model pairs plus the hour-by-station truth mask."""

    pairs: list[StationPair]
    truth: np.ndarray  # bool, shape (n_hours, n_stations)
    spec: ScenarioSpec

    @property
    def t0(self) -> int:
        return self.spec.span[0]

    def station_ids(self) -> list[str]:
        return [p.obs.station_id for p in self.pairs]

    def truth_windows(self) -> list[tuple[int, int]]:
        """Distinct anomaly windows, as absolute [t_a, t_b) hour pairs."""
        return sorted({a.window for a in self.spec.anomalies})


def _window_mask(times: np.ndarray, window: tuple[int, int]) -> np.ndarray:
    return (times >= window[0]) & (times < window[1])


def generate(spec: ScenarioSpec) -> LabeledDataset:
    """Deterministic per seed; stations differ by phase and noise draws."""
    rng = np.random.default_rng(spec.seed)
    t0, t_end = spec.span
    times = np.arange(t0, t_end, dtype=np.float64)
    tau = (times - t0) / (t_end - t0)
    conf = np.zeros(times.size)
    if spec.confounder is not None:
        conf[_window_mask(times, spec.confounder.window)] = spec.confounder.amplitude
    model_noise_sigma = (spec.noise_sigma if spec.model_noise_sigma is None
                         else spec.model_noise_sigma)

    pairs = []
    truth = np.zeros((times.size, spec.n_stations), dtype=bool)
    for j in range(spec.n_stations):
        seasonal = np.zeros(times.size)
        for period, amp in sorted(spec.seasonal_amps.items()):
            phase = rng.uniform(0.0, 2.0 * math.pi)
            seasonal += amp * np.sin(2.0 * math.pi * times / period + phase)
        base = spec.baseline + seasonal + spec.trend_delta * tau
        anomaly = np.zeros(times.size)
        for anom in spec.anomalies:
            if j in anom.stations:
                in_win = _window_mask(times, anom.window)
                anomaly[in_win] += anom.shift
                truth[in_win, j] = True
        obs = base + conf + anomaly + rng.normal(0.0, spec.noise_sigma, times.size)
        model = base.copy()
        if spec.confounder is not None and spec.confounder.shared_with_model:
            model += conf
        model = model + rng.normal(0.0, model_noise_sigma, times.size)
        sid = f"s{j:02d}"
        pairs.append(StationPair(SeriesFrame(sid, t0, obs, "log-ppb"),
                                 SeriesFrame(sid, t0, model, "log-ppb")))
    return LabeledDataset(pairs, truth, spec)


def calibration_scenario(seed: int, n_stations: int = 10,
                         test_hours: int = 4380) -> ScenarioSpec:
    """Anomaly-free network: quasiperiodic signal, independent noise."""
    return ScenarioSpec(
        n_stations=n_stations,
        span=(0, TRAIN_HOURS_DEFAULT + test_hours),
        seasonal_amps={24.0: 0.8, 168.0: 0.3, 8766.0: 0.5},
        noise_sigma=0.5,
        seed=seed,
        trend_delta=-0.2,
    )


def type1_scenario(seed: int, n_stations: int = 1) -> ScenarioSpec:
    """Shared confounder, no anomaly: obs deviates from usual but the domain
    model tracks it, so differenced scores should stay quiet."""
    onset = TRAIN_HOURS_DEFAULT + 400
    return ScenarioSpec(
        n_stations=n_stations,
        span=(0, TRAIN_HOURS_DEFAULT + 4380),
        seasonal_amps={24.0: 0.8, 168.0: 0.3, 8766.0: 0.5},
        noise_sigma=0.5,
        confounder=Confounder(amplitude=1.25, window=(onset, onset + 336),
                              shared_with_model=True),
        seed=seed,
    )


def type2_scenario(seed: int, n_stations: int = 1) -> ScenarioSpec:
    """Confounder pushes observations up while the anomaly pushes them down:
    raw scores cancel out, differenced scores reveal the anomaly."""
    onset = TRAIN_HOURS_DEFAULT + 400
    window = (onset, onset + 336)
    return ScenarioSpec(
        n_stations=n_stations,
        span=(0, TRAIN_HOURS_DEFAULT + 4380),
        seasonal_amps={24.0: 0.8, 168.0: 0.3, 8766.0: 0.5},
        noise_sigma=0.5,
        confounder=Confounder(amplitude=0.75, window=window, shared_with_model=True),
        anomalies=[Anomaly(stations=list(range(n_stations)), window=window, shift=-0.75)],
        seed=seed,
    )


def regional_shift_scenario(seed: int, n_stations: int = 4,
                            shift_sigmas: float = -1.5) -> ScenarioSpec:
    """Week-long additive shift on every station, for latency measurement."""
    onset = TRAIN_HOURS_DEFAULT + 700
    noise_sigma = 0.5
    return ScenarioSpec(
        n_stations=n_stations,
        span=(0, TRAIN_HOURS_DEFAULT + 4380),
        seasonal_amps={24.0: 0.8, 168.0: 0.3, 8766.0: 0.5},
        noise_sigma=noise_sigma,
        anomalies=[Anomaly(stations=list(range(n_stations)),
                           window=(onset, onset + 168),
                           shift=shift_sigmas * noise_sigma)],
        seed=seed,
    )
