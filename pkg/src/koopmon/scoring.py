"""Per-station scoring: z-scores, rolling means, sampling-distribution fits,
critical values, and station-level verdicts.
"""

from dataclasses import dataclass

import numpy as np

from .dpk import DpkModel, predict_params
from .errors import DegenerateDataError
from .frames import SeriesFrame
from .special import gauss_cdf, gauss_icdf, gauss_sf

DEFAULT_MIN_VALID_FRAC = 0.75
DEFAULT_LAMBDA = 2.0


@dataclass
class ScoreSeries:
    """Hourly z (or zeta) values plus, once filled, their k-window rolling mean."""

    t0: int
    z: np.ndarray
    zbar: np.ndarray | None = None
    k: int = 1
    kind_tag: str = "z_obs"

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.float64)
        if self.k < 1:
            raise ValueError("window length k must be >= 1")
        if self.zbar is not None:
            self.zbar = np.asarray(self.zbar, dtype=np.float64)
            if self.zbar.size != self.z.size:
                raise ValueError("zbar length must match z length")

    def __len__(self) -> int:
        return self.z.size

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self), dtype=np.int64)

    def slice_hours(self, t_lo: int, t_hi: int) -> "ScoreSeries":
        """Sub-series covering [t_lo, t_hi); hours outside the grid are missing."""
        if t_hi <= t_lo:
            raise ValueError("empty hour range")

        def cut(arr):
            out = np.full(t_hi - t_lo, np.nan)
            lo, hi = max(t_lo, self.t0), min(t_hi, self.t0 + len(self))
            if hi > lo:
                out[lo - t_lo:hi - t_lo] = arr[lo - self.t0:hi - self.t0]
            return out

        return ScoreSeries(t_lo, cut(self.z),
                           None if self.zbar is None else cut(self.zbar),
                           self.k, self.kind_tag)


@dataclass
class SamplingDist:
    """Gaussian fitted to the training rolling means after outlier rejection."""

    mu: float
    sigma: float
    n_used: int
    n_rejected: int

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.n_used < 2:
            raise ValueError(f"need at least 2 fitted values, got {self.n_used}")


@dataclass
class StationVerdict:
    t: int
    stat: float
    critical: float
    is_anomalous: bool


def zscore_compose(x: float, cdf, sf=None) -> float:
    """Standardize via the general ICDF(N(0,1)) o CDF(P) composition.

    The upper half evaluates through the survival function when provided, so
    tail precision survives the round trip.
    """
    p = cdf(x)
    if p <= 0.5 or sf is None:
        return gauss_icdf(p)
    return -gauss_icdf(sf(x))


def zscore_series(s: SeriesFrame, model: DpkModel) -> ScoreSeries:
    """Standardized deviation of each present hour from the forecast."""
    mu, sigma = predict_params(model, s.times())
    if model.distribution_tag == "gaussian":
        z = (s.values - mu) / sigma
    else:
        z = np.full(len(s), np.nan)
        for i, x in enumerate(s.values):
            if not np.isnan(x):
                m, sd = mu[i], sigma[i]
                z[i] = zscore_compose(x, lambda v: gauss_cdf((v - m) / sd),
                                      lambda v: gauss_sf((v - m) / sd))
    return ScoreSeries(s.t0, z, None, 1, "z_obs")


def rolling_mean(score: ScoreSeries, k: int,
                 min_valid_frac: float = DEFAULT_MIN_VALID_FRAC) -> ScoreSeries:
    """Mean of present z over the trailing window [t-k+1, t].

    The mean is undefined while the window extends before the series start,
    or when fewer than min_valid_frac of the window's slots are present.
    """
    if k < 1:
        raise ValueError("window length k must be >= 1")
    z = score.z
    zbar = np.full(z.size, np.nan)
    min_valid = min_valid_frac * k
    for i in range(k - 1, z.size):
        window = z[i - k + 1:i + 1]
        vals = window[~np.isnan(window)]
        if vals.size >= min_valid and vals.size > 0:
            zbar[i] = np.sum(vals) / vals.size
    return ScoreSeries(score.t0, z, zbar, k, score.kind_tag)


def zeta_series(obs_z: ScoreSeries, mod_z: ScoreSeries) -> ScoreSeries:
    """Observation z minus domain-model z on the shared grid."""
    if obs_z.t0 != mod_z.t0 or len(obs_z) != len(mod_z):
        raise ValueError(
            f"score grids differ: obs t0={obs_z.t0} n={len(obs_z)}, "
            f"model t0={mod_z.t0} n={len(mod_z)}")
    return ScoreSeries(obs_z.t0, obs_z.z - mod_z.z, None, 1, "zeta")


def iqr_interval(values: np.ndarray, lam: float = DEFAULT_LAMBDA) -> tuple[float, float]:
    """[Q1 - lam*IQR, Q3 + lam*IQR] over present values, quartiles by linear interpolation."""
    vals = np.asarray(values, dtype=np.float64)
    vals = vals[~np.isnan(vals)]
    if vals.size < 2:
        raise DegenerateDataError(f"need at least 2 present values, got {vals.size}")
    q1, q3 = np.percentile(vals, [25.0, 75.0])
    iqr = q3 - q1
    return float(q1 - lam * iqr), float(q3 + lam * iqr)


def fit_sampling_dist(zbar_train: ScoreSeries, lam: float = DEFAULT_LAMBDA) -> SamplingDist:
    """Fit the Gaussian of training rolling means, after IQR outlier rejection."""
    if zbar_train.zbar is None:
        raise ValueError("rolling means not filled; call rolling_mean first")
    vals = zbar_train.zbar[~np.isnan(zbar_train.zbar)]
    lo, hi = iqr_interval(vals, lam)
    kept = vals[(vals >= lo) & (vals <= hi)]
    if kept.size < 2:
        raise DegenerateDataError(f"only {kept.size} values survive outlier rejection")
    sigma = float(kept.std(ddof=1))
    if sigma == 0.0:
        raise DegenerateDataError("rejected-filtered values are all equal; sigma is zero")
    return SamplingDist(float(kept.mean()), sigma, int(kept.size), int(vals.size - kept.size))


def apply_iqr_filter(score: ScoreSeries, lam: float = DEFAULT_LAMBDA) -> ScoreSeries:
    """Copy of the series with rolling means outside the IQR interval set missing."""
    if score.zbar is None:
        raise ValueError("rolling means not filled; call rolling_mean first")
    lo, hi = iqr_interval(score.zbar, lam)
    zbar = score.zbar.copy()
    with np.errstate(invalid="ignore"):
        zbar[(zbar < lo) | (zbar > hi)] = np.nan
    return ScoreSeries(score.t0, score.z, zbar, score.k, score.kind_tag)


def critical_value(alpha: float) -> float:
    """Two-tailed standard-normal critical value for the given alpha level."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return gauss_icdf(1.0 - alpha / 2.0)


def classify(stat_series: ScoreSeries, dist: SamplingDist, alpha: float) -> list[StationVerdict]:
    """One verdict per present rolling-mean value; flag when the standardized
    statistic is as extreme or more extreme than the two-tailed critical value."""
    if stat_series.zbar is None:
        raise ValueError("rolling means not filled; call rolling_mean first")
    crit = critical_value(alpha)
    verdicts = []
    for i, stat in enumerate(stat_series.zbar):
        if np.isnan(stat):
            continue
        deviation = abs(stat - dist.mu) / dist.sigma
        verdicts.append(StationVerdict(int(stat_series.t0 + i), float(stat),
                                       crit, bool(deviation >= crit)))
    return verdicts


def write_scores(path, score: ScoreSeries, dist: SamplingDist | None = None,
                 alpha: float | None = None) -> None:
    """Score export: t,z,zbar,flag,p_like_stat with 9 significant digits."""
    crit = critical_value(alpha) if alpha is not None else None
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,z,zbar,flag,p_like_stat\n")
        zbar = score.zbar if score.zbar is not None else np.full(len(score), np.nan)
        for i in range(len(score)):
            t = score.t0 + i
            z_txt = "" if np.isnan(score.z[i]) else f"{score.z[i]:.9g}"
            if np.isnan(zbar[i]) or dist is None:
                fh.write(f"{t},{z_txt},,,\n")
                continue
            dev = abs(zbar[i] - dist.mu) / dist.sigma
            flag = int(crit is not None and dev >= crit)
            p_like = 2.0 * gauss_sf(dev)
            fh.write(f"{t},{z_txt},{zbar[i]:.9g},{flag},{p_like:.9g}\n")
