"""Region-level detection: joint Gaussian fit of per-station rolling scores,
PCA-truncated Mahalanobis distances, and chi-distribution p-values.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError
from .scoring import ScoreSeries
from .special import regularized_upper_gamma

DEFAULT_EVR_THRESHOLD = 0.9
_EIGVAL_TOL = -1e-10


@dataclass
class RegionModel:
    """Joint fit for one station subset; column order of eigvecs matches eigvals."""

    stations: list[str]
    mean: np.ndarray
    eigvecs: np.ndarray
    eigvals: np.ndarray
    retained: int
    evr_threshold: float = DEFAULT_EVR_THRESHOLD

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.eigvecs = np.asarray(self.eigvecs, dtype=np.float64)
        self.eigvals = np.asarray(self.eigvals, dtype=np.float64)
        n = len(self.stations)
        if self.mean.shape != (n,) or self.eigvecs.shape != (n, n) or self.eigvals.shape != (n,):
            raise ValueError("inconsistent region model shapes")
        if not 1 <= self.retained <= n:
            raise ValueError(f"retained rank {self.retained} outside [1, {n}]")

    @property
    def n(self) -> int:
        return len(self.stations)


@dataclass
class RegionVerdict:
    t: int
    Z: float
    p: float
    dof: int


def _complete_rows(zeta_bars: dict[str, ScoreSeries], stations: list[str]):
    """Stack per-station rolling means; keep hours where every station is present."""
    if not stations:
        raise ValueError("empty station subset")
    series = []
    for sid in stations:
        if sid not in zeta_bars:
            raise KeyError(f"unknown station id {sid!r}")
        s = zeta_bars[sid]
        if s.zbar is None:
            raise ValueError(f"station {sid!r}: rolling means not filled")
        series.append(s)
    t_lo = max(s.t0 for s in series)
    t_hi = min(s.t0 + len(s) for s in series)
    if t_hi <= t_lo:
        raise DegenerateDataError("station score series do not overlap in time")
    cols = [s.zbar[t_lo - s.t0:t_hi - s.t0] for s in series]
    mat = np.stack(cols, axis=1)
    keep = ~np.isnan(mat).any(axis=1)
    return t_lo + np.flatnonzero(keep).astype(np.int64), mat[keep]


def fit_region(zeta_bars: dict[str, ScoreSeries], stations: list[str],
               evr_threshold: float = DEFAULT_EVR_THRESHOLD) -> RegionModel:
    """Mean, eigenbasis, and retained rank of the joint training distribution.

    Hours with any missing station are dropped.  Eigenvector signs follow the
    largest-magnitude-entry-positive convention so fits serialize reproducibly.
    """
    if not 0.0 < evr_threshold <= 1.0:
        raise ValueError(f"explained-variance threshold must lie in (0, 1], got {evr_threshold}")
    _, rows = _complete_rows(zeta_bars, stations)
    n = len(stations)
    if rows.shape[0] < n + 1:
        raise DegenerateDataError(
            f"{rows.shape[0]} complete rows for {n} stations; need at least {n + 1}")
    mean = rows.mean(axis=0)
    cov = np.cov(rows.T, ddof=1).reshape(n, n)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    if eigvals.min() < _EIGVAL_TOL * max(1.0, eigvals.max()):
        raise DegenerateDataError(f"covariance eigenvalue {eigvals.min()} is negative")
    eigvals = np.clip(eigvals, 0.0, None)
    total = eigvals.sum()
    if total <= 0.0:
        raise DegenerateDataError("training rows have zero total variance")
    for j in range(n):
        pivot = np.argmax(np.abs(eigvecs[:, j]))
        if eigvecs[pivot, j] < 0.0:
            eigvecs[:, j] = -eigvecs[:, j]
    retained = int(np.searchsorted(np.cumsum(eigvals) / total, evr_threshold) + 1)
    retained = min(retained, n)
    return RegionModel(list(stations), mean, eigvecs, eigvals, retained, evr_threshold)


def mahalanobis(region: RegionModel, v, use_all_components: bool = False) -> float:
    """Norm of the PCA-standardized displacement over the retained components."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (region.n,):
        raise ValueError(f"vector has shape {v.shape}, region expects ({region.n},)")
    m = region.n if use_all_components else region.retained
    lams = region.eigvals[:m]
    if np.any(lams <= 0.0):
        raise DegenerateDataError(
            "retained principal component has zero variance; training data degenerate")
    y = region.eigvecs[:, :m].T @ (v - region.mean)
    return float(np.sqrt(np.sum(y * y / lams)))


def chi_survival(z: float, dof: int) -> float:
    """P(chi_dof >= z): upper tail mass of an m-dim standard Gaussian's norm."""
    if z < 0.0:
        raise ValueError(f"distance must be non-negative, got {z}")
    if dof < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {dof}")
    return regularized_upper_gamma(dof / 2.0, 0.5 * z * z)


def region_verdicts(region: RegionModel, zeta_bars: dict[str, ScoreSeries]) -> list[RegionVerdict]:
    """Distance and p-value per hour where every member station has a score."""
    times, rows = _complete_rows(zeta_bars, region.stations)
    verdicts = []
    for t, row in zip(times, rows):
        z = mahalanobis(region, row)
        verdicts.append(RegionVerdict(int(t), z, chi_survival(z, region.retained),
                                      region.retained))
    return verdicts


def parse_regions_config(doc: dict) -> dict[str, tuple[list[str], float | None]]:
    """Region name -> (station ids, optional evr override) from the JSON mapping."""
    regions = {}
    for name, entry in doc.items():
        if isinstance(entry, dict):
            stations = list(entry["stations"])
            evr = entry.get("evr_threshold")
        else:
            stations = list(entry)
            evr = None
        if not stations:
            raise ValueError(f"region {name!r} has no stations")
        regions[name] = (stations, evr)
    return regions


def hierarchy_eval(regions: dict[str, tuple[list[str], float | None]],
                   train_bars: dict[str, ScoreSeries],
                   test_bars: dict[str, ScoreSeries],
                   evr_threshold: float = DEFAULT_EVR_THRESHOLD,
                   ) -> dict[str, tuple[RegionModel, list[RegionVerdict]]]:
    """Fit and evaluate every named subset independently; overlap is fine."""
    out = {}
    for name, (stations, evr) in regions.items():
        model = fit_region(train_bars, stations, evr if evr is not None else evr_threshold)
        out[name] = (model, region_verdicts(model, test_bars))
    return out


def ks_uniform(pvals) -> float:
    """Kolmogorov-Smirnov distance of a sample from Uniform(0, 1)."""
    ps = np.sort(np.asarray(pvals, dtype=np.float64))
    if ps.size == 0:
        raise ValueError("empty p-value sample")
    n = ps.size
    hi = np.arange(1, n + 1) / n - ps
    lo = ps - np.arange(0, n) / n
    return float(np.maximum(hi, lo).max())


def write_region_verdicts(path, verdicts_by_region: dict[str, list[RegionVerdict]],
                          alpha: float) -> None:
    """Verdict export: region,t,Z,dof,p,flag_at_alpha."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("region,t,Z,dof,p,flag_at_alpha\n")
        for name in sorted(verdicts_by_region):
            for v in verdicts_by_region[name]:
                fh.write(f"{name},{v.t},{v.Z:.9g},{v.dof},{v.p:.9g},{int(v.p <= alpha)}\n")
