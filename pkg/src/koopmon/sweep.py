"""Hyperparameter sweep: grid over alpha, window length, and explained-variance
threshold, scored against labeled synthetic data.

Scoring granularity is asymmetric on purpose: recall counts detected EVENTS
(one flag anywhere inside an anomaly window detects it) while precision
counts flagged HOURS, since a single in-window flag is all an operator needs
but every out-of-window flag is a real nuisance.
"""

from dataclasses import dataclass

DEFAULT_BETA = 1.0 / 6.0


@dataclass
class SweepGrid:
    alphas: list[float]
    ks: list[int]
    evr_thresholds: list[float]

    def __post_init__(self):
        if not (self.alphas and self.ks and self.evr_thresholds):
            raise ValueError("sweep grid must have at least one value per axis")
        if any(not 0.0 < a < 1.0 for a in self.alphas):
            raise ValueError("alpha values must lie in (0, 1)")
        if any(k < 1 for k in self.ks):
            raise ValueError("window lengths must be >= 1")
        if any(not 0.0 < e <= 1.0 for e in self.evr_thresholds):
            raise ValueError("explained-variance thresholds must lie in (0, 1]")


@dataclass
class RunScore:
    """tp/fp count flagged hours; fn counts undetected events."""

    precision: float
    recall: float
    mean_latency_hours: float | None
    tp: int
    fp: int
    fn: int


@dataclass
class SweepCell:
    alpha: float
    k: int
    evr: float
    precision: float
    recall: float
    f_beta: float
    mean_latency_hours: float | None
    tp: int
    fp: int
    fn: int


def f_beta(precision: float, recall: float, beta: float = DEFAULT_BETA) -> float:
    """Weighted F measure; beta < 1 weights precision above recall. 0/0 -> 0."""
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + b2) * precision * recall / denom


def score_run(flag_hours, truth_windows) -> RunScore:
    """Compare flagged hours against labeled anomaly windows [t_a, t_b).

    An event is detected when any flag lands inside its window; latency is
    first in-window flag minus onset, averaged over detected events.  With no
    flags at all, precision is reported as 1 (tp = fp = 0).
    """
    flags = sorted(set(int(t) for t in flag_hours))
    windows = list(truth_windows)
    in_any = [any(a <= t < b for a, b in windows) for t in flags]
    tp = sum(in_any)
    fp = len(flags) - tp
    detected = 0
    latencies = []
    for a, b in windows:
        hits = [t for t in flags if a <= t < b]
        if hits:
            detected += 1
            latencies.append(hits[0] - a)
    fn = len(windows) - detected
    precision = tp / len(flags) if flags else 1.0
    recall = detected / len(windows) if windows else 1.0
    latency = sum(latencies) / len(latencies) if latencies else None
    return RunScore(precision, recall, latency, tp, fp, fn)


def run_sweep(grid: SweepGrid, dataset, config) -> tuple[list[SweepCell], SweepCell]:
    """Full factorial evaluation of region-level flags on a labeled dataset.

    Models are trained once per station and reused across cells; returns the
    table plus the argmax-F cell (ties broken by grid order).
    """
    from . import pipeline  # local import; pipeline pulls in the full stack

    windows = dataset.truth_windows()
    if not windows:
        raise ValueError("dataset has no anomalous events to score against")
    pairs = {p.obs.station_id: p for p in dataset.pairs}
    models = pipeline.train_all(pairs, config)
    raw = pipeline.raw_scores(pairs, models, config)
    stations = sorted(raw)

    cells = []
    best = None
    for alpha in grid.alphas:
        for k in grid.ks:
            bars = {sid: pipeline.bar_scores(raw[sid], k, config.min_valid_frac)
                    for sid in stations}
            train_bars = {sid: bars[sid].slice_hours(*config.train_interval)
                          for sid in stations}
            test_bars = {sid: bars[sid].slice_hours(config.train_interval[1],
                                                    bars[sid].t0 + len(bars[sid]))
                         for sid in stations}
            filtered = {sid: pipeline.filter_train_bars(train_bars[sid], config.lam)
                        for sid in stations}
            for evr in grid.evr_thresholds:
                from .regions import fit_region, region_verdicts
                region = fit_region(filtered, stations, evr)
                verdicts = region_verdicts(region, test_bars)
                flags = [v.t for v in verdicts if v.p <= alpha]
                score = score_run(flags, windows)
                cell = SweepCell(alpha, k, evr, score.precision, score.recall,
                                 f_beta(score.precision, score.recall),
                                 score.mean_latency_hours, score.tp, score.fp, score.fn)
                cells.append(cell)
                if best is None or cell.f_beta > best.f_beta:
                    best = cell
    return cells, best


def write_sweep_csv(path, cells: list[SweepCell]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("alpha,k,evr,precision,recall,f16,latency\n")
        for c in cells:
            latency = "" if c.mean_latency_hours is None else f"{c.mean_latency_hours:.9g}"
            fh.write(f"{c.alpha:.9g},{c.k},{c.evr:.9g},{c.precision:.9g},"
                     f"{c.recall:.9g},{c.f_beta:.9g},{latency}\n")
