"""Plot-ready report emission: forecast bands, score traces, critical lines.

SVG output is hand-rolled (no plotting dependency) so identical runs produce
identical bytes.
"""

import math

import numpy as np

from .dpk import DpkModel, predict_params
from .frames import SeriesFrame
from .scoring import SamplingDist, ScoreSeries, critical_value
from .special import gauss_icdf

BAND_LEVELS = (0.2, 0.4, 0.6, 0.8)


def band_offsets(levels=BAND_LEVELS) -> list[float]:
    """Half-widths (in sigmas) of the central confidence bands."""
    return [gauss_icdf(0.5 + q / 2.0) for q in levels]


def write_station_report(path, frame: SeriesFrame, model: DpkModel,
                         bars: ScoreSeries | None = None,
                         dist: SamplingDist | None = None,
                         alpha: float | None = None) -> None:
    """Per-hour CSV of observed value, forecast mean, confidence bands, the
    rolling score, and the critical lines in score units."""
    offsets = band_offsets()
    crit_lo = crit_hi = None
    if dist is not None and alpha is not None:
        c = critical_value(alpha)
        crit_lo, crit_hi = dist.mu - c * dist.sigma, dist.mu + c * dist.sigma
    header = ["t", "x", "mu"]
    for q in BAND_LEVELS:
        pct = int(q * 100)
        header += [f"band{pct}_lo", f"band{pct}_hi"]
    header += ["stat", "crit_lo", "crit_hi"]

    def fmt(v):
        return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.9g}"

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        if len(frame) == 0:
            return
        mu, sigma = predict_params(model, frame.times())
        stat = bars.zbar if bars is not None and bars.zbar is not None else None
        for i in range(len(frame)):
            row = [str(frame.t0 + i), fmt(float(frame.values[i])), fmt(float(mu[i]))]
            for off in offsets:
                row += [fmt(float(mu[i] - off * sigma[i])), fmt(float(mu[i] + off * sigma[i]))]
            s = None if stat is None else float(stat[i])
            row += [fmt(s), fmt(crit_lo), fmt(crit_hi)]
            fh.write(",".join(row) + "\n")


def _polyline(xs, ys, stroke, width=1.0, dasharray=None):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    dash = f' stroke-dasharray="{dasharray}"' if dasharray else ""
    return (f'<polyline fill="none" stroke="{stroke}" stroke-width="{width}"'
            f'{dash} points="{pts}"/>')


def _scale(values, lo, hi, out_lo, out_hi):
    if hi <= lo:
        hi = lo + 1.0
    return (np.asarray(values) - lo) / (hi - lo) * (out_hi - out_lo) + out_lo


def write_report_svg(path, frame: SeriesFrame, model: DpkModel,
                     bars: ScoreSeries | None = None,
                     dist: SamplingDist | None = None,
                     alpha: float | None = None,
                     width: int = 900, height: int = 420) -> None:
    """Two stacked panels: observations with forecast bands, then the rolling
    score with critical lines."""
    times = frame.times().astype(float)
    mu, sigma = predict_params(model, frame.times())
    offsets = band_offsets()
    pad, mid = 40.0, height / 2.0
    finite = frame.values[~np.isnan(frame.values)]
    y_candidates = [mu - offsets[-1] * sigma, mu + offsets[-1] * sigma]
    if finite.size:
        y_candidates += [finite]
    y_lo = min(float(np.min(v)) for v in y_candidates)
    y_hi = max(float(np.max(v)) for v in y_candidates)
    xs = _scale(times, times[0], times[-1], pad, width - pad)

    def ys_top(vals):
        return _scale(vals, y_lo, y_hi, mid - pad / 2.0, pad)  # y axis points down

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    shades = ("#fddcd2", "#f9bba8", "#f29b82", "#e87a5d")
    for off, shade in zip(reversed(offsets), shades):
        top = ys_top(mu + off * sigma)
        bot = ys_top(mu - off * sigma)
        pts = [f"{x:.2f},{y:.2f}" for x, y in zip(xs, top)]
        pts += [f"{x:.2f},{y:.2f}" for x, y in zip(xs[::-1], bot[::-1])]
        parts.append(f'<polygon fill="{shade}" stroke="none" points="{" ".join(pts)}"/>')
    parts.append(_polyline(xs, ys_top(mu), "#c0392b"))
    present = ~np.isnan(frame.values)
    if present.any():
        parts.append(_polyline(xs[present], ys_top(frame.values[present]), "black"))

    if bars is not None and bars.zbar is not None:
        stat = bars.zbar
        have = ~np.isnan(stat)
        lo_vals = [stat[have]] if have.any() else []
        crit_pair = None
        if dist is not None and alpha is not None:
            c = critical_value(alpha)
            crit_pair = (dist.mu - c * dist.sigma, dist.mu + c * dist.sigma)
            lo_vals.append(np.asarray(crit_pair))
        if lo_vals:
            s_lo = min(float(np.min(v)) for v in lo_vals)
            s_hi = max(float(np.max(v)) for v in lo_vals)

            def ys_bot(vals):
                return _scale(vals, s_lo, s_hi, height - pad, mid + pad / 2.0)

            if have.any():
                parts.append(_polyline(xs[have], ys_bot(stat[have]), "#1f618d"))
            if crit_pair is not None:
                for cv in crit_pair:
                    y = float(ys_bot(np.array([cv]))[0])
                    parts.append(_polyline([pad, width - pad], [y, y], "#7f8c8d",
                                           dasharray="4,3"))
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
