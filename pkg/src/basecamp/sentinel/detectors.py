"""Threshold detectors over univariate series.

Three kinds: rolling-zscore, iqr, moving-average-residual.  Windowed
detectors slide a fixed-size window that shifts near the edges so it
always holds exactly w in-range points; with w equal to the series
length every point is judged against whole-series statistics.

A model stores the hyperparameters plus summary statistics of the
slice it was fitted on and a logical fit counter (deterministic,
unlike a wall clock).  Detection itself recomputes window statistics
on the series it is shown, so refit-then-detect matches a fresh
fit-and-detect on the same data.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .tpe import SentinelError

SIGMA_FLOOR = 1e-12
KINDS = ("rolling-zscore", "iqr", "moving-average-residual")

_fit_counter = itertools.count(1)


@dataclass(frozen=True)
class DetectorModel:
    kind: str
    w: int
    k: float
    stats: dict = field(default_factory=dict, compare=False)
    fitted_at: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SentinelError(f"unknown detector kind '{self.kind}'")
        if self.kind != "iqr" and self.w < 2:
            raise SentinelError(f"window w={self.w} must be at least 2")
        if not self.k > 0:
            raise SentinelError(f"threshold k={self.k} must be positive")

    @property
    def min_len(self) -> int:
        # quartiles want a handful of points; windows want the window
        return 4 if self.kind == "iqr" else self.w

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "w": self.w,
            "k": self.k,
            "stats": dict(self.stats),
            "fitted_at": self.fitted_at,
        }

    @staticmethod
    def from_json(d: dict) -> "DetectorModel":
        return DetectorModel(d["kind"], int(d["w"]), float(d["k"]),
                             dict(d.get("stats", {})),
                             int(d.get("fitted_at", 0)))


@dataclass(frozen=True)
class AnomalyReport:
    anomalies: tuple[int, ...]
    model: dict
    score: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "anomalies": list(self.anomalies),
            "model": self.model,
            "score": self.score,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


REPORT_SCHEMA = {
    "type": "object",
    "required": ["anomalies", "model", "score"],
    "properties": {
        "anomalies": {
            "type": "array",
            "items": {"type": "integer", "minimum": 0},
        },
        "model": {"type": "object"},
        "score": {"type": ["number", "null"]},
    },
}


def _mean(xs) -> float:
    return sum(xs) / len(xs)


def _pstd(xs, mean: float) -> float:
    return math.sqrt(sum((x - mean) ** 2 for x in xs) / len(xs))


def _quartiles(xs) -> tuple[float, float]:
    # linear interpolation between order statistics
    s = sorted(xs)
    n = len(s)

    def pct(q):
        pos = q * (n - 1)
        i = int(pos)
        frac = pos - i
        if i + 1 < n:
            return s[i] * (1 - frac) + s[i + 1] * frac
        return s[i]

    return pct(0.25), pct(0.75)


def _window(t: int, w: int, n: int) -> tuple[int, int]:
    lo = t - (w - 1) // 2
    lo = max(0, min(lo, n - w))
    return lo, lo + w


def fit(kind: str, w: int, k: float, data) -> DetectorModel:
    xs = [float(x) for x in data]
    probe = DetectorModel(kind, w, k)
    if len(xs) < probe.min_len:
        raise SentinelError(
            f"fit window of {len(xs)} points is shorter than the "
            f"model minimum {probe.min_len}")
    mean = _mean(xs)
    q1, q3 = _quartiles(xs)
    stats = {
        "n": len(xs),
        "mean": mean,
        "std": _pstd(xs, mean),
        "q1": q1,
        "q3": q3,
    }
    return DetectorModel(kind, w, k, stats, next(_fit_counter))


def refit(m: DetectorModel, data) -> DetectorModel:
    return fit(m.kind, m.w, m.k, data)


def detect(m: DetectorModel, data) -> AnomalyReport:
    xs = [float(x) for x in data]
    n = len(xs)
    if n < m.min_len:
        raise SentinelError(
            f"series of {n} points is shorter than the model "
            f"minimum {m.min_len}")
    hits: list[int] = []
    if m.kind == "rolling-zscore":
        for t in range(n):
            lo, hi = _window(t, m.w, n)
            win = xs[lo:hi]
            mu = _mean(win)
            sigma = max(_pstd(win, mu), SIGMA_FLOOR)
            if abs(xs[t] - mu) > m.k * sigma:
                hits.append(t)
    elif m.kind == "iqr":
        q1, q3 = _quartiles(xs)
        spread = q3 - q1
        lo_b, hi_b = q1 - m.k * spread, q3 + m.k * spread
        hits = [t for t, x in enumerate(xs) if x < lo_b or x > hi_b]
    else:
        resid = []
        for t in range(n):
            lo, hi = _window(t, m.w, n)
            resid.append(xs[t] - _mean(xs[lo:hi]))
        mu_r = _mean(resid)
        sigma_r = max(_pstd(resid, mu_r), SIGMA_FLOOR)
        hits = [t for t, r in enumerate(resid)
                if abs(r - mu_r) > m.k * sigma_r]
    return AnomalyReport(tuple(hits), m.to_json(), None)


def f1_score(pred, truth) -> float:
    p, t = set(pred), set(truth)
    tp = len(p & t)
    fp = len(p - t)
    fn = len(t - p)
    if tp + fp + fn == 0:
        return 1.0
    return 2.0 * tp / (2.0 * tp + fp + fn)
