"""Detector selection: TPE search over kind and hyperparameters.

Labeled mode fits candidates on the first 70% of the series, scores
them by 1 - F1 on the held-out last 30%, and refits the winner on the
whole series.  Without labels there is nothing to score, so a fixed
default ships instead, clearly flagged.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .detectors import DetectorModel, KINDS, SentinelError, detect, f1_score, fit
from .tpe import Dim, TrialHistory, tpe_suggest

MIN_POINTS = 16
DEFAULT_KIND = "rolling-zscore"
DEFAULT_W = 64
DEFAULT_K = 3.0
UNLABELED_WARNING = (
    "no labels given; shipping default rolling-zscore w=64 k=3 "
    "instead of searching")


@dataclass(frozen=True)
class SelectionResult:
    model: DetectorModel
    loss: Optional[float]
    score: Optional[float]
    trials: int
    warning: Optional[str] = None


def _model_from_params(params: dict, n_train: int) -> DetectorModel:
    kind = KINDS[int(params["kind"])]
    w = min(int(params["w"]), n_train)
    return DetectorModel(kind, max(2, w), float(params["k"]))


def select_model(data, labels=None, budget=100, seed: int = 0
                 ) -> SelectionResult:
    xs = [float(x) for x in data]
    n = len(xs)
    if n < MIN_POINTS:
        raise SentinelError(
            f"need at least {MIN_POINTS} points to select a model, "
            f"got {n}")

    if labels is None:
        w = min(DEFAULT_W, n)
        m = fit(DEFAULT_KIND, w, DEFAULT_K, xs)
        return SelectionResult(m, None, None, 0, UNLABELED_WARNING)

    truth = {int(i) for i in labels}
    bad = [i for i in truth if not 0 <= i < n]
    if bad:
        raise SentinelError(f"label indexes out of range: {sorted(bad)}")

    split = int(n * 0.7)
    suffix_truth = {i for i in truth if i >= split}
    train = xs[:split]

    dims = (
        Dim("kind", 0, len(KINDS) - 1, integer=True),
        Dim("w", 2, max(3, min(128, split)), integer=True),
        Dim("k", 0.5, 8.0),
    )
    h = TrialHistory(dims)

    if isinstance(budget, float):
        deadline = time.monotonic() + budget
        def more(i): return time.monotonic() < deadline or i == 0
    else:
        if budget < 1:
            raise SentinelError("budget must allow at least one trial")
        def more(i): return i < budget

    best = None
    i = 0
    while more(i):
        params = tpe_suggest(h, seed=seed + i)
        try:
            cand = _model_from_params(params, len(train))
            fitted = fit(cand.kind, cand.w, cand.k, train)
            pred = {t for t in detect(fitted, xs).anomalies if t >= split}
            loss = 1.0 - f1_score(pred, suffix_truth)
        except SentinelError:
            loss = 1.0
            cand = None
        h.record(params, loss)
        if cand is not None and (best is None or loss < best[0]):
            best = (loss, cand)
        i += 1

    if best is None:
        raise SentinelError("no feasible detector in the search space")
    loss, cand = best
    final = fit(cand.kind, min(cand.w, n), cand.k, xs)
    return SelectionResult(final, loss, 1.0 - loss, i, None)
