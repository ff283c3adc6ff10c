"""Tree-structured Parzen estimator, small and fully pinned down.

The first 10 trials are uniform.  After that the history is split at
gamma(n) = min(ceil(0.25 * sqrt(n)), 25) best losses, per-dimension
Gaussian kernel densities are built for the good and bad halves with a
Scott-rule bandwidth clipped to the dimension's width, 24 candidates
are drawn from the good density, and the one maximizing l(x)/g(x)
wins.  Log-scaled dimensions do all of this in log10 space; integer
dimensions round and clamp at the end.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from ..errors import BasecampError

N_STARTUP = 10
N_CANDIDATES = 24
GAMMA_CAP = 25


class SentinelError(BasecampError):
    pass


def gamma(n: int) -> int:
    return min(math.ceil(0.25 * math.sqrt(n)), GAMMA_CAP)


@dataclass(frozen=True)
class Dim:
    name: str
    lo: float
    hi: float
    integer: bool = False
    log: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise SentinelError(
                f"dimension '{self.name}': empty range [{self.lo}, {self.hi}]")
        if self.log and self.lo <= 0:
            raise SentinelError(
                f"dimension '{self.name}': log scale needs positive bounds")

    # internal coordinate the kernels live in
    def fwd(self, x: float) -> float:
        return math.log10(x) if self.log else float(x)

    def back(self, u: float) -> float:
        x = 10.0 ** u if self.log else u
        x = min(max(x, self.lo), self.hi)
        if self.integer:
            x = int(min(max(round(x), math.ceil(self.lo)),
                        math.floor(self.hi)))
        return x

    def width(self) -> float:
        return self.fwd(self.hi) - self.fwd(self.lo)

    def uniform(self, rng: random.Random) -> float:
        u = rng.uniform(self.fwd(self.lo), self.fwd(self.hi))
        return self.back(u)


@dataclass
class TrialHistory:
    dims: tuple[Dim, ...]
    trials: list[tuple[dict, float]] = field(default_factory=list)

    def __post_init__(self):
        if not self.dims:
            raise SentinelError("empty search space")

    def record(self, params: dict, loss: float) -> None:
        if not math.isfinite(loss):
            raise SentinelError(f"non-finite loss {loss!r}")
        for d in self.dims:
            v = params[d.name]
            if not d.lo <= v <= d.hi:
                raise SentinelError(
                    f"trial parameter '{d.name}'={v} outside "
                    f"[{d.lo}, {d.hi}]")
        self.trials.append((dict(params), float(loss)))


def _bandwidth(values: list[float], width: float, n_total: int) -> float:
    # Scott's rule collapses when the good side holds one or two points,
    # so the lower clip must carry the early search: width/min(100, n+1)
    # keeps steps wide until enough history accumulates to zoom in
    m = len(values)
    mean = sum(values) / m
    var = sum((v - mean) ** 2 for v in values) / m
    bw = math.sqrt(var) * m ** -0.2
    return min(max(bw, width / min(100, n_total + 1)), width)


def _density(x: float, centers: list[float], bw: float) -> float:
    s = 0.0
    for c in centers:
        z = (x - c) / bw
        s += math.exp(-0.5 * z * z) / (bw * math.sqrt(2.0 * math.pi))
    return s / len(centers)


def tpe_suggest(h: TrialHistory, seed: int = 0) -> dict:
    rng = random.Random(seed)
    n = len(h.trials)
    if n < N_STARTUP:
        return {d.name: d.uniform(rng) for d in h.dims}

    order = sorted(range(n), key=lambda i: (h.trials[i][1], i))
    n_good = gamma(n)
    good = [h.trials[i][0] for i in order[:n_good]]
    bad = [h.trials[i][0] for i in order[n_good:]]

    out = {}
    for d in h.dims:
        gc = [d.fwd(p[d.name]) for p in good]
        bc = [d.fwd(p[d.name]) for p in bad]
        w = d.width()
        bw_l = _bandwidth(gc, w, n)
        bw_g = _bandwidth(bc, w, n) if bc else w
        lo_u, hi_u = d.fwd(d.lo), d.fwd(d.hi)
        best_u, best_score = None, -1.0
        for _ in range(N_CANDIDATES):
            u = rng.gauss(gc[rng.randrange(len(gc))], bw_l)
            u = min(max(u, lo_u), hi_u)
            l = _density(u, gc, bw_l)
            g = _density(u, bc, bw_g) if bc else 1.0 / w
            score = l / g if g > 0 else math.inf
            if score > best_score:
                best_u, best_score = u, score
        out[d.name] = d.back(best_u)
    return out
