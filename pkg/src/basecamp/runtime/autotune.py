"""Online knob tuning with an epsilon-greedy bandit.

Each point in the knob space keeps an exponential moving average of the
objective (lower is better).  Untried configurations score as 0.0, so
exploitation visits every feasible point once before it settles; after
that a small epsilon keeps sampling the rest in case the cluster drifts.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..errors import BasecampError
from .sim import AvailabilityReport

EMA_ALPHA = 0.2
DEFAULT_EPSILON = 0.1

Config = tuple[tuple[str, object], ...]


class AutotuneError(BasecampError):
    pass


@dataclass
class TuningState:
    space: dict[str, tuple]
    epsilon: float = DEFAULT_EPSILON
    ema: dict[Config, float] = field(default_factory=dict)
    count: dict[Config, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.space:
            raise AutotuneError("empty knob space")
        for name, values in self.space.items():
            if not values:
                raise AutotuneError(f"knob '{name}' has no values")

    def configs(self) -> list[Config]:
        names = sorted(self.space)
        rows = itertools.product(*(self.space[n] for n in names))
        return [tuple(zip(names, row)) for row in rows]

    def score(self, cfg: Config) -> float:
        # optimistic: never-tried points look best
        return self.ema.get(cfg, 0.0)

    def best(self) -> Config:
        tried = [c for c in self.configs() if self.count.get(c, 0) > 0]
        if not tried:
            raise AutotuneError("no observations yet")
        return min(tried, key=lambda c: (self.ema[c], c))

    def to_json(self) -> dict:
        return {
            "space": {k: list(v) for k, v in sorted(self.space.items())},
            "epsilon": self.epsilon,
            "results": [
                {
                    "config": {k: v for k, v in cfg},
                    "ema": self.ema.get(cfg, 0.0),
                    "count": self.count.get(cfg, 0),
                }
                for cfg in self.configs()
            ],
        }


def _feasible(cfg: Config, env: Optional[AvailabilityReport]) -> bool:
    if env is None:
        return True
    d = dict(cfg)
    variant = d.get("variant")
    if variant == "fpga":
        if not env.has_kind("fpga") or env.free_vfs() < 1:
            return False
    cores = d.get("replication", d.get("cores"))
    if variant in (None, "cpu") and cores is not None:
        if int(cores) > env.free_cores():
            return False
    return True


def autotune_select(s: TuningState, env: Optional[AvailabilityReport],
                    rng: random.Random) -> Config:
    feasible = [c for c in s.configs() if _feasible(c, env)]
    if not feasible:
        raise AutotuneError("no feasible configuration under current load")
    if rng.random() < s.epsilon:
        return feasible[rng.randrange(len(feasible))]
    return min(feasible, key=lambda c: (s.score(c), c))


def autotune_observe(s: TuningState, cfg: Config, value: float) -> float:
    if cfg not in s.configs():
        raise AutotuneError(f"observation for unknown configuration {cfg}")
    n = s.count.get(cfg, 0)
    if n == 0:
        s.ema[cfg] = float(value)
    else:
        s.ema[cfg] = EMA_ALPHA * float(value) + (1.0 - EMA_ALPHA) * s.ema[cfg]
    s.count[cfg] = n + 1
    return s.ema[cfg]


def tune(space: dict[str, tuple],
         evaluate: Callable[[dict], float],
         env: Optional[object] = None,
         rounds: int = 50,
         seed: int = 0,
         epsilon: float = DEFAULT_EPSILON) -> TuningState:
    """Run the select/evaluate/observe loop for a fixed budget.

    env may be an AvailabilityReport held for the whole run, a callable
    giving a fresh report each round, or None for no capacity limits.
    """
    if rounds < 1:
        raise AutotuneError("rounds must be at least 1")
    s = TuningState(space, epsilon=epsilon)
    rng = random.Random(seed)
    for _ in range(rounds):
        report = env() if callable(env) else env
        cfg = autotune_select(s, report, rng)
        autotune_observe(s, cfg, evaluate(dict(cfg)))
    return s
