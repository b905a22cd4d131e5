"""Monte Carlo drivers for the random block-color assignment.

Each trial runs the assignment steps only (no final matching) with its own
generator derived from ``(seed, trial)``, so reports are reproducible and
trials could be farmed out in any order.
"""

from __future__ import annotations

import json
import math
import statistics
import time
from dataclasses import dataclass, field

from statsmodels.stats.proportion import proportion_confint

from .errors import InvalidArgument
from .pipeline import (
    BicliqueSystem,
    MultipartiteInstance,
    SplitPlan,
    draw_round,
    residual_lists,
    round_rng,
    trivial_plan,
)


@dataclass
class ExperimentReport:
    kind: str
    trials: int
    values: list[float]
    target: float | None = None
    sigmas: float = 3.0
    extra: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def mean(self) -> float:
        return statistics.fmean(self.values)

    @property
    def std_error(self) -> float:
        if len(self.values) < 2:
            return math.inf
        return statistics.stdev(self.values) / math.sqrt(len(self.values))

    @property
    def passed(self) -> bool | None:
        """Whether the mean lies within ``sigmas`` standard errors of the target."""
        if self.target is None:
            return None
        return abs(self.mean - self.target) <= self.sigmas * self.std_error

    def to_dict(self, *, timing: bool = True) -> dict:
        out = {
            "kind": self.kind,
            "trials": self.trials,
            "values": self.values,
            "mean": self.mean,
            "std_error": self.std_error,
            "target": self.target,
            "sigmas": self.sigmas,
            "passed": self.passed,
            "extra": self.extra,
        }
        if timing:
            out["runtime"] = self.runtime
        return out

    def to_json(self, *, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing=timing), sort_keys=True, indent=2)


def _weights_after_steps(
    inst: MultipartiteInstance, system: BicliqueSystem, plan: SplitPlan, seed: int, trial: int
) -> tuple[dict[int, float], dict[int, frozenset[int]]]:
    res = draw_round(inst, system, plan, round_rng(seed, trial))
    lists = residual_lists(inst, system, res.uncolored)
    return {v: (1 / len(lst) if lst else math.inf) for v, lst in lists.items()}, lists


def _check(inst: MultipartiteInstance, system: BicliqueSystem) -> None:
    problems = system.violations(inst)
    if system.k == 0:
        problems.append("no blocks")
    if inst.chi != system.C:
        problems.append(f"instance has {inst.chi} parts, the system needs C = {system.C}")
    if problems:
        raise InvalidArgument("block system does not fit the instance: " + "; ".join(problems))


def montecarlo_expected_weight(
    inst: MultipartiteInstance, system: BicliqueSystem, trials: int, seed: int = 0, plan: SplitPlan | None = None
) -> ExperimentReport:
    """Sample ``W(V')`` after the assignment steps; the target is ``(n - S) / C``."""
    if trials < 1:
        raise InvalidArgument("trials must be positive")
    _check(inst, system)
    plan = plan or trivial_plan(inst, system)
    start = time.perf_counter()
    values = [sum(_weights_after_steps(inst, system, plan, seed, i)[0].values()) for i in range(trials)]
    return ExperimentReport(
        "expected_weight",
        trials,
        values,
        target=(inst.n - system.S) / system.C,
        extra={"n": inst.n, "S": system.S, "C": system.C, "seed": seed},
        runtime=time.perf_counter() - start,
    )


def montecarlo_color_tail(
    inst: MultipartiteInstance,
    system: BicliqueSystem,
    color: int,
    threshold: float | None,
    trials: int,
    seed: int = 0,
    plan: SplitPlan | None = None,
    delta: float = 0.5,
) -> ExperimentReport:
    """How often the weight of long-list holders of ``color`` exceeds ``threshold``.

    The sampled quantity is ``W`` over uncolored vertices outside big parts
    with ``color`` in ``L'(v)`` and ``|L'(v)| >= n / log n``. A threshold
    of None means the sample mean plus ``delta / 20``. Only the frequency is
    reported, with a Wilson interval; no bound is asserted.
    """
    if trials < 1:
        raise InvalidArgument("trials must be positive")
    _check(inst, system)
    plan = plan or trivial_plan(inst, system)
    big = {v for p in plan.big_parts for v in inst.parts.parts[p]}
    cutoff = inst.n / math.log(inst.n) if inst.n > 1 else 0.0
    start = time.perf_counter()
    values = []
    for i in range(trials):
        weights, lists = _weights_after_steps(inst, system, plan, seed, i)
        values.append(
            sum(w for v, w in weights.items() if v not in big and color in lists[v] and len(lists[v]) >= cutoff)
        )
    if threshold is None:
        threshold = statistics.fmean(values) + delta / 20
    hits = sum(1 for x in values if x > threshold)
    lo, hi = proportion_confint(hits, trials, alpha=0.05, method="wilson")
    return ExperimentReport(
        "color_tail",
        trials,
        values,
        extra={
            "color": color,
            "threshold": threshold if math.isfinite(threshold) else str(threshold),
            "cutoff": cutoff,
            "exceedances": hits,
            "frequency": hits / trials,
            "wilson_95": [float(lo), float(hi)],
            "seed": seed,
        },
        runtime=time.perf_counter() - start,
    )
