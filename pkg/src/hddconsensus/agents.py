"""Per-agent behavior: the HDD rule for cooperative agents, update rules for adversaries."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Collection, Mapping

import numpy as np

from .graph import NeighborView
from .history import HistoryWindow
from .protocol import hdd_step, hdd_weights
from .trust import (ConfidenceSchedule, DiscountSchedule, TrustEstimate, augmented_trust,
                    estimate_trust)

KINDS = ("cooperative", "random", "stubborn", "stealth")


@dataclass(frozen=True)
class BehaviorModel:
    """How one agent updates its state.

    ``random`` draws from ``U[low, high]`` every step. ``stubborn`` always
    reports ``value``. ``stealth`` moves a fraction ``gain`` of the way toward
    the mean of the cooperative states it can see, and from
    ``betrayal_time`` on behaves like ``random``. The stealth rule is a
    modelling extension, not part of the HDD protocol itself.
    """

    kind: str = "random"
    low: float = 0.0
    high: float = 1.0
    value: float = 0.5
    gain: float = 1.0
    betrayal_time: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown behavior kind {self.kind!r}")
        if self.kind in ("random", "stealth") and not self.low < self.high:
            raise ValueError(f"{self.kind} behavior needs low < high")
        if self.kind == "stealth" and not 0.0 < self.gain <= 1.0:
            raise ValueError("stealth gain must lie in (0, 1]")

    @classmethod
    def from_dict(cls, d) -> "BehaviorModel":
        if isinstance(d, str):
            return cls(kind=d)
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def adversary_step(model: BehaviorModel, own: float, visible_states: Mapping[int, float],
                   t: int, rng: np.random.Generator,
                   cooperative: Collection[int] | None = None) -> float:
    """Next state of a non-cooperative agent.

    ``cooperative`` restricts which visible agents the stealth rule tracks;
    ``None`` means all of them.
    """
    kind = model.kind
    if kind == "cooperative":
        raise ValueError("adversary_step called on a cooperative agent")
    if kind == "stealth" and model.betrayal_time is not None and t >= model.betrayal_time:
        kind = "random"
    if kind == "stubborn":
        return float(model.value)
    if kind == "random":
        return float(rng.uniform(model.low, model.high))
    tracked = [x for j, x in visible_states.items() if cooperative is None or j in cooperative]
    if not tracked:
        return float(own)
    target = sum(tracked) / len(tracked)
    return float(own + model.gain * (target - own))


def cooperative_step(window: HistoryWindow, schedules: tuple[ConfidenceSchedule, DiscountSchedule],
                     states, view: NeighborView, t: int,
                     covariance: bool = True) -> tuple[float, np.ndarray, TrustEstimate]:
    """One HDD update: estimate trust from ``window``, then average with the resulting weights.

    Returns ``(next_state, weight_row, estimate)``; ``weight_row`` follows
    ``view.inclusive`` order.
    """
    conf, disc = schedules
    if window.view != view:
        raise ValueError("window belongs to a different neighborhood")
    est, _ = estimate_trust(window, conf, disc, t, covariance=covariance)
    row = hdd_weights(augmented_trust(est.mean))
    return hdd_step(states, row, view), row, est
