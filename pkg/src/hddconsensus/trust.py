"""Neighbor trust estimation from a rolling history window.

Pipeline for one agent at time ``t``:

1. ``membership``: which neighbors sat inside the agent's confidence ball at
   each window time.
2. ``frequency_counter``: per neighbor, the window times it was inside.
3. ``discounted_importance``: ``nu ** (t - k)`` at those times, else 0.
4. ``estimate_mean``: window average of the importance vector.
5. ``variability_matrix`` / ``estimate_covariance``: spread of normalized
   distances around the mean.
6. ``augmented_trust``: the mean with a unit self-trust entry appended.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .history import HistoryWindow


def abs_distance(a, b):
    return np.abs(np.asarray(a) - np.asarray(b))


def mean_upper_bound(nu: float, horizon: int) -> float:
    """Mean trust of a neighbor that was inside the ball at every window time."""
    return (1.0 - nu ** horizon) / (horizon * (1.0 - nu))


@dataclass(frozen=True)
class ConfidenceSchedule:
    """Ball radii over the window, strictly decreasing toward the present.

    ``sorted-uniform`` reuses one set of bounds (largest for the oldest
    position) at every step. The decay kinds evaluate ``R * exp(-rho * k)``
    or ``R * rho ** k`` at the absolute window times ``k``.
    """

    kind: str
    bounds_by_position: tuple = ()
    amplitude: float = 1.0
    rate: float = 0.5

    def __post_init__(self):
        if self.kind == "sorted-uniform":
            b = self.bounds_by_position
            if not b or any(x <= y for x, y in zip(b, b[1:])) or b[-1] <= 0:
                raise ValueError("sorted-uniform bounds must be positive and strictly decreasing")
        elif self.kind == "exponential-decay":
            if self.amplitude < 0 or self.rate <= 0:
                raise ValueError("exponential decay needs amplitude >= 0 and rate > 0")
        elif self.kind == "geometric-decay":
            if self.amplitude < 0 or not 0 < self.rate < 1:
                raise ValueError("geometric decay needs amplitude >= 0 and ratio in (0, 1)")
        else:
            raise ValueError(f"unknown confidence schedule kind {self.kind!r}")

    @classmethod
    def sorted_uniform(cls, horizon: int, low: float, high: float,
                       rng: np.random.Generator) -> "ConfidenceSchedule":
        if not 0 < low < high:
            raise ValueError(f"need 0 < eps_min < eps_max, got [{low}, {high}]")
        b = np.sort(rng.uniform(low, high, size=horizon))[::-1].copy()
        # ties would break the strict ordering; nudge downward
        for k in range(1, horizon):
            if b[k] >= b[k - 1]:
                b[k] = np.nextafter(b[k - 1], 0.0)
        return cls("sorted-uniform", tuple(float(x) for x in b))

    @classmethod
    def exponential(cls, amplitude, rate):
        return cls("exponential-decay", amplitude=amplitude, rate=rate)

    @classmethod
    def geometric(cls, amplitude, ratio):
        return cls("geometric-decay", amplitude=amplitude, rate=ratio)

    def bounds(self, t: int, horizon: int) -> np.ndarray:
        """Radii for window times ``t-horizon+1 .. t``, oldest first."""
        if self.kind == "sorted-uniform":
            if len(self.bounds_by_position) != horizon:
                raise ValueError(f"schedule holds {len(self.bounds_by_position)} bounds, "
                                 f"window has {horizon}")
            return np.array(self.bounds_by_position)
        k = np.arange(t - horizon + 1, t + 1, dtype=float)
        if self.kind == "exponential-decay":
            return self.amplitude * np.exp(-self.rate * k)
        return self.amplitude * self.rate ** k


@dataclass(frozen=True)
class DiscountSchedule:
    """Discount factor per ``(agent, t)``; constant unless ``fn`` is given."""

    nu: float = 0.5
    fn: Callable[[int, int], float] | None = None

    def __post_init__(self):
        if self.fn is None and not 0.0 < self.nu < 1.0:
            raise ValueError(f"discount factor must lie in (0, 1), got {self.nu}")

    def value(self, agent: int, t: int) -> float:
        nu = self.nu if self.fn is None else self.fn(agent, t)
        if not 0.0 < nu < 1.0:
            raise ValueError(f"discount factor must lie in (0, 1), got {nu}")
        return nu


def discount_powers(nu: float, horizon: int) -> np.ndarray:
    """``nu ** (t - k)`` for the window positions, oldest first."""
    return nu ** np.arange(horizon - 1, -1, -1, dtype=float)


@dataclass(frozen=True)
class MembershipRecord:
    agent: int
    neighbors: tuple
    times: tuple
    inside: np.ndarray  # bool, (degree, horizon)

    def members(self, k: int) -> set:
        col = self.times.index(k)
        return {j for r, j in enumerate(self.neighbors) if self.inside[r, col]}


@dataclass
class TrustEstimate:
    mean: np.ndarray
    covariance: np.ndarray | None = None
    neighbors: tuple = field(default=())

    @property
    def trust_config(self) -> np.ndarray:
        return self.mean

    @property
    def noncoop_config(self) -> np.ndarray:
        return 1.0 - self.mean


def _check_current(w: HistoryWindow, t: int):
    if w.t != t:
        raise ValueError(f"window is at time {w.t}, not {t}")


def membership(w: HistoryWindow, sched: ConfidenceSchedule, t: int,
               distance=abs_distance) -> MembershipRecord:
    _check_current(w, t)
    eps = sched.bounds(t, w.horizon)
    if np.any(eps <= 0):
        raise ValueError("confidence schedule produced a non-positive bound")
    vals = w.values()
    inside = distance(vals[:-1], vals[-1]) <= eps
    return MembershipRecord(w.agent, w.view.neighbors, tuple(w.times), inside)


def frequency_counter(m: MembershipRecord, j: int) -> set:
    if j not in m.neighbors:
        raise KeyError(f"agent {j} is not a neighbor of {m.agent}")
    row = m.inside[m.neighbors.index(j)]
    return {k for k, hit in zip(m.times, row) if hit}


def discounted_importance(counter, nu: float, t: int, horizon: int) -> np.ndarray:
    if not 0.0 < nu < 1.0:
        raise ValueError(f"discount factor must lie in (0, 1), got {nu}")
    times = range(t - horizon + 1, t + 1)
    stray = set(counter) - set(times)
    if stray:
        raise ValueError(f"times {sorted(stray)} are outside the window")
    return np.array([nu ** (t - k) if k in counter else 0.0 for k in times])


def estimate_mean(importances, horizon: int) -> np.ndarray:
    imp = np.atleast_2d(np.asarray(importances, dtype=float))
    if imp.size == 0:
        return np.zeros(0)
    if imp.shape[1] != horizon:
        raise ValueError(f"importance vectors must have length {horizon}")
    return imp.sum(axis=1) / horizon


def variability_matrix(w: HistoryWindow, t: int, distance=abs_distance) -> np.ndarray:
    _check_current(w, t)
    vals = w.values()
    dist = distance(vals[-1], vals[:-1])
    return dist / (1.0 + dist)


def estimate_covariance(D, mean, horizon: int) -> np.ndarray:
    """Sample covariance of the columns of ``D`` about ``mean`` (divides by T-1).

    ``mean`` is the trust mean, not the column mean of ``D``; the two are
    different quantities and the result is kept as-is.
    """
    if horizon < 2:
        raise ValueError("covariance needs a window of at least 2")
    D = np.asarray(D, dtype=float)
    mean = np.asarray(mean, dtype=float)
    if D.shape != (mean.size, horizon):
        raise ValueError(f"expected D of shape {(mean.size, horizon)}, got {D.shape}")
    dev = D - mean[:, None]
    cov = dev @ dev.T / (horizon - 1)
    return 0.5 * (cov + cov.T)


def augmented_trust(mean) -> np.ndarray:
    return np.append(np.asarray(mean, dtype=float), 1.0)


def estimate_trust(w: HistoryWindow, conf: ConfidenceSchedule, disc: DiscountSchedule,
                   t: int, covariance: bool = True) -> tuple[TrustEstimate, MembershipRecord]:
    """Run the whole estimator for one agent; returns the estimate and memberships."""
    m = membership(w, conf, t)
    nu = disc.value(w.agent, t)
    imps = [discounted_importance(frequency_counter(m, j), nu, t, w.horizon)
            for j in w.view.neighbors]
    mean = estimate_mean(imps, w.horizon) if imps else np.zeros(0)
    cov = None
    if covariance:
        cov = estimate_covariance(variability_matrix(w, t), mean, w.horizon)
    return TrustEstimate(mean, cov, w.view.neighbors), m
