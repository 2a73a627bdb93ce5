"""Rolling T-step windows of agent states.

A :class:`HistoryWindow` is what a single agent remembers: its own last ``T``
values and those of each neighbor, always full. :class:`HistoryBank` keeps
one shared ``(N, T)`` buffer for a whole run. Since every agent broadcasts a
single value per step, any agent's window is a row selection of the bank.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._rng import Purpose, substream
from .graph import NeighborView

SELF = "self"


@dataclass(frozen=True)
class PrefillStrategy:
    kind: str = "uniform"
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "hold"):
            raise ValueError(f"unknown prefill strategy {self.kind!r}")
        if self.kind == "uniform" and not self.low < self.high:
            raise ValueError(f"uniform prefill needs low < high, got [{self.low}, {self.high}]")

    @classmethod
    def parse(cls, text: str) -> "PrefillStrategy":
        """Parse ``"hold"`` or ``"uniform(a,b)"`` (``"uniform"`` alone means [0, 1])."""
        text = text.strip()
        if text in ("hold", "uniform"):
            return cls(text)
        m = re.fullmatch(r"uniform\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)", text)
        if not m:
            raise ValueError(f"cannot parse prefill strategy {text!r}")
        return cls("uniform", float(m.group(1)), float(m.group(2)))

    def __str__(self):
        return "hold" if self.kind == "hold" else f"uniform({self.low!r},{self.high!r})"


def synthesize_history(agent: int, initial_state: float, horizon: int,
                       strategy: PrefillStrategy, rng_seed: int) -> np.ndarray:
    """Pre-run history of one agent, oldest first, ending with its initial state.

    The synthetic values depend only on ``(rng_seed, agent)``, so every
    observer of ``agent`` sees the same fabricated past.
    """
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    out = np.empty(horizon)
    if strategy.kind == "hold":
        out[:-1] = initial_state
    else:
        rng = substream(rng_seed, Purpose.PREFILL, agent)
        out[:-1] = rng.uniform(strategy.low, strategy.high, size=horizon - 1)
    out[-1] = initial_state
    return out


class HistoryWindow:
    """Ring buffer of the last ``horizon`` values of an agent and its neighbors.

    Rows follow the inclusive-neighbor layout: neighbors in ascending id
    order, then the agent itself. ``t`` is the newest stored time.
    """

    def __init__(self, view: NeighborView, horizon: int, t: int, values: np.ndarray):
        values = np.array(values, dtype=float)
        if horizon < 2:
            raise ValueError("horizon must be at least 2")
        if values.shape != (view.degree + 1, horizon):
            raise ValueError(f"expected values of shape {(view.degree + 1, horizon)}, got {values.shape}")
        self.view = view
        self.horizon = horizon
        self.t = t
        self._buf = values
        self._head = 0  # column holding the oldest value
        self._row = {j: r for r, j in enumerate(view.inclusive)}

    @property
    def agent(self) -> int:
        return self.view.agent

    @property
    def times(self) -> range:
        return range(self.t - self.horizon + 1, self.t + 1)

    def values(self) -> np.ndarray:
        """All rows ordered oldest to newest, shape ``(degree + 1, horizon)``."""
        return np.roll(self._buf, -self._head, axis=1)

    @property
    def own_values(self) -> np.ndarray:
        return self.values()[-1]

    @property
    def neighbor_values(self) -> np.ndarray:
        return self.values()[:-1]

    def push(self, t_next: int, own: float, neighbor_states) -> "HistoryWindow":
        """Evict the oldest column and append the states observed at ``t_next``.

        ``neighbor_states`` is either a mapping from neighbor id to value or a
        sequence in canonical neighbor order.
        """
        if t_next != self.t + 1:
            raise ValueError(f"expected time step {self.t + 1}, got {t_next}")
        if isinstance(neighbor_states, Mapping):
            missing = [j for j in self.view.neighbors if j not in neighbor_states]
            if missing:
                raise KeyError(f"missing neighbor values for {missing}")
            column = [neighbor_states[j] for j in self.view.neighbors]
        else:
            column = list(neighbor_states)
            if len(column) != self.view.degree:
                raise ValueError(f"expected {self.view.degree} neighbor values, got {len(column)}")
        column.append(own)
        self._buf[:, self._head] = column
        self._head = (self._head + 1) % self.horizon
        self.t = t_next
        return self

    def value_at(self, j, k: int) -> float:
        """Stored ``x_j(k)``; ``j`` may be :data:`SELF` or the agent's own id."""
        if j == SELF:
            j = self.agent
        if j not in self._row:
            raise KeyError(f"agent {j} is not an inclusive neighbor of {self.agent}")
        if not self.t - self.horizon < k <= self.t:
            raise IndexError(f"time {k} outside window [{self.t - self.horizon + 1}, {self.t}]")
        col = (self._head + k - (self.t - self.horizon + 1)) % self.horizon
        return float(self._buf[self._row[j], col])

    def copy(self) -> "HistoryWindow":
        return HistoryWindow(self.view, self.horizon, self.t, self.values())


def prefill(agent: int, view: NeighborView, horizon: int, strategy, rng_seed: int,
            initial_states: Mapping[int, float] | Sequence[float]) -> HistoryWindow:
    """Full window at ``t = 0`` whose ``horizon - 1`` older columns are synthetic."""
    if isinstance(strategy, str):
        strategy = PrefillStrategy.parse(strategy)
    rows = [synthesize_history(j, initial_states[j], horizon, strategy, rng_seed)
            for j in view.inclusive]
    return HistoryWindow(view, horizon, 0, np.vstack(rows))


class HistoryBank:
    """Shared ``(n_agents, horizon)`` window for every agent, oldest column first."""

    def __init__(self, values: np.ndarray, t: int = 0):
        self.values = np.ascontiguousarray(values, dtype=float)
        self.horizon = self.values.shape[1]
        self.t = t

    @classmethod
    def prefilled(cls, initial_states, horizon, strategy, rng_seed) -> "HistoryBank":
        if isinstance(strategy, str):
            strategy = PrefillStrategy.parse(strategy)
        rows = [synthesize_history(j, x, horizon, strategy, rng_seed)
                for j, x in enumerate(initial_states)]
        return cls(np.vstack(rows))

    @property
    def times(self) -> range:
        return range(self.t - self.horizon + 1, self.t + 1)

    def push(self, t_next: int, states) -> None:
        if t_next != self.t + 1:
            raise ValueError(f"expected time step {self.t + 1}, got {t_next}")
        self.values[:, :-1] = self.values[:, 1:]
        self.values[:, -1] = states
        self.t = t_next

    def window(self, view: NeighborView) -> HistoryWindow:
        return HistoryWindow(view, self.horizon, self.t, self.values[list(view.inclusive)])
