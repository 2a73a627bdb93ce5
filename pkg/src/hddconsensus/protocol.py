"""Trust-weighted state updates."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import NeighborView

ROW_SUM_CHECK = 1e-12
ROW_SUM_ERROR = 1e-9


def hdd_weights(z) -> np.ndarray:
    """Normalize an augmented trust vector into a weight row.

    The final (self) entry is 1, so the L1 norm is at least 1.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size == 0 or z[-1] != 1.0:
        raise ValueError("augmented trust vector must end with a self-trust entry of 1")
    if np.any(z < 0) or np.any(z > 1):
        raise ValueError("trust entries must lie in [0, 1]")
    return z / z.sum()


def _inclusive_states(states, view: NeighborView) -> np.ndarray:
    if isinstance(states, Mapping):
        return np.array([states[j] for j in view.inclusive], dtype=float)
    return np.asarray(states, dtype=float)[list(view.inclusive)]


def hdd_step(states, row, view: NeighborView) -> float:
    """Weighted average over the inclusive neighbors, ``row`` in ``view.inclusive`` order."""
    row = np.asarray(row, dtype=float)
    if row.shape != (view.degree + 1,):
        raise ValueError(f"weight row has {row.size} entries, agent {view.agent} "
                         f"has {view.degree + 1} inclusive neighbors")
    return float(row @ _inclusive_states(states, view))


def baseline_step(states, view: NeighborView) -> float:
    """Memoryless update with uniform weights over the inclusive neighbors."""
    return float(_inclusive_states(states, view).mean())


@dataclass
class WeightMatrix:
    """Sparse row-stochastic weights at one time step.

    ``rows[i]`` maps each ``j`` in agent ``i``'s inclusive neighborhood to
    ``w_ij``. Agents that do not run the protocol have no row.
    """

    step: int
    rows: dict
    n_agents: int

    def weight(self, i: int, j: int) -> float:
        if i not in self.rows:
            raise KeyError(f"agent {i} has no protocol weights")
        return self.rows[i].get(j, 0.0)

    def column(self, j: int) -> dict:
        return {i: row.get(j, 0.0) for i, row in self.rows.items()}

    def dense(self) -> np.ndarray:
        """Dense matrix; rows of non-protocol agents are NaN."""
        out = np.full((self.n_agents, self.n_agents), np.nan)
        for i, row in self.rows.items():
            out[i] = 0.0
            for j, w in row.items():
                out[i, j] = w
        return out

    def triplets(self):
        for i in sorted(self.rows):
            for j in sorted(self.rows[i]):
                yield self.step, i, j, self.rows[i][j]


def assemble_weight_matrix(rows: Mapping[int, tuple[NeighborView, Sequence[float]]], t: int,
                           n_agents: int) -> WeightMatrix:
    """Collect per-agent weight rows (given with their views) into a :class:`WeightMatrix`."""
    out = {}
    for i, (view, row) in rows.items():
        row = np.asarray(row, dtype=float)
        if view.agent != i or row.shape != (view.degree + 1,):
            raise ValueError(f"row for agent {i} does not match its neighborhood")
        s = row.sum()
        if abs(s - 1.0) > ROW_SUM_ERROR:
            raise ValueError(f"row {i} at t={t} sums to {s!r}")
        if np.any(row < 0) or np.any(row > 1):
            raise ValueError(f"row {i} at t={t} has entries outside [0, 1]")
        out[i] = {j: float(w) for j, w in zip(view.inclusive, row)}
    return WeightMatrix(t, out, n_agents)


def write_weight_csv(matrices, path) -> None:
    """Write ``t,i,j,w`` triplets for every stored entry, ascending."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "i", "j", "w"])
        for wm in sorted(matrices, key=lambda m: m.step):
            for t, i, j, w in wm.triplets():
                wr.writerow([t, i, j, repr(float(w))])
