"""Synchronous-round simulation, metrics and parameter sweeps."""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from ._rng import Purpose, substream
from .agents import BehaviorModel, adversary_step
from .graph import Graph, build_paper_topology, is_connected, neighbor_view
from .history import HistoryBank, PrefillStrategy
from .kernels import get_kernel, kernel_name
from .protocol import WeightMatrix, assemble_weight_matrix, hdd_weights, write_weight_csv
from .trust import (ConfidenceSchedule, DiscountSchedule, TrustEstimate, augmented_trust,
                    discount_powers, estimate_trust)

CLUSTER_TOL = 1e-2
WEIGHT_THRESHOLD = 1e-3
STATE_TOL = 1e-2


class ConfigError(ValueError):
    pass


def _opt(default, section, help, **kw):
    return field(default=default, metadata={"section": section, "help": help}, **kw)


@dataclass(frozen=True)
class SimConfig:
    n_coop: int = _opt(10, "graph", "number of cooperative agents (ids 0..n_coop-1)")
    n_noncoop: int = _opt(3, "graph", "number of non-cooperative agents (ids after the cooperative ones)")
    edge_prob: float = _opt(0.4, "graph", "edge probability between cooperative agents")
    adversary_edges: bool = _opt(False, "graph", "also link adversaries to each other with edge_prob")
    require_connected: bool = _opt(False, "graph", "resample the graph until it is connected")
    connect_retries: int = _opt(100, "graph", "maximum graph resamples when require_connected is set")
    horizon: int = _opt(15, "history", "history window length T (>= 2)")
    prefill: str = _opt("uniform(0,1)", "history", "pre-run history: 'uniform(a,b)' or 'hold'")
    steps: int = _opt(200, "run", "number of synchronous rounds")
    seed: int = _opt(0, "run", "base seed for every random substream")
    init_low: float = _opt(0.0, "run", "initial states are drawn from U[init_low, init_high]")
    init_high: float = _opt(1.0, "run", "upper end of the initial state range")
    nu: float = _opt(0.5, "trust", "discount factor in (0, 1), shared by all agents")
    eps_kind: str = _opt("sorted-uniform", "trust",
                         "confidence schedule: sorted-uniform, exponential-decay, geometric-decay")
    eps_min: float = _opt(0.01, "trust", "lower end of the sorted-uniform bound range")
    eps_max: float = _opt(1.0, "trust", "upper end of the sorted-uniform bound range")
    eps_amplitude: float = _opt(1.0, "trust", "amplitude R of the decaying schedules")
    eps_rate: float = _opt(0.05, "trust", "rate (exponential) or ratio (geometric) of the decaying schedules")
    covariance: bool = _opt(True, "trust", "compute the trust covariance for logged estimates")
    behaviors: tuple = _opt((), "agents",
                            "one behavior per non-cooperative agent: random, stubborn, stealth "
                            "(empty means all random)")
    snapshot_times: tuple = _opt((), "log", "extra steps at which weights and estimates are logged "
                                 "(the final step is always logged)")
    snapshot_every: int = _opt(0, "log", "also log every k-th step when k > 0")

    def __post_init__(self):
        behaviors = tuple(b if isinstance(b, BehaviorModel) else BehaviorModel.from_dict(b)
                          for b in self.behaviors)
        object.__setattr__(self, "behaviors", behaviors)
        object.__setattr__(self, "snapshot_times", tuple(int(t) for t in self.snapshot_times))
        self.validate()

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"{name}: {why} (got {getattr(self, name)!r})")

        if self.n_coop < 1:
            bad("n_coop", "must be at least 1")
        if self.n_noncoop < 0:
            bad("n_noncoop", "must be non-negative")
        if not 0.0 <= self.edge_prob <= 1.0:
            bad("edge_prob", "must lie in [0, 1]")
        if self.connect_retries < 1:
            bad("connect_retries", "must be at least 1")
        if self.horizon < 2:
            bad("horizon", "must be at least 2")
        if self.steps < 1:
            bad("steps", "must be at least 1")
        if not 0.0 < self.nu < 1.0:
            bad("nu", "must lie in (0, 1)")
        if not self.init_low <= self.init_high:
            bad("init_high", "must not be below init_low")
        if self.eps_kind == "sorted-uniform":
            if not self.eps_min > 0:
                bad("eps_min", "must be positive")
            if not self.eps_max > self.eps_min:
                bad("eps_max", "must exceed eps_min")
        elif self.eps_kind == "exponential-decay":
            if self.eps_amplitude <= 0:
                bad("eps_amplitude", "must be positive")
            if self.eps_rate <= 0:
                bad("eps_rate", "must be positive")
        elif self.eps_kind == "geometric-decay":
            if self.eps_amplitude <= 0:
                bad("eps_amplitude", "must be positive")
            if not 0 < self.eps_rate < 1:
                bad("eps_rate", "must lie in (0, 1)")
        else:
            bad("eps_kind", "unknown confidence schedule")
        try:
            PrefillStrategy.parse(self.prefill)
        except ValueError as exc:
            raise ConfigError(f"prefill: {exc}") from None
        if self.behaviors:
            if len(self.behaviors) != self.n_noncoop:
                bad("behaviors", f"needs exactly n_noncoop={self.n_noncoop} entries")
            if any(b.kind == "cooperative" for b in self.behaviors):
                bad("behaviors", "non-cooperative agents cannot be cooperative")
        if self.snapshot_every < 0:
            bad("snapshot_every", "must be non-negative")

    @property
    def n_agents(self) -> int:
        return self.n_coop + self.n_noncoop

    def behavior_models(self) -> tuple:
        return self.behaviors or tuple(BehaviorModel() for _ in range(self.n_noncoop))

    def snapshot_steps(self) -> list:
        steps = {t for t in self.snapshot_times if 0 <= t <= self.steps}
        if self.snapshot_every > 0:
            steps.update(range(0, self.steps + 1, self.snapshot_every))
        steps.add(self.steps)
        return sorted(steps)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["behaviors"] = [b.to_dict() for b in self.behavior_models()]
        d["snapshot_times"] = list(self.snapshot_times)
        return d


def config_fields():
    """``(name, type name, section, help)`` for every config key."""
    out = []
    for f in fields(SimConfig):
        tname = f.type if isinstance(f.type, str) else f.type.__name__
        out.append((f.name, tname, f.metadata["section"], f.metadata["help"]))
    return out


def make_graph(config: SimConfig) -> tuple[Graph, int]:
    """Build the topology; returns the graph and the graph seed actually used."""
    attempts = config.connect_retries if config.require_connected else 1
    for attempt in range(attempts):
        gseed = config.seed
        if attempt:
            gseed = int(substream(config.seed, Purpose.GRAPH, attempt).integers(2**62))
        g = build_paper_topology(config.n_coop, config.n_noncoop, config.edge_prob, gseed,
                                 config.adversary_edges)
        if not config.require_connected or is_connected(g):
            return g, gseed
    raise RuntimeError(f"no connected graph after {attempts} samples")


@dataclass
class TrajectoryLog:
    config: SimConfig
    graph: Graph
    graph_seed: int
    states: np.ndarray  # (steps + 1, n_agents)
    weights: dict = field(default_factory=dict)  # t -> WeightMatrix
    trust: dict = field(default_factory=dict)  # t -> {agent: TrustEstimate}
    schedules: dict = field(default_factory=dict)  # agent -> ConfidenceSchedule
    backend: str = "python"

    @property
    def cooperative(self) -> list:
        return sorted(self.graph.cooperative_set)

    def final_states(self) -> np.ndarray:
        return self.states[-1]

    def cooperative_final(self) -> dict:
        x = self.states[-1]
        return {i: float(x[i]) for i in self.cooperative}

    def spread(self, agents=None) -> np.ndarray:
        """``max - min`` state over ``agents`` (all by default) at every step."""
        x = self.states if agents is None else self.states[:, list(agents)]
        return x.max(axis=1) - x.min(axis=1)

    def final_weights(self) -> WeightMatrix:
        try:
            return self.weights[self.config.steps]
        except KeyError:
            raise KeyError("log has no final weight snapshot") from None

    def metrics(self) -> dict:
        coop = self.cooperative
        report = detect_clusters(self.cooperative_final(), CLUSTER_TOL)
        return {
            "final_spread_all": float(self.spread()[-1]),
            "final_spread_cooperative": float(self.spread(coop)[-1]),
            "cooperative_clusters": len(report.clusters),
        }

    def write_states_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "agent", "state"])
            for t, row in enumerate(self.states):
                for i, x in enumerate(row):
                    wr.writerow([t, i, repr(float(x))])

    def write_weights_csv(self, path) -> None:
        write_weight_csv(self.weights.values(), path)

    def metadata(self) -> dict:
        return {
            "package": "hddconsensus",
            "version": __version__,
            "backend": self.backend,
            "config": self.config.to_dict(),
            "derived": {
                "graph_seed": self.graph_seed,
                "edges": sorted(list(e) for e in self.graph.edges),
                "confidence_bounds": {str(i): list(s.bounds_by_position)
                                      for i, s in sorted(self.schedules.items())
                                      if s.kind == "sorted-uniform"},
            },
            "metrics": self.metrics(),
        }

    def write_metadata(self, path) -> None:
        Path(path).write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n")


def _confidence_schedules(config: SimConfig, agents) -> dict:
    out = {}
    for i in agents:
        if config.eps_kind == "sorted-uniform":
            rng = substream(config.seed, Purpose.CONFIDENCE, i)
            out[i] = ConfidenceSchedule.sorted_uniform(config.horizon, config.eps_min,
                                                       config.eps_max, rng)
        elif config.eps_kind == "exponential-decay":
            out[i] = ConfidenceSchedule.exponential(config.eps_amplitude, config.eps_rate)
        else:
            out[i] = ConfidenceSchedule.geometric(config.eps_amplitude, config.eps_rate)
    return out


def _weights_from_means(means, indptr, coop, views, t, n) -> WeightMatrix:
    rows = {}
    for i in coop:
        z = augmented_trust(means[indptr[i]:indptr[i + 1]])
        rows[i] = (views[i], hdd_weights(z))
    return assemble_weight_matrix(rows, t, n)


def run(config: SimConfig, backend: str | None = None) -> TrajectoryLog:
    """Simulate ``config.steps`` synchronous rounds.

    Each round reads only the frozen states at ``t``: cooperative agents run
    the HDD kernel on their windows, adversaries apply their own rule, then
    all ``t + 1`` states are committed and pushed into the history.
    """
    kernel = get_kernel(backend)
    graph, gseed = make_graph(config)
    n, T = graph.n_agents, config.horizon
    coop = sorted(graph.cooperative_set)
    coop_arr = np.array(coop, dtype=np.int64)
    coop_set = frozenset(coop)
    views = {i: neighbor_view(graph, i) for i in range(n)}
    indptr, indices = graph.csr()

    x0 = np.array([substream(config.seed, Purpose.INITIAL_STATE, j).uniform(config.init_low,
                                                                            config.init_high)
                   for j in range(n)])
    bank = HistoryBank.prefilled(x0, T, config.prefill, config.seed)

    schedules = _confidence_schedules(config, coop)
    disc = DiscountSchedule(config.nu)
    eps = np.zeros((n, T))
    powers = np.zeros((n, T))
    for i in coop:
        eps[i] = schedules[i].bounds(0, T)
        powers[i] = discount_powers(disc.value(i, 0), T)
    static_eps = config.eps_kind == "sorted-uniform"

    adversaries = sorted(graph.non_cooperative_set)
    models = dict(zip(adversaries, config.behavior_models()))
    adv_rng = {j: substream(config.seed, Purpose.ADVERSARY, j) for j in adversaries}

    states = np.empty((config.steps + 1, n))
    states[0] = x0
    snapshots = set(config.snapshot_steps())
    log = TrajectoryLog(config, graph, gseed, states, schedules=schedules,
                        backend=kernel_name(kernel))

    def snapshot(t, means):
        log.weights[t] = _weights_from_means(means, indptr, coop, views, t, n)
        ests = {}
        for i in coop:
            est, _ = estimate_trust(bank.window(views[i]), schedules[i], disc, t,
                                    covariance=config.covariance)
            ests[i] = est
        log.trust[t] = ests

    for t in range(config.steps):
        if not static_eps:
            for i in coop:
                eps[i] = schedules[i].bounds(t, T)
        if np.any(eps[coop_arr] <= 0):
            raise ValueError(f"confidence schedule produced a non-positive bound at t={t}")
        x = states[t]
        means, nxt = kernel(bank.values, indptr, indices, coop_arr, eps, powers)
        if t in snapshots:
            snapshot(t, means)
        new = x.copy()
        new[coop_arr] = nxt
        for j in adversaries:
            visible = {k: float(x[k]) for k in views[j].neighbors}
            new[j] = adversary_step(models[j], float(x[j]), visible, t, adv_rng[j], coop_set)
        states[t + 1] = new
        bank.push(t + 1, new)

    t = config.steps
    if not static_eps:
        for i in coop:
            eps[i] = schedules[i].bounds(t, T)
    means, _ = kernel(bank.values, indptr, indices, coop_arr, eps, powers)
    snapshot(t, means)
    return log


@dataclass
class ClusterReport:
    clusters: list  # tuples of agent ids, ordered by value
    representatives: list
    max_spread: float
    tol: float
    verdicts: dict | None = None

    def cluster_of(self) -> dict:
        return {i: c for c, members in enumerate(self.clusters) for i in members}

    def largest(self) -> tuple:
        return max(self.clusters, key=len) if self.clusters else ()


def detect_clusters(final_states, tol: float = CLUSTER_TOL) -> ClusterReport:
    """Single-linkage clustering on the line: split wherever adjacent values differ by more than ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(final_states, Mapping):
        items = [(float(v), int(i)) for i, v in final_states.items()]
    else:
        items = [(float(v), i) for i, v in enumerate(final_states)]
    items.sort()
    clusters, current = [], []
    for v, i in items:
        if current and v - current[-1][0] > tol:
            clusters.append(current)
            current = []
        current.append((v, i))
    if current:
        clusters.append(current)
    reps = [float(np.mean([v for v, _ in c])) for c in clusters]
    spread = max((c[-1][0] - c[0][0] for c in clusters), default=0.0)
    return ClusterReport([tuple(i for _, i in c) for c in clusters], reps, spread, tol)


def trusted_sets(log: TrajectoryLog, weight_threshold: float = WEIGHT_THRESHOLD) -> dict:
    """Neighbors each cooperative agent weights above ``weight_threshold`` at the final step."""
    wm = log.final_weights()
    return {i: sorted(j for j, w in row.items() if j != i and w > weight_threshold)
            for i, row in wm.rows.items()}


def trust_based_consensus_check(log: TrajectoryLog, weight_threshold: float = WEIGHT_THRESHOLD,
                                state_tol: float = STATE_TOL) -> dict:
    """Per cooperative agent: is it within ``state_tol`` of every neighbor it still trusts?"""
    x = log.final_states()
    return {i: all(abs(x[i] - x[j]) < state_tol for j in trusted)
            for i, trusted in trusted_sets(log, weight_threshold).items()}


SWEEP_AXES = {"T": "horizon", "horizon": "horizon", "nu": "nu", "eps_max": "eps_max"}


@dataclass
class SweepRow:
    params: dict  # {"T": .., "nu": .., "eps_max": ..}
    seed: int
    final_states: dict  # cooperative agent -> state
    cluster_ids: dict
    n_clusters: int
    weight_columns: dict  # j -> {i: w_ij at the final step}
    verdicts: dict


def _sweep_one(args) -> SweepRow:
    config, columns, backend = args
    log = run(config, backend)
    final = log.cooperative_final()
    report = detect_clusters(final, CLUSTER_TOL)
    wm = log.final_weights()
    cols = {j: wm.column(j) for j in columns if j < config.n_agents}
    return SweepRow({"T": config.horizon, "nu": config.nu, "eps_max": config.eps_max},
                    config.seed, final, report.cluster_of(), len(report.clusters), cols,
                    trust_based_consensus_check(log))


def sweep(base: SimConfig, axes: Mapping[str, Sequence], seeds: Sequence[int],
          columns: Sequence[int] = (), workers: int = 1, backend: str | None = None) -> list:
    """One run per grid point per seed, in grid-major, seed-minor order.

    ``axes`` maps ``T``/``horizon``, ``nu`` or ``eps_max`` to value lists.
    ``columns`` selects agents whose final weight columns are kept.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("sweep needs at least one seed")
    if not axes:
        raise ValueError("sweep needs at least one axis")
    names = []
    for key, values in axes.items():
        if key not in SWEEP_AXES:
            raise ValueError(f"cannot sweep over {key!r}; choose from T, nu, eps_max")
        if not list(values):
            raise ValueError(f"axis {key!r} is empty")
        names.append(SWEEP_AXES[key])
    jobs = []
    for point in itertools.product(*axes.values()):
        cfg = replace(base, **dict(zip(names, point)))
        for s in seeds:
            jobs.append((replace(cfg, seed=int(s)), tuple(columns), backend))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(j) for j in jobs]


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["T", "nu", "eps_max", "seed", "agent", "final_state", "cluster_id"])
        for r in rows:
            p = r.params
            for i in sorted(r.final_states):
                wr.writerow([p["T"], repr(p["nu"]), repr(p["eps_max"]), r.seed, i,
                             repr(r.final_states[i]), r.cluster_ids[i]])


def write_weight_columns_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["T", "nu", "eps_max", "seed", "i", "j", "w"])
        for r in rows:
            p = r.params
            for j in sorted(r.weight_columns):
                col = r.weight_columns[j]
                for i in sorted(col):
                    wr.writerow([p["T"], repr(p["nu"]), repr(p["eps_max"]), r.seed, i, j,
                                 repr(col[i])])
