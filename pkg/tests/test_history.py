import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hddconsensus.graph import NeighborView, build_paper_topology, neighbor_view
from hddconsensus.history import (SELF, HistoryBank, HistoryWindow, PrefillStrategy, prefill)

VIEW = NeighborView(0, (1, 2))


def test_hold_prefill_replicates_initial_state():
    w = prefill(0, VIEW, 5, "hold", 1, {0: 0.7, 1: 0.2, 2: 0.9})
    assert list(w.own_values) == [0.7] * 5
    assert list(w.neighbor_values[1]) == [0.9] * 5
    assert w.t == 0 and list(w.times) == [-4, -3, -2, -1, 0]


def test_uniform_prefill_range_and_determinism():
    init = [0.5, 0.5, 0.5]
    a = prefill(0, VIEW, 8, "uniform(0,1)", 11, init)
    b = prefill(0, VIEW, 8, PrefillStrategy("uniform", 0.0, 1.0), 11, init)
    assert np.array_equal(a.values(), b.values())
    assert ((a.values() >= 0) & (a.values() <= 1)).all()
    c = prefill(0, VIEW, 8, "uniform(0,1)", 12, init)
    assert not np.array_equal(a.values(), c.values())


def test_prefill_of_an_agent_is_shared_by_observers():
    init = [0.1, 0.2, 0.3]
    w0 = prefill(0, NeighborView(0, (2,)), 6, "uniform(-1,1)", 5, init)
    w1 = prefill(1, NeighborView(1, (2,)), 6, "uniform(-1,1)", 5, init)
    assert np.array_equal(w0.neighbor_values, w1.neighbor_values)


@pytest.mark.parametrize("text", ["uniform(1,1)", "uniform(2,1)", "gauss", "uniform(a,b)"])
def test_bad_prefill_strategies(text):
    with pytest.raises(ValueError):
        PrefillStrategy.parse(text)


def test_horizon_must_be_at_least_two():
    with pytest.raises(ValueError):
        prefill(0, VIEW, 1, "hold", 0, [0, 0, 0])


def test_push_is_fifo():
    w = HistoryWindow(NeighborView(0, ()), 3, 10, np.array([[1.0, 2.0, 3.0]]))
    w.push(11, 4.0, [])
    assert list(w.own_values) == [2.0, 3.0, 4.0]
    assert list(w.times) == [9, 10, 11]


def test_push_rejects_gaps_and_missing_neighbors():
    w = prefill(0, VIEW, 3, "hold", 0, [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        w.push(2, 0.0, {1: 0.0, 2: 0.0})
    with pytest.raises(ValueError):
        w.push(0, 0.0, {1: 0.0, 2: 0.0})
    with pytest.raises(KeyError):
        w.push(1, 0.0, {1: 0.0})
    with pytest.raises(ValueError):
        w.push(1, 0.0, [0.0])


def test_value_at_boundaries():
    w = HistoryWindow(NeighborView(0, (4,)), 3, 10, np.array([[7.0, 8.0, 9.0], [1.0, 2.0, 3.0]]))
    assert w.value_at(SELF, 9) == 2.0
    assert w.value_at(0, 10) == 3.0
    assert w.value_at(4, 8) == 7.0
    with pytest.raises(IndexError):
        w.value_at(SELF, 7)
    with pytest.raises(IndexError):
        w.value_at(SELF, 11)
    with pytest.raises(KeyError):
        w.value_at(5, 9)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 3),
       st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=40), st.integers(0, 99))
def test_window_matches_unbounded_ledger(T, d, stream, seed):
    view = NeighborView(0, tuple(range(1, d + 1)))
    init = np.random.default_rng(seed).random(d + 1)
    w = prefill(0, view, T, "uniform(0,1)", seed, init)
    ledger = {(j, k): w.value_at(j, k) for j in view.inclusive for k in w.times}
    for step, v in enumerate(stream, start=1):
        nbr = {j: v + j for j in view.neighbors}
        w.push(step, v, nbr)
        ledger[(0, step)] = v
        ledger.update({(j, step): v + j for j in view.neighbors})
        assert w.values().shape == (d + 1, T)
        for j in view.inclusive:
            for k in w.times:
                assert w.value_at(j, k) == ledger[(j, k)]
    if len(stream) >= T:
        assert list(w.own_values) == stream[-T:]


def test_bank_windows_equal_per_agent_windows():
    g = build_paper_topology(6, 2, 0.5, 3)
    rng = np.random.default_rng(0)
    x0 = rng.random(g.n_agents)
    bank = HistoryBank.prefilled(x0, 4, "uniform(0,1)", 9)
    windows = {i: prefill(i, neighbor_view(g, i), 4, "uniform(0,1)", 9, x0) for i in range(g.n_agents)}
    for t in range(1, 12):
        x = rng.random(g.n_agents)
        bank.push(t, x)
        for i, w in windows.items():
            w.push(t, x[i], {j: x[j] for j in w.view.neighbors})
            assert np.array_equal(bank.window(w.view).values(), w.values())
