import numpy as np
import pytest

from hddconsensus.agents import BehaviorModel, adversary_step, cooperative_step
from hddconsensus.graph import NeighborView
from hddconsensus.history import HistoryWindow
from hddconsensus.sim import SimConfig, run
from hddconsensus.trust import ConfidenceSchedule, DiscountSchedule


def test_stubborn_is_constant(rng):
    m = BehaviorModel("stubborn", value=0.3)
    assert {adversary_step(m, 0.9, {1: 0.1}, t, rng) for t in range(20)} == {0.3}


def test_random_stays_in_interval(rng):
    m = BehaviorModel("random", low=0.0, high=1.0)
    draws = [adversary_step(m, 0.5, {}, t, rng) for t in range(500)]
    assert 0.0 <= min(draws) and max(draws) <= 1.0
    assert len(set(draws)) == 500


def test_stealth_full_gain_hits_visible_mean(rng):
    m = BehaviorModel("stealth", gain=1.0, betrayal_time=50)
    visible = {0: 0.2, 1: 0.4, 7: 5.0}
    assert adversary_step(m, 0.9, visible, 10, rng, cooperative={0, 1}) == pytest.approx(0.3)
    half = BehaviorModel("stealth", gain=0.5)
    assert adversary_step(half, 1.0, {0: 0.0}, 3, rng) == pytest.approx(0.5)


def test_stealth_betrays(rng):
    m = BehaviorModel("stealth", low=10.0, high=11.0, betrayal_time=5)
    assert adversary_step(m, 0.0, {0: 0.0}, 4, rng) == 0.0
    assert 10.0 <= adversary_step(m, 0.0, {0: 0.0}, 5, rng) <= 11.0


def test_adversary_step_rejects_cooperative(rng):
    with pytest.raises(ValueError):
        adversary_step(BehaviorModel("cooperative"), 0.0, {}, 0, rng)


@pytest.mark.parametrize("kw", [dict(kind="evil"), dict(kind="random", low=1, high=0),
                                dict(kind="stealth", gain=0.0)])
def test_bad_models(kw):
    with pytest.raises(ValueError):
        BehaviorModel(**kw)


def test_adversary_streams_are_reproducible():
    m = BehaviorModel("random")
    a = [adversary_step(m, 0, {}, t, np.random.default_rng(4)) for t in range(3)]
    b = [adversary_step(m, 0, {}, t, np.random.default_rng(4)) for t in range(3)]
    assert a == b


def test_chained_hand_example():
    view = NeighborView(0, (1,))
    w = HistoryWindow(view, 3, 20, np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]))
    conf = ConfidenceSchedule("sorted-uniform", (3.0, 2.0, 1.5))
    x, row, est = cooperative_step(w, (conf, DiscountSchedule(0.5)), {0: 0.0, 1: 1.0}, view, 20)
    assert est.mean[0] == pytest.approx(0.583333, abs=1e-6)
    assert row == pytest.approx([0.368421, 0.631579], abs=1e-6)
    assert x == pytest.approx(0.368421, abs=1e-6)
    # exact: mu = 7/12, w = 7/19
    assert x == pytest.approx(7 / 19, abs=1e-15)


def test_isolated_by_tiny_balls():
    view = NeighborView(0, (1, 2))
    w = HistoryWindow(view, 3, 4, np.array([[5.0] * 3, [-5.0] * 3, [0.0] * 3]))
    conf = ConfidenceSchedule("sorted-uniform", (0.3, 0.2, 0.1))
    x, row, _ = cooperative_step(w, (conf, DiscountSchedule(0.9)), [0.0, 5.0, -5.0], view, 4)
    assert x == 0.0 and list(row) == [0.0, 0.0, 1.0]


def test_identical_history_is_a_fixed_point():
    view = NeighborView(0, (1, 2))
    w = HistoryWindow(view, 4, 4, np.full((3, 4), 0.37))
    conf = ConfidenceSchedule("sorted-uniform", (0.4, 0.3, 0.2, 0.1))
    x, _, _ = cooperative_step(w, (conf, DiscountSchedule(0.5)), [0.37] * 3, view, 4)
    assert x == pytest.approx(0.37, abs=1e-15)


def test_cooperative_step_checks_view():
    w = HistoryWindow(NeighborView(0, (1,)), 2, 0, np.zeros((2, 2)))
    conf = ConfidenceSchedule("sorted-uniform", (0.2, 0.1))
    with pytest.raises(ValueError):
        cooperative_step(w, (conf, DiscountSchedule(0.5)), [0, 0], NeighborView(1, (0,)), 0)


def test_behavior_partition_in_runs():
    log = run(SimConfig(n_coop=5, n_noncoop=2, steps=5, seed=3,
                        behaviors=("stubborn", "random")))
    assert set(log.final_weights().rows) == {0, 1, 2, 3, 4}
    assert set(log.trust[5]) == {0, 1, 2, 3, 4}
    # the stubborn agent reports its constant from t=1 on
    assert (log.states[1:, 5] == 0.5).all()


def test_stealth_tracks_like_uniform_cooperative_averaging():
    cfg = SimConfig(n_coop=6, n_noncoop=1, edge_prob=0.5, steps=40, seed=8,
                    behaviors=(BehaviorModel("stealth", gain=1.0),))
    log = run(cfg)
    coop = sorted(log.graph.cooperative_set)
    # reference rule: the agent's next state is the plain mean of its cooperative neighbors
    expected = log.states[:-1, coop].mean(axis=1)
    assert np.allclose(log.states[1:, 6], expected, rtol=0, atol=1e-15)
