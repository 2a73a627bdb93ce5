import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hddconsensus.graph import NeighborView  # noqa: E402
from hddconsensus.history import HistoryWindow  # noqa: E402
from hddconsensus.trust import ConfidenceSchedule  # noqa: E402

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def random_instance(rng, max_degree, max_horizon, min_horizon=2, t=None):
    """Random window plus sorted-uniform schedule and discount factor."""
    d = int(rng.integers(0, max_degree + 1))
    T = int(rng.integers(min_horizon, max_horizon + 1))
    t = int(rng.integers(0, 50)) if t is None else t
    view = NeighborView(0, tuple(range(1, d + 1)))
    # quantized values produce exact ties and boundary hits
    vals = rng.integers(0, 9, size=(d + 1, T)) / 8.0 if rng.random() < 0.3 else rng.random((d + 1, T))
    w = HistoryWindow(view, T, t, vals)
    eps = np.sort(rng.uniform(0.01, 1.0, size=T))[::-1]
    if rng.random() < 0.3:
        eps = (np.arange(T, 0, -1) / 8.0)
    conf = ConfidenceSchedule("sorted-uniform", tuple(float(e) for e in eps))
    nu = float(rng.uniform(0.01, 0.99))
    return w, conf, nu


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
