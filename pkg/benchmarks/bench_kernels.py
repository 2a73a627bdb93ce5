"""Compare the compiled and pure-Python round kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times one ``hdd_round`` call on the default 13-agent topology and on a
larger dense graph, then a full 200-step run per backend.
"""
import argparse
import timeit

import numpy as np

from hddconsensus import kernels
from hddconsensus.graph import build_paper_topology
from hddconsensus.sim import SimConfig, run
from hddconsensus.trust import ConfidenceSchedule, discount_powers


def round_inputs(n_coop, n_noncoop, edge_prob, horizon, seed=0):
    rng = np.random.default_rng(seed)
    g = build_paper_topology(n_coop, n_noncoop, edge_prob, seed)
    indptr, indices = g.csr()
    coop = np.array(sorted(g.cooperative_set), dtype=np.int64)
    eps = np.zeros((g.n_agents, horizon))
    powers = np.zeros((g.n_agents, horizon))
    for i in coop:
        eps[i] = ConfidenceSchedule.sorted_uniform(horizon, 0.01, 1.0, rng).bounds(0, horizon)
        powers[i] = discount_powers(0.5, horizon)
    return rng.random((g.n_agents, horizon)), indptr, indices, coop, eps, powers


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    cases = {"13 agents, T=15": (10, 3, 0.4, 15), "200 agents, T=30": (190, 10, 0.3, 30)}
    print(f"{'case':<22}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for name, spec in cases.items():
        inputs = round_inputs(*spec)
        times = [best(lambda k=kernels.get_kernel(b): k(*inputs), args.repeat, 200) for b in backends]
        line = f"{name:<22}" + "".join(f"{t * 1e6:>11.1f} us" for t in times)
        print(line + (f"{times[-1] / times[0]:>9.1f}x" if len(times) > 1 else ""))
    cfg = SimConfig(seed=1)
    times = [best(lambda b=b: run(cfg, backend=b), args.repeat, 3) for b in backends]
    line = f"{'full run, 200 steps':<22}" + "".join(f"{t * 1e3:>11.2f} ms" for t in times)
    print(line + (f"{times[-1] / times[0]:>9.1f}x" if len(times) > 1 else ""))


if __name__ == "__main__":
    main()
