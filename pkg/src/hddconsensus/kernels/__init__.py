"""Per-round HDD kernel with a compiled core and a pure-Python fallback.

``hdd_round(hist, indptr, indices, agents, eps, powers)`` evaluates one
synchronous round for the listed agents:

* ``hist``: ``(N, T)`` states, oldest column first.
* ``indptr``, ``indices``: CSR neighbor lists, each ascending.
* ``agents``: ids of the agents running the protocol.
* ``eps``, ``powers``: ``(N, T)`` ball radii and discount powers per agent.

It returns ``(means, next_states)``: the trust mean for every CSR entry of the
listed agents (zero elsewhere) and each listed agent's next state.

The compiled backend is used when importable. Set ``HDDCONSENSUS_BACKEND``
to ``python`` to force the fallback.
"""

import importlib
import os

from . import _fallback


def _load_core():
    try:
        return importlib.import_module("._core", __name__)
    except ImportError:
        return None


BACKEND = "python"
hdd_round = _fallback.hdd_round

if os.environ.get("HDDCONSENSUS_BACKEND", "").lower() != "python":
    _compiled = _load_core()
    if _compiled is not None:
        BACKEND = "cython"
        hdd_round = _compiled.hdd_round


def get_kernel(backend: str | None = None):
    """Return ``hdd_round`` for ``backend`` (``"cython"``, ``"python"``, or the active one)."""
    if backend is None:
        return hdd_round
    if backend == "python":
        return _fallback.hdd_round
    if backend == "cython":
        core = _load_core()
        if core is None:
            raise RuntimeError("compiled kernel is not built")
        return core.hdd_round
    raise ValueError(f"unknown backend {backend!r}")


def kernel_name(fn) -> str:
    return "python" if fn is _fallback.hdd_round else "cython"


def available_backends() -> list:
    out = ["python"]
    try:
        get_kernel("cython")
    except RuntimeError:
        pass
    else:
        out.insert(0, "cython")
    return out
