"""Backend selection for the hot simulation loops.

Set ``LEVY_ERGODICITY_BACKEND=numpy`` to force the vectorised numpy path;
the default is ``numba`` whenever numba imports cleanly.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # skip probing an outdated system TBB first
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

ENV_VAR = "LEVY_ERGODICITY_BACKEND"
BACKENDS = ("numba", "numpy")


def default_backend():
    choice = os.environ.get(ENV_VAR, "numba").strip().lower()
    if choice not in BACKENDS:
        raise ValueError(f"{ENV_VAR} must be one of {BACKENDS}, got {choice!r}")
    if choice == "numba" and not HAVE_NUMBA:
        return "numpy"
    return choice


def resolve_backend(backend=None):
    if backend is None:
        return default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def set_threads(n):
    """Limit numba's worker pool; a no-op on the numpy path."""
    if n is None or not HAVE_NUMBA:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
