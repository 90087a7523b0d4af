"""Compute-backend selection.

The package ships a compiled Cython core (fwf._ckernels) for the hot
Gaussian-kernel loops and a numpy twin (fwf._pykernels). The compiled
core is used when importable; set FWF_BACKEND=python to force the
fallback or FWF_BACKEND=compiled to fail loudly if the extension is
missing. ``benchmarks/backend_bench.py`` compares the two lanes.
"""

from __future__ import annotations

import importlib
import os

_NAMES = (
    "autocorr_sums",
    "crosscorr_sums",
    "mean_kernel_sum",
    "local_index_search",
    "weighted_window_eval",
    "functional_eval",
    "fp_iterate",
    "kernel_sum_eval",
    "kernel_sum_eval_batch",
    "klms_train",
)


def load_backend(name: str):
    """Import a specific lane by name ('compiled' or 'python')."""
    if name == "compiled":
        return importlib.import_module("fwf._ckernels")
    if name == "python":
        return importlib.import_module("fwf._pykernels")
    raise ValueError(f"unknown backend {name!r}")


def _select():
    requested = os.environ.get("FWF_BACKEND", "auto").strip().lower()
    if requested in ("python", "numpy", "pure"):
        return load_backend("python"), "python"
    if requested in ("compiled", "c", "cython"):
        return load_backend("compiled"), "compiled"
    if requested in ("auto", ""):
        try:
            return load_backend("compiled"), "compiled"
        except ImportError:
            return load_backend("python"), "python"
    raise ValueError(
        f"FWF_BACKEND={requested!r} not recognized (use auto, compiled, or python)")


_impl, BACKEND_NAME = _select()

autocorr_sums = _impl.autocorr_sums
crosscorr_sums = _impl.crosscorr_sums
mean_kernel_sum = _impl.mean_kernel_sum
local_index_search = _impl.local_index_search
weighted_window_eval = _impl.weighted_window_eval
functional_eval = _impl.functional_eval
fp_iterate = _impl.fp_iterate
kernel_sum_eval = _impl.kernel_sum_eval
kernel_sum_eval_batch = _impl.kernel_sum_eval_batch
klms_train = _impl.klms_train


def backend_name() -> str:
    """Name of the active lane ('compiled' or 'python')."""
    return BACKEND_NAME
