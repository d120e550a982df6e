"""Steady-state kernel selection.

The compiled Cython kernel is preferred when built; the numpy fallback is
semantically equivalent (parity-tested) and always available. Set
Q3HEAT_PURE_PYTHON=1 to force the fallback, e.g. for benchmarking.

The two backends agree on populations and currents to solver round-off;
their condition-number estimators differ (infinity-norm vs singular-value
ratio), so the ill-conditioning flag may disagree right at the threshold.
"""

from __future__ import annotations

import os

from . import _kernel_py

_FORCE_PY = os.environ.get("Q3HEAT_PURE_PYTHON", "") not in ("", "0")

if _FORCE_PY:
    _impl = _kernel_py
    _BACKEND = "python"
else:
    try:
        from . import _kernel as _impl  # type: ignore[no-redef]

        _BACKEND = "cython"
    except ImportError:
        _impl = _kernel_py
        _BACKEND = "python"

solve_batch = _impl.solve_batch

STATUS_OK = _kernel_py.STATUS_OK
STATUS_SINGULAR = _kernel_py.STATUS_SINGULAR
STATUS_UNSTABLE = _kernel_py.STATUS_UNSTABLE
STATUS_NEGATIVE = _kernel_py.STATUS_NEGATIVE


def backend_name() -> str:
    """Which kernel the package selected at import: "cython" or "python"."""
    return _BACKEND


def available_backends() -> dict[str, object]:
    """Both kernels when importable, for parity tests and benchmarks."""
    found = {"python": _kernel_py.solve_batch}
    try:
        from . import _kernel

        found["cython"] = _kernel.solve_batch
    except ImportError:
        pass
    return found
