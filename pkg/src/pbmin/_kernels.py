"""Kernel selector: compiled accelerator if built, pure Python otherwise.

Set ``PBMIN_PURE=1`` to force the pure backend even when the compiled one is
available (used by the benchmark command and the backend-equality tests).
"""

import os

if os.environ.get("PBMIN_PURE") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

TransitionTable = _impl.TransitionTable
signature_refine = _impl.signature_refine
BACKEND = _impl.BACKEND


def kernel_backend():
    """Name of the active kernel implementation: 'compiled' or 'pure'."""
    return BACKEND
