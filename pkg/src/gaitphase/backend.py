"""Kernel backend selection.

The compiled Cython extension is preferred; the pure-NumPy fallback is
used when it is missing or when ``GAITPHASE_PURE=1`` is set. Both expose
the same functions with the same semantics.
"""

import os

if os.environ.get("GAITPHASE_PURE") == "1":
    from gaitphase import _kernels_py as _impl
else:
    try:
        from gaitphase import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from gaitphase import _kernels_py as _impl

BACKEND = _impl.BACKEND
window_features = _impl.window_features
grow_tree = _impl.grow_tree
predict_tree = _impl.predict_tree
smo_solve = _impl.smo_solve
