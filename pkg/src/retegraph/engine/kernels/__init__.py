"""Propagation kernels with a compiled core and a pure-Python fallback.

At import time this package selects the Cython-compiled implementation when
available, unless ``RETEGRAPH_PURE=1`` forces the fallback.  Both backends
expose the same functions; ``BACKEND`` names the active one.
"""

import os

if os.environ.get("RETEGRAPH_PURE"):
    from . import _impl_py as _impl
else:
    try:
        from . import _impl_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _impl_py as _impl

BACKEND = _impl.BACKEND

apply_items = _impl.apply_items
apply_items_transitions = _impl.apply_items_transitions
update_index = _impl.update_index
key_totals_update = _impl.key_totals_update
join_probe = _impl.join_probe
slice_rows = _impl.slice_rows

__all__ = [
    "BACKEND",
    "apply_items",
    "apply_items_transitions",
    "update_index",
    "key_totals_update",
    "join_probe",
    "slice_rows",
]
