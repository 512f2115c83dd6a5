"""Backend selection for the hot kernels.

The compiled Cython extension is preferred when importable; the
pure-Python twin is the fallback. Set CTXCHOICE_PURE=1 before import to
force the fallback (used by the benchmark and the backend-equivalence
tests). Both backends implement the same three functions with
bit-identical float results.
"""

from __future__ import annotations

import os

if os.environ.get("CTXCHOICE_PURE") == "1":
    from ._kernels import pure as _impl
else:
    try:
        from ._kernels import _ckern as _impl  # type: ignore[attr-defined]
    except ImportError:
        from ._kernels import pure as _impl

BACKEND: str = _impl.BACKEND
space_utilities = _impl.space_utilities
best_index = _impl.best_index
minimal_tipping_masks = _impl.minimal_tipping_masks
