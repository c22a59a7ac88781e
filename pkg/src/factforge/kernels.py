"""Kernel backend selection.

Imports the compiled extension when available, else the pure-Python
fallback. ``FACTFORGE_KERNELS=py`` forces the fallback; ``=c`` makes a
missing extension a hard error. Both backends produce identical outputs
for identical inputs, so the choice never changes corpus bytes.
"""

from __future__ import annotations

import os

_requested = os.environ.get("FACTFORGE_KERNELS", "").strip().lower()

if _requested == "py":
    from . import _kernels_py as _impl
elif _requested == "c":
    from . import _speedups as _impl  # type: ignore[no-redef]
elif _requested == "":
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as _impl
else:
    raise RuntimeError(f"FACTFORGE_KERNELS must be 'c' or 'py', got {_requested!r}")

BACKEND = "c" if _impl.__name__.endswith("_speedups") else "py"

walk_steps = _impl.walk_steps
bernoulli_select = _impl.bernoulli_select
