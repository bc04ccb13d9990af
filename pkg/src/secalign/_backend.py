"""Import-time selection of the alternation backend.

The compiled extension (``secalign._kernels``) is preferred when present;
otherwise the pure-numpy fallback is used. ``SECALIGN_BACKEND`` overrides
the choice: ``ext`` demands the extension (ImportError if missing),
``python`` forces the fallback, anything else (or unset) means auto.
"""

from __future__ import annotations

import os

_choice = os.environ.get("SECALIGN_BACKEND", "auto").lower()

if _choice == "python":
    from . import _kernels_py as _impl
elif _choice == "ext":
    from . import _kernels as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as _impl

lm_alternate = _impl.lm_alternate
meb_alternate = _impl.meb_alternate


def backend_name():
    """Either ``"ext"`` (compiled) or ``"python"`` (numpy fallback)."""
    return _impl.BACKEND
