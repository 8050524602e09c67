"""Runtime selection between the compiled stepper and the numpy fallback.

The compiled extension is preferred when importable; set the environment
variable ``STIRAPBERRY_BACKEND`` to ``compiled`` or ``python`` to force a
choice (``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_ENV_VAR = "STIRAPBERRY_BACKEND"


def get_kernel(name: str | None = None):
    """Return the kernel module for ``name`` (auto/compiled/python)."""
    if name is None:
        name = os.environ.get(_ENV_VAR, "auto").lower()
    if name in ("auto", ""):
        return _compiled if _compiled is not None else _kernels_py
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError(
                "compiled kernel requested but the stirapberry._kernels "
                "extension is not built; install with `pip install -e .`"
            )
        return _compiled
    raise ValueError(f"unknown backend {name!r}; expected auto, compiled, or python")


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _compiled is not None else ("python",)


def backend_name(name: str | None = None) -> str:
    return get_kernel(name).BACKEND_NAME
