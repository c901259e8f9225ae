"""Backend selection for the QUBO kernels.

The compiled extension is used when it imports; set ``QODELAB_PURE_PYTHON=1``
to force the numpy fallback.  Both backends expose ``exact_minimize`` and
``anneal`` with identical semantics.
"""
from __future__ import annotations

import importlib
import os
from types import ModuleType

from . import _pykernels


def _load_compiled() -> ModuleType | None:
    if os.environ.get("QODELAB_PURE_PYTHON", "").strip() not in ("", "0"):
        return None
    try:
        return importlib.import_module("qodelab._ckernels")
    except ImportError:
        return None


_compiled = _load_compiled()
BACKEND = "compiled" if _compiled is not None else "python"
_active: ModuleType = _compiled if _compiled is not None else _pykernels


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def get_backend(name: str | None = None) -> ModuleType:
    if name is None:
        return _active
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
