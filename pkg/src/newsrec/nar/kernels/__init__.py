"""Kernel backend selection: compiled extension when built, numpy otherwise.

The environment variable NEWSREC_BACKEND ("compiled" or "numpy") overrides
the default choice; benchmarks and parity tests use `get_backend` directly.
"""

from __future__ import annotations

import os

from . import reference

try:
    from . import _gru_cy  # type: ignore[attr-defined]

    _COMPILED = _gru_cy
except ImportError:  # extension not built; the numpy fallback is complete
    _COMPILED = None

BACKENDS: dict[str, object] = {"numpy": reference}
if _COMPILED is not None:
    BACKENDS["compiled"] = _COMPILED


def available_backends() -> list[str]:
    return sorted(BACKENDS)


def get_backend(name: str | None = None):
    """Resolve a kernel backend module by name, env override, or default
    (compiled when available)."""
    if name is None:
        name = os.environ.get("NEWSREC_BACKEND", "")
    if name:
        if name not in BACKENDS:
            raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}")
        return BACKENDS[name]
    return BACKENDS.get("compiled", reference)
