"""Hot-loop kernel backends.

Two interchangeable implementations of the simulation kernels exist:

* ``numba``: compiled per-trajectory event loops (the default when
  numba imports cleanly);
* ``numpy``: a pure-numpy lockstep implementation used as a fallback
  and as an independent reference in the test suite.

Selection: the LEVYWALKS_BACKEND environment variable ("numba" or
"numpy") at import time, or set_backend() at runtime.  Both backends
consume the same counter-based streams draw for draw, so switching
backends reselects code paths, not random numbers.
"""

import os
import warnings

_VALID = ("numba", "numpy")
_active = None
_modules = {}


def _load(name):
    if name not in _modules:
        if name == "numba":
            from . import _numba_impl as mod
        else:
            from . import _numpy_impl as mod
        _modules[name] = mod
    return _modules[name]


def _default_backend():
    env = os.environ.get("LEVYWALKS_BACKEND", "").strip().lower()
    if env:
        if env not in _VALID:
            raise ValueError(
                f"LEVYWALKS_BACKEND must be one of {_VALID}, got {env!r}")
        if env == "numba":
            try:
                import numba  # noqa: F401
            except ImportError:
                warnings.warn("LEVYWALKS_BACKEND=numba but numba is not "
                              "importable; falling back to numpy")
                return "numpy"
        return env
    try:
        import numba  # noqa: F401
        return "numba"
    except ImportError:
        warnings.warn("numba not importable; using the pure-numpy backend")
        return "numpy"


def active_name() -> str:
    global _active
    if _active is None:
        _active = _default_backend()
    return _active


def set_backend(name: str) -> str:
    """Switch kernel backend at runtime; returns the previous name."""
    global _active
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    prev = active_name()
    if name == "numba":
        import numba  # noqa: F401  raises if unavailable
    _active = name
    return prev


def get():
    """The active kernel module."""
    return _load(active_name())


def backend(name: str):
    """A specific backend module regardless of the active selection."""
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    return _load(name)
