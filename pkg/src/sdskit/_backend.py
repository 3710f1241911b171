"""Pick the compiled kernels when available, else the numpy fallback."""

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

DEFAULT = "compiled" if _compiled is not None else "python"


def get(name=None):
    """Return the kernel module for ``name`` (default: best available)."""
    name = DEFAULT if name is None else name
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}"
        ) from None
