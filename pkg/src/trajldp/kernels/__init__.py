"""Hot numerical kernels with a compiled core and a numpy fallback.

The Cython extension ``_ckernels`` is used when it was built; otherwise the
numpy versions in ``_py`` are bound. ``use_backend`` switches explicitly, which
the benchmark and the parity tests rely on.
"""
from . import _py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_NAMES = (
    "haversine_row",
    "haversine_matrix",
    "bearing_row",
    "bearing_matrix",
    "sector_of",
    "em_pick",
    "argmin_pair_sum",
    "subset_max",
)

BACKEND = ""


def available_backends():
    return ("cython", "python") if _ckernels is not None else ("python",)


def use_backend(name):
    """Bind the module-level kernel names to ``"cython"`` or ``"python"``."""
    global BACKEND
    if name == "cython":
        if _ckernels is None:
            raise ImportError("Cython kernels are not built; reinstall with a C compiler")
        mod = _ckernels
    elif name == "python":
        mod = _py
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    g = globals()
    for n in _NAMES:
        g[n] = getattr(mod, n)
    BACKEND = name


def get(name, backend):
    """Fetch one kernel from a specific backend without rebinding."""
    mod = _ckernels if backend == "cython" else _py
    if mod is None:
        raise ImportError("Cython kernels are not built")
    return getattr(mod, name)


use_backend("cython" if _ckernels is not None else "python")
