"""Materialization kernels: compiled extension when built, pure Python otherwise.

The compiled module is optional; import failure silently selects the pure
fallback. Both engines implement the same contract:
``run(prep, start, end) -> (cell keys, event indices)``.
"""

from occube._hot import pure as _pure

try:
    from occube._hot import compiled as _compiled

    HAVE_COMPILED = True
except ImportError:
    _compiled = None
    HAVE_COMPILED = False


def get_engine(name: str):
    if name == "c":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel not available")
        return _compiled.run
    return _pure.run
