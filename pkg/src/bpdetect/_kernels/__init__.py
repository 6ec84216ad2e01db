"""Hot kernels for tree training.

The compiled extension is used when it was built; otherwise the NumPy
implementation is imported. Set ``BPDETECT_PURE_PYTHON=1`` to force the
fallback.
"""
import os

if os.environ.get("BPDETECT_PURE_PYTHON"):
    from ._tree_py import apply_tree, best_split

    BACKEND = "python"
else:
    try:
        from ._tree_c import apply_tree, best_split

        BACKEND = "cython"
    except ImportError:
        from ._tree_py import apply_tree, best_split

        BACKEND = "python"

__all__ = ["BACKEND", "apply_tree", "best_split"]
