"""Kernel backend selection.

Imports the compiled extension when it was built, otherwise the numpy
fallback.  Set ``QRAMPREP_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and by tests that exercise both backends).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("QRAMPREP_PURE_PYTHON"):
    impl = _kernels_py
else:
    try:
        from . import _kernels as impl  # type: ignore[attr-defined]
    except ImportError:
        impl = _kernels_py

BACKEND = "pure-python" if impl is _kernels_py else "compiled"

rotation_pairs = impl.rotation_pairs
xor_word_load = impl.xor_word_load
phase_flip = impl.phase_flip
bit_flip = impl.bit_flip
key_phase_flip = impl.key_phase_flip
