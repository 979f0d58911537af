"""Pure-numpy statevector kernels.

Fallback backend with the same signatures as the compiled extension in
``_kernels.pyx``; selected by :mod:`qramprep.kernels` when the extension is
unavailable or explicitly disabled.  All kernels mutate ``amps`` (a 1-D
complex128 array over packed basis indices) in place.
"""

from __future__ import annotations

import numpy as np

_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(n: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(n)
    if idx is None:
        idx = np.arange(n, dtype=np.int64)
        _INDEX_CACHE[n] = idx
    return idx


def _key_of(idx: np.ndarray, key_shifts, key_widths) -> np.ndarray:
    key = np.zeros_like(idx)
    for shift, width in zip(key_shifts, key_widths):
        key = (key << np.int64(width)) | ((idx >> np.int64(shift)) & np.int64((1 << width) - 1))
    return key


def rotation_pairs(amps, ctrl_mask, ctrl_val, target_mask, c, s):
    """Real rotation [[c,-s],[s,c]] on (target=0, target=1) amplitude pairs of
    every basis state matching the control mask."""
    idx = _indices(len(amps))
    i0 = idx[((idx & ctrl_mask) == ctrl_val) & ((idx & target_mask) == 0)]
    i1 = i0 | target_mask
    a0 = amps[i0]
    a1 = amps[i1]
    amps[i0] = c * a0 - s * a1
    amps[i1] = s * a0 + c * a1


def xor_word_load(amps, key_shifts, key_widths, words, target_shift):
    """Relabel |x> -> |x ^ (words[key(x)] << target_shift)>.

    The key bits are disjoint from the target bits, so the map is an
    involution; amplitudes are swapped along its 2-cycles.
    """
    idx = _indices(len(amps))
    key = _key_of(idx, key_shifts, key_widths)
    sig = idx ^ (np.asarray(words, dtype=np.int64)[key] << np.int64(target_shift))
    m = sig > idx
    lo = idx[m]
    hi = sig[m]
    tmp = amps[lo].copy()
    amps[lo] = amps[hi]
    amps[hi] = tmp


def phase_flip(amps, bit_mask):
    """Z action: negate amplitudes where the masked bit is set."""
    idx = _indices(len(amps))
    amps[(idx & bit_mask) != 0] *= -1.0


def bit_flip(amps, ctrl_mask, ctrl_val, target_mask):
    """X / controlled-X: swap target-bit pairs on control-matching states."""
    idx = _indices(len(amps))
    i0 = idx[((idx & ctrl_mask) == ctrl_val) & ((idx & target_mask) == 0)]
    i1 = i0 | target_mask
    tmp = amps[i0].copy()
    amps[i0] = amps[i1]
    amps[i1] = tmp


def key_phase_flip(amps, key_shifts, key_widths, flags):
    """Negate amplitudes whose key selects a set flag (diagonal sign load)."""
    idx = _indices(len(amps))
    key = _key_of(idx, key_shifts, key_widths)
    amps[np.asarray(flags, dtype=np.int64)[key] != 0] *= -1.0
