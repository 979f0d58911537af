# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels (hot inner loops).

Same contract as the pure-numpy versions in ``_kernels_py``: in-place
operations on a 1-D complex128 amplitude array over packed basis indices.
"""


def rotation_pairs(double complex[::1] amps, long long ctrl_mask, long long ctrl_val,
                   long long target_mask, double c, double s):
    cdef Py_ssize_t i, n = amps.shape[0]
    cdef long long j
    cdef double complex a0, a1
    for i in range(n):
        if (i & ctrl_mask) == ctrl_val and (i & target_mask) == 0:
            j = i | target_mask
            a0 = amps[i]
            a1 = amps[j]
            amps[i] = c * a0 - s * a1
            amps[j] = s * a0 + c * a1


def xor_word_load(double complex[::1] amps, long long[::1] key_shifts,
                  long long[::1] key_widths, long long[::1] words, long long target_shift):
    cdef Py_ssize_t i, n = amps.shape[0]
    cdef Py_ssize_t k, nk = key_shifts.shape[0]
    cdef long long key, sig
    cdef double complex tmp
    for i in range(n):
        key = 0
        for k in range(nk):
            key = (key << key_widths[k]) | ((i >> key_shifts[k]) & ((1 << key_widths[k]) - 1))
        sig = i ^ (words[key] << target_shift)
        if sig > i:
            tmp = amps[i]
            amps[i] = amps[sig]
            amps[sig] = tmp


def phase_flip(double complex[::1] amps, long long bit_mask):
    cdef Py_ssize_t i, n = amps.shape[0]
    for i in range(n):
        if i & bit_mask:
            amps[i] = -amps[i]


def bit_flip(double complex[::1] amps, long long ctrl_mask, long long ctrl_val,
             long long target_mask):
    cdef Py_ssize_t i, n = amps.shape[0]
    cdef long long j
    cdef double complex tmp
    for i in range(n):
        if (i & ctrl_mask) == ctrl_val and (i & target_mask) == 0:
            j = i | target_mask
            tmp = amps[i]
            amps[i] = amps[j]
            amps[j] = tmp


def key_phase_flip(double complex[::1] amps, long long[::1] key_shifts,
                   long long[::1] key_widths, long long[::1] flags):
    cdef Py_ssize_t i, n = amps.shape[0]
    cdef Py_ssize_t k, nk = key_shifts.shape[0]
    cdef long long key
    for i in range(n):
        key = 0
        for k in range(nk):
            key = (key << key_widths[k]) | ((i >> key_shifts[k]) & ((1 << key_widths[k]) - 1))
        if flags[key]:
            amps[i] = -amps[i]
