"""Dense statevector simulation over named qubit registers.

The gate set is exactly what the preparation pipeline needs: rotations
controlled on register bit-prefixes, XOR-style classical word loads keyed on
register prefixes, and plain X / CX / Z.  Basis indices pack the registers in
declaration order, first register most significant, each register's own bits
most-significant-first, so the index reads like the concatenated bit groups.

Hot loops live in :mod:`qramprep.kernels` (compiled extension with a numpy
fallback); this module owns layout arithmetic, contracts and debug checks.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import kernels
from .core import BitPath, Tolerance, as_path

ControlSpec = "Sequence[tuple[str, BitPath | str]] | tuple[str, BitPath | str] | None"


class RegisterLayout:
    """Ordered named registers with fixed widths, packed into one basis index."""

    def __init__(self, regs: Sequence[tuple[str, int]], cap: int = 24):
        if not regs:
            raise ValueError("layout needs at least one register")
        names = [name for name, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"register names must be unique, got {names}")
        for name, width in regs:
            if width < 1:
                raise ValueError(f"register {name!r} must have width >= 1")
        self.regs = tuple((name, int(width)) for name, width in regs)
        self.total_qubits = sum(w for _, w in self.regs)
        if self.total_qubits > cap:
            raise ValueError(f"layout needs {self.total_qubits} qubits, cap is {cap}")
        self._width = dict(self.regs)
        self._offset = {}
        self._index_array = None
        off = self.total_qubits
        for name, width in self.regs:
            off -= width
            self._offset[name] = off

    @property
    def dim(self) -> int:
        return 1 << self.total_qubits

    @property
    def index_array(self) -> np.ndarray:
        """Cached arange(dim) for mask arithmetic in checks and summaries."""
        idx = self._index_array
        if idx is None:
            idx = self._index_array = np.arange(self.dim, dtype=np.int64)
        return idx

    def width(self, name: str) -> int:
        try:
            return self._width[name]
        except KeyError:
            raise KeyError(f"no register named {name!r}") from None

    def offset(self, name: str) -> int:
        """Shift (from the least significant end) of the register's low bit."""
        self.width(name)
        return self._offset[name]

    def bit_shift(self, name: str, bit: int) -> int:
        """Global shift of a register's bit, counting the register's bits
        most-significant-first (bit 0 is the register's top bit)."""
        w = self.width(name)
        if not 0 <= bit < w:
            raise ValueError(f"bit {bit} out of range for register {name!r} (width {w})")
        return self._offset[name] + w - 1 - bit

    def prefix_field(self, name: str, plen: int) -> tuple[int, int]:
        """(shift, width) of the top ``plen`` bits of a register."""
        w = self.width(name)
        if not 0 <= plen <= w:
            raise ValueError(f"prefix length {plen} out of range for {name!r}")
        return self._offset[name] + w - plen, plen

    def pack(self, values: dict[str, int]) -> int:
        idx = 0
        for name, width in self.regs:
            v = values.get(name, 0)
            if not 0 <= v < (1 << width):
                raise ValueError(f"value {v} overflows register {name!r} (width {width})")
            idx |= v << self._offset[name]
        return idx

    def extract(self, index: int, name: str) -> int:
        w = self.width(name)
        return (index >> self._offset[name]) & ((1 << w) - 1)

    def format_index(self, index: int) -> str:
        groups = []
        for name, width in self.regs:
            groups.append(format(self.extract(index, name), f"0{width}b"))
        return "|".join(groups)


class StateVector:
    """2**m complex amplitudes over a register layout.

    ``check=True`` verifies the unit norm after every gate and that rotation
    targets sit in |0> on matched branches (before a forward rotation, after
    an adjoint one); turn it off for benchmarking only.
    """

    def __init__(self, layout: RegisterLayout, amplitudes: np.ndarray | None = None,
                 tol: Tolerance = Tolerance(), check: bool = True):
        self.layout = layout
        self.tol = tol
        self.check = check
        if amplitudes is None:
            amplitudes = np.zeros(layout.dim, dtype=np.complex128)
        else:
            amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (layout.dim,):
                raise ValueError(f"need {layout.dim} amplitudes, got {amplitudes.shape}")
        self.amps = amplitudes

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amps.copy(), self.tol, self.check)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def _check_norm(self):
        if self.check:
            n = self.norm()
            if abs(n - 1.0) > self.tol.eps_norm:
                raise RuntimeError(f"statevector norm drifted to {n}")

    # -- control / qubit resolution -------------------------------------

    def _ctrl_mask_val(self, controls) -> tuple[int, int]:
        if controls is None:
            return 0, 0
        if isinstance(controls, tuple) and len(controls) == 2 and isinstance(controls[0], str):
            controls = [controls]
        mask = 0
        val = 0
        for reg, path in controls:
            p = as_path(path)
            shift, plen = self.layout.prefix_field(reg, p.depth)
            field = ((1 << plen) - 1) << shift
            if mask & field:
                raise ValueError(f"overlapping controls on register {reg!r}")
            mask |= field
            val |= p.value << shift
        return mask, val

    def _qubit_mask(self, qubit: tuple[str, int]) -> int:
        reg, bit = qubit
        return 1 << self.layout.bit_shift(reg, bit)

    # -- gates -----------------------------------------------------------

    def controlled_rotation(self, controls, target: tuple[str, int], p: float,
                            adjoint: bool = False) -> None:
        """On control-matching branches, take the target qubit from |0> to
        sqrt(p)|0> + sqrt(1-p)|1>; p slightly outside [0,1] is clamped."""
        if p < -self.tol.eps_amp or p > 1.0 + self.tol.eps_amp:
            raise ValueError(f"rotation probability {p} outside [0,1]")
        p = min(1.0, max(0.0, p))
        cmask, cval = self._ctrl_mask_val(controls)
        tmask = self._qubit_mask(target)
        if cmask & tmask:
            raise ValueError("rotation target overlaps its controls")
        if self.check and not adjoint:
            self._require_target_zero(cmask, cval, tmask, target, "before rotation")
        c = math.sqrt(p)
        s = math.sqrt(1.0 - p)
        kernels.rotation_pairs(self.amps, cmask, cval, tmask, c, -s if adjoint else s)
        if self.check and adjoint:
            # inverting the right rotation must return the target to |0>
            self._require_target_zero(cmask, cval, tmask, target, "after adjoint rotation")
        self._check_norm()

    def _require_target_zero(self, cmask: int, cval: int, tmask: int,
                             target: tuple[str, int], when: str) -> None:
        idx = self.layout.index_array
        bad = ((idx & cmask) == cval) & ((idx & tmask) != 0)
        resid = float(np.max(np.abs(self.amps[bad]))) if bad.any() else 0.0
        if resid > self.tol.eps_amp:
            raise RuntimeError(
                f"rotation target {target} not in |0> on matched branches "
                f"{when} (residual {resid})")

    def xor_load(self, key: Sequence[tuple[str, int]], words, target: str) -> None:
        """XOR a classical word into the target register on every basis branch.

        ``key`` lists (register, prefix_len) pairs; ``words`` is indexed by the
        concatenated prefix values and must have 2**total_key_bits entries.
        Self-inverse: loading the same table twice is the identity.
        """
        tgt_off = self.layout.offset(target)
        tgt_width = self.layout.width(target)
        shifts = []
        widths = []
        total = 0
        for reg, plen in key:
            if reg == target:
                raise ValueError("xor_load key may not include the target register")
            shift, w = self.layout.prefix_field(reg, plen)
            shifts.append(shift)
            widths.append(w)
            total += w
        words = np.ascontiguousarray(words, dtype=np.int64)
        if words.shape != (1 << total,):
            raise ValueError(f"need {1 << total} words for {total} key bits, got {words.shape}")
        if words.size and (words.min() < 0 or int(words.max()) >= (1 << tgt_width)):
            raise ValueError(f"word exceeds register {target!r} width {tgt_width}")
        kernels.xor_word_load(
            self.amps,
            np.asarray(shifts, dtype=np.int64),
            np.asarray(widths, dtype=np.int64),
            words,
            tgt_off,
        )
        self._check_norm()

    def z_on(self, qubit: tuple[str, int]) -> None:
        kernels.phase_flip(self.amps, self._qubit_mask(qubit))
        self._check_norm()

    def x_on(self, qubit: tuple[str, int]) -> None:
        kernels.bit_flip(self.amps, 0, 0, self._qubit_mask(qubit))
        self._check_norm()

    def cx_on(self, control: tuple[str, int], target: tuple[str, int]) -> None:
        cmask = self._qubit_mask(control)
        tmask = self._qubit_mask(target)
        if cmask == tmask:
            raise ValueError("CX control and target must differ")
        kernels.bit_flip(self.amps, cmask, cmask, tmask)
        self._check_norm()

    def key_sign_flip(self, key: Sequence[tuple[str, int]], flags) -> None:
        """Negate amplitudes whose key bits select a set flag (a classically
        controlled pi-phase, keyed like xor_load)."""
        shifts = []
        widths = []
        total = 0
        for reg, plen in key:
            shift, w = self.layout.prefix_field(reg, plen)
            shifts.append(shift)
            widths.append(w)
            total += w
        flags = np.ascontiguousarray(flags, dtype=np.int64)
        if flags.shape != (1 << total,):
            raise ValueError(f"need {1 << total} flags for {total} key bits")
        kernels.key_phase_flip(
            self.amps,
            np.asarray(shifts, dtype=np.int64),
            np.asarray(widths, dtype=np.int64),
            flags,
        )
        self._check_norm()

    # -- inspection --------------------------------------------------------

    def fidelity(self, target) -> float:
        """Squared magnitude of the inner product with ``target``."""
        target = np.asarray(target, dtype=np.complex128)
        if target.shape != self.amps.shape:
            raise ValueError(f"dimension mismatch: {target.shape} vs {self.amps.shape}")
        return float(abs(np.vdot(target, self.amps)) ** 2)

    def register_is_disentangled_zero(self, name: str) -> bool:
        """True iff every amplitude above eps_amp has this register at 0."""
        w = self.layout.width(name)
        off = self.layout.offset(name)
        idx = self.layout.index_array
        outside = (idx >> off) & ((1 << w) - 1)
        resid = np.abs(self.amps[outside != 0])
        return bool(resid.size == 0 or float(resid.max()) <= self.tol.eps_amp)

    def field_branches(self, fields: Sequence[tuple[str, int]]) -> list[tuple[int, float]]:
        """Decompose the state by a concatenation of register prefixes.

        ``fields`` lists (register, prefix_len) pairs; their bits concatenate
        (first field most significant) into one key per basis state.  Returns
        (key value, squared-amplitude mass) for every key carrying any nonzero
        amplitude, in increasing key order.
        """
        idx = self.layout.index_array
        keys = np.zeros_like(idx)
        total = 0
        for reg, plen in fields:
            shift, w = self.layout.prefix_field(reg, plen)
            keys = (keys << w) | ((idx >> shift) & ((1 << w) - 1))
            total += w
        weights = np.abs(self.amps) ** 2
        mass = np.bincount(keys, weights=weights, minlength=1 << total)
        live = np.bincount(keys[self.amps != 0], minlength=1 << total)
        return [(int(v), float(mass[v])) for v in np.flatnonzero(live)]

    def prefix_support(self, name: str, plen: int) -> list[int]:
        """Prefix values (top ``plen`` bits of a register) carrying any nonzero
        amplitude, ascending."""
        return [v for v, _ in self.field_branches([(name, plen)])]

    def slice_amplitudes(self, free: str, fixed: dict[str, int] | None = None) -> np.ndarray:
        """Amplitudes over one register's values with every other register held
        at the given value (default 0)."""
        fixed = dict(fixed or {})
        w = self.layout.width(free)
        out = np.empty(1 << w, dtype=np.complex128)
        for v in range(1 << w):
            fixed[free] = v
            out[v] = self.amps[self.layout.pack(fixed)]
        return out

    def dump(self) -> str:
        """Text form, one line per amplitude above eps_amp:
        ``bits|grouped|by|register re im``."""
        lines = []
        for i in np.flatnonzero(np.abs(self.amps) > self.tol.eps_amp):
            a = self.amps[i]
            lines.append(
                f"{self.layout.format_index(int(i))} {float(a.real)!r} {float(a.imag)!r}")
        return "\n".join(lines)


def init_basis(layout: RegisterLayout, values: dict[str, int] | None = None,
               tol: Tolerance = Tolerance(), check: bool = True) -> StateVector:
    """Computational basis state with the given register assignment."""
    state = StateVector(layout, tol=tol, check=check)
    state.amps[layout.pack(values or {})] = 1.0
    return state
