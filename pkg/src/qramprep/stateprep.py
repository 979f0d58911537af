"""Amplitude-encoding preparation driven by per-level qRAM queries.

For each address qubit l (1-based), two superposed qRAM queries load the
parent partial sum into register b and its child-0 sum into register a; a
rotation controlled on the first l-1 address bits takes qubit l from |0> to
sqrt(a/b)|0> + sqrt(1-a/b)|1>; then the identical queries run again, XORing
the words back out.  The unload is valid because the rotation touched only
qubit l, never the l-1 bits the loads are keyed on.  A final pair of
sign-memory queries brackets a Z gate on ancilla c, kicking the stored minus
signs onto the address register and leaving c clean (phase kickback).

Registers hold word codes, not raw reals: a WordCodec assigns each distinct
cell value a small integer, with 0.0 pinned to code 0 so cleared registers
read as the zero word.  Routing logs, traces and rotation arithmetic all use
the real cell values; codes exist only inside the statevector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (BitPath, DegenerateInputError, InputError, Tolerance,
                   ZeroVectorError)
from .kptree import KPForest, KPTree
from .qram import BranchedQuery, QramInstance
from .simulator import RegisterLayout, StateVector, init_basis


class PipelineError(RuntimeError):
    """An internal pipeline contract broke: dirty ancilla, keying mismatch."""


def fmt_num(x) -> str:
    """Integral reals print bare (10, not 10.0); others as round-trip repr."""
    f = float(x)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def rotation_probability(a: float, b: float, tol: Tolerance = Tolerance()) -> float:
    """p = a/b from the child-0 partial sum a and the parent sum b, clamped
    to [0,1].

    b = 0 marks a dead branch; dead branches carry no amplitude and must be
    skipped by the caller, never divided through.
    """
    if b <= 0.0:
        raise PipelineError("dead branch: parent partial sum is zero")
    p = a / b
    if p < -tol.eps_amp or p > 1.0 + tol.eps_amp:
        raise InputError(f"child sum {a} exceeds parent sum {b}")
    return min(1.0, max(0.0, p))


class WordCodec:
    """Register encoding for the distinct words the qRAMs serve.

    Codes are assigned in first-appearance order over the given cell tables;
    0.0 is always code 0.  ``width`` is the register width needed to hold any
    code, and doubles as the qRAM bus width for metrics.
    """

    def __init__(self, tables: Sequence[Sequence[float]]):
        values = [0.0]
        index = {0.0: 0}
        for table in tables:
            for word in table:
                w = float(word)
                if w not in index:
                    index[w] = len(values)
                    values.append(w)
        self.values = tuple(values)
        self._index = index
        self.width = max(1, (len(values) - 1).bit_length())

    @classmethod
    def for_trees(cls, *trees: KPTree) -> "WordCodec":
        tables = []
        for t in trees:
            tables.append([t.root])
            tables.extend(t.level_cells(d) for d in range(1, t.depth + 1))
        return cls(tables)

    def encode(self, word: float) -> int:
        try:
            return self._index[float(word)]
        except KeyError:
            raise InputError(f"word {word!r} is not in the codec table") from None

    def decode(self, code: int) -> float:
        return self.values[code]

    def encode_cells(self, cells: Sequence[float]) -> np.ndarray:
        return np.asarray([self.encode(w) for w in cells], dtype=np.int64)


@dataclass(frozen=True)
class PrepPlan:
    """Everything one cascade needs.

    ``level_qrams[l]`` serves the level-l partial sums (index 0 is the
    one-cell root constant).  ``reg`` is the address register the cascade
    writes.  ``lead`` lists registers whose full value is prepended to every
    qRAM address in front of the ``reg`` prefix; this multiplexes the qRAMs
    of several trees by a row index.
    """

    n: int
    level_qrams: tuple[QramInstance, ...]
    sign_qram: QramInstance
    codec: WordCodec
    layout: RegisterLayout
    reg: str = "dir"
    lead: tuple[str, ...] = ()
    tol: Tolerance = Tolerance()

    @property
    def lead_width(self) -> int:
        return sum(self.layout.width(r) for r in self.lead)

    def key_fields(self, plen: int) -> list[tuple[str, int]]:
        """Key layout for level loads: lead registers in full, then the first
        ``plen`` bits of the address register."""
        return [(r, self.layout.width(r)) for r in self.lead] + [(self.reg, plen)]

    def controls_for(self, combo: int, plen: int) -> list[tuple[str, BitPath]]:
        """Split a concatenated key value back into per-register controls."""
        fields = self.key_fields(plen)
        rem = sum(w for _, w in fields)
        out = []
        for reg, w in fields:
            rem -= w
            out.append((reg, BitPath.from_int((combo >> rem) & ((1 << w) - 1), w)))
        return out

    @classmethod
    def from_tree(cls, tree: KPTree, *, tol: Tolerance = Tolerance(), cap: int = 24,
                  reg: str = "dir", codec: "WordCodec | None" = None,
                  layout: RegisterLayout | None = None) -> "PrepPlan":
        if tree.depth < 1:
            raise DegenerateInputError(
                "state preparation needs at least one address qubit (dim >= 2)")
        if tree.root <= 0.0:
            raise ZeroVectorError("cannot prepare a zero vector")
        n = tree.depth
        tables = [[tree.root]] + [tree.level_cells(d) for d in range(1, n + 1)]
        if codec is None:
            codec = WordCodec(tables)
        w = codec.width
        if layout is None:
            layout = RegisterLayout([(reg, n), ("a", w), ("b", w), ("c", 1)], cap=cap)
        return cls(
            n=n,
            level_qrams=tuple(QramInstance(t, bus_width=w) for t in tables),
            sign_qram=QramInstance(tuple(tree.sign_cells()), bus_width=1),
            codec=codec,
            layout=layout,
            reg=reg,
            tol=tol,
        )


def _forest_plan(forest: KPForest, *, tol: Tolerance, cap: int = 24,
                 codec: WordCodec | None = None) -> PrepPlan:
    """Row-multiplexed plan: level-l cells of all row trees concatenated, so
    qRAM addresses are (row value, dir prefix)."""
    trees = forest.row_trees
    n_row = forest.norm_tree.depth
    if (1 << n_row) != len(trees):
        raise InputError("forest row count must match the norm tree dimension")
    n = trees[0].depth
    if n < 1:
        raise DegenerateInputError("rows need dimension >= 2")
    tables = [[t.root for t in trees]]
    for d in range(1, n + 1):
        tables.append([c for t in trees for c in t.level_cells(d)])
    signs = [s for t in trees for s in t.sign_cells()]
    if codec is None:
        codec = WordCodec.for_trees(forest.norm_tree, *trees)
    w = codec.width
    layout = RegisterLayout(
        [("row", n_row), ("dir", n), ("a", w), ("b", w), ("c", 1)], cap=cap)
    return PrepPlan(
        n=n,
        level_qrams=tuple(QramInstance(t, bus_width=w) for t in tables),
        sign_qram=QramInstance(tuple(signs), bus_width=1),
        codec=codec,
        layout=layout,
        reg="dir",
        lead=("row",),
        tol=tol,
    )


# -- cascade steps ---------------------------------------------------------


def _live_branches(state: StateVector, plan: PrepPlan, plen: int):
    """(key value, sqrt mass) per live lead+prefix combination, ascending."""
    return [(v, math.sqrt(m)) for v, m in state.field_branches(plan.key_fields(plen))]


def _emit_query(trace, label: str, qram: QramInstance, query: BranchedQuery) -> None:
    trace.append(f"{label} cells={','.join(fmt_num(c) for c in qram.cells)}")
    for br in query.branches:
        trace.append(f"BRANCH addr={br.address} word={fmt_num(br.word)}")
        trace.extend(e.to_line() for e in br.log.events)


def _load_ab(state: StateVector, plan: PrepPlan, l: int, trace=None, label="LOAD"):
    """Query the level-(l-1) and level-l qRAMs and XOR the words into b and a.

    Querying the same level twice cancels, so this implements both load and
    unload; only the trace label differs.
    """
    if not 1 <= l <= plan.n:
        raise InputError(f"level must be in 1..{plan.n}, got {l}")
    width = plan.lead_width + l - 1
    branches = _live_branches(state, plan, l - 1)
    paths = [BitPath.from_int(v, width) for v, _ in branches]
    amps = [a for _, a in branches]
    b_qram = plan.level_qrams[l - 1]
    a_qram = plan.level_qrams[l]
    b_query = b_qram.query_superposed(zip(paths, amps))
    a_query = a_qram.query_superposed(
        [(p.child(0), a) for p, a in zip(paths, amps)])
    if trace is not None:
        _emit_query(trace, f"LEVEL {l} {label}_B", b_qram, b_query)
        _emit_query(trace, f"LEVEL {l} {label}_A", a_qram, a_query)
    key = plan.key_fields(l - 1)
    state.xor_load(key, plan.codec.encode_cells(b_qram.cells), "b")
    # child-0 cells of level l, indexed by the same l-1 bit key
    state.xor_load(key, plan.codec.encode_cells(a_qram.cells[0::2]), "a")
    return b_query, a_query, tuple(paths)


def _rotate_level(state: StateVector, plan: PrepPlan, l: int,
                  paths: Sequence[BitPath], trace=None):
    """One rotation per live branch: qubit l gets weight split a/b."""
    b_qram = plan.level_qrams[l - 1]
    a_qram = plan.level_qrams[l]
    rotations = []
    for path in paths:
        b = b_qram.cells[path.value]
        a = a_qram.cells[2 * path.value]
        p = rotation_probability(a, b, plan.tol)
        state.controlled_rotation(
            plan.controls_for(path.value, l - 1), (plan.reg, l - 1), p)
        if trace is not None:
            trace.append(f"ROTATE prefix={path} p={fmt_num(p)}")
        rotations.append((path, p))
    return tuple(rotations)


def _check_clean(state: StateVector, regs, msg: str) -> None:
    for r in regs:
        if not state.register_is_disentangled_zero(r):
            raise PipelineError(f"register {r} {msg}")


@dataclass(frozen=True)
class LevelRecord:
    """Everything observed while preparing one address qubit."""

    reg: str
    level: int
    prefixes: tuple[BitPath, ...]
    b_query: BranchedQuery
    a_query: BranchedQuery
    rotations: tuple[tuple[BitPath, float], ...]
    unload_b: BranchedQuery
    unload_a: BranchedQuery

    @property
    def ab_words(self) -> tuple[tuple[float, float], ...]:
        """(a, b) word pairs per live branch, in branch order."""
        return tuple(zip(self.a_query.words, self.b_query.words))


@dataclass(frozen=True)
class SignRecord:
    variant: str
    load_query: BranchedQuery
    unload_query: BranchedQuery


def _run_level(state: StateVector, plan: PrepPlan, l: int, trace=None) -> LevelRecord:
    _check_clean(state, ("a", "b"), f"dirty before level {l} load")
    b_q, a_q, paths = _load_ab(state, plan, l, trace, "LOAD")
    rotations = _rotate_level(state, plan, l, paths, trace)
    ub_q, ua_q, _ = _load_ab(state, plan, l, trace, "UNLOAD")
    _check_clean(state, ("a", "b"), f"not restored after level {l} unload")
    return LevelRecord(plan.reg, l, paths, b_q, a_q, rotations, ub_q, ua_q)


def _sign_stage(state: StateVector, plan: PrepPlan, variant: str, trace=None) -> SignRecord:
    """Negate the amplitudes whose sign cell is 1, leaving c clean.

    kickback: load c from the sign qRAM, Z on c, unload.
    flip: same bracketing loads, but the minus signs are written onto the
    address branches directly while c is loaded (the two are equal states).
    """
    if variant not in ("kickback", "flip"):
        raise InputError(f"unknown sign variant {variant!r}")
    _check_clean(state, ("c",), "dirty before sign stage")
    width = plan.lead_width + plan.n
    branches = _live_branches(state, plan, plan.n)
    paths = [BitPath.from_int(v, width) for v, _ in branches]
    amps = [a for _, a in branches]
    load_q = plan.sign_qram.query_superposed(zip(paths, amps))
    if trace is not None:
        _emit_query(trace, "SIGN LOAD", plan.sign_qram, load_q)
    key = plan.key_fields(plan.n)
    flags = np.asarray(plan.sign_qram.cells, dtype=np.int64)
    state.xor_load(key, flags, "c")
    if variant == "kickback":
        state.z_on(("c", 0))
        if trace is not None:
            trace.append("SIGN Z")
    else:
        state.key_sign_flip(key, flags)
        if trace is not None:
            trace.append("SIGN FLIP")
    unload_q = plan.sign_qram.query_superposed(zip(paths, amps))
    if trace is not None:
        _emit_query(trace, "SIGN UNLOAD", plan.sign_qram, unload_q)
    state.xor_load(key, flags, "c")
    _check_clean(state, ("c",), "not restored after sign stage (cell mismatch)")
    return SignRecord(variant, load_q, unload_q)


# -- public single-step operations ------------------------------------------


def load_ab_for_level(state: StateVector, plan: PrepPlan, l: int) -> StateVector:
    """Load b := parent sum and a := child-0 sum on every live branch.

    Mutates and returns ``state``; requires a and b clean going in.
    """
    _check_clean(state, ("a", "b"), f"dirty before level {l} load")
    _load_ab(state, plan, l)
    return state


def unload_ab_for_level(state: StateVector, plan: PrepPlan, l: int) -> StateVector:
    """Repeat level l's queries to XOR a and b back to zero everywhere."""
    _load_ab(state, plan, l, label="UNLOAD")
    _check_clean(state, ("a", "b"), f"not restored after level {l} unload")
    return state


def apply_signs(state: StateVector, plan: PrepPlan) -> StateVector:
    """Sign qRAM load, Z on c, unload: phase-kickback sign application."""
    _sign_stage(state, plan, "kickback")
    return state


def apply_signs_via_controlled_flip(state: StateVector, plan: PrepPlan) -> StateVector:
    """Sign application with the phase written per address branch while c is
    loaded, instead of a Z on c; must equal apply_signs exactly."""
    _sign_stage(state, plan, "flip")
    return state


# -- results and metrics -----------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    """Physical-cost accounting: queries are superposed qRAM queries (4 per
    level plus 2 per sign stage), routing_ops are per-branch pass-throughs,
    time_steps per-level parallel schedules."""

    n: int
    queries: int
    rotation_stages: int
    rotations: int
    per_level: tuple[dict, ...]
    sign: tuple[dict, ...]


def _level_metrics(rec: LevelRecord) -> dict:
    qs = [rec.b_query, rec.a_query, rec.unload_b, rec.unload_a]
    return {
        "reg": rec.reg,
        "level": rec.level,
        "branches": len(rec.prefixes),
        "queries": 4,
        "routing_ops": sum(q.ops_per_branch for q in qs),
        "stores": sum(q.stores_per_branch for q in qs),
        "entangled_switches": max(q.entangled_peak for q in qs),
        "time_steps": sum(q.parallel_time_steps for q in qs),
    }


def _sign_metrics(rec: SignRecord) -> dict:
    qs = [rec.load_query, rec.unload_query]
    return {
        "variant": rec.variant,
        "branches": len(rec.load_query.branches),
        "queries": 2,
        "routing_ops": sum(q.ops_per_branch for q in qs),
        "stores": sum(q.stores_per_branch for q in qs),
        "entangled_switches": max(q.entangled_peak for q in qs),
        "time_steps": sum(q.parallel_time_steps for q in qs),
    }


def _build_metrics(level_records, sign_records) -> Metrics:
    return Metrics(
        n=len(level_records),
        queries=4 * len(level_records) + 2 * len(sign_records),
        rotation_stages=len(level_records),
        rotations=sum(len(r.rotations) for r in level_records),
        per_level=tuple(_level_metrics(r) for r in level_records),
        sign=tuple(_sign_metrics(r) for r in sign_records),
    )


@dataclass(frozen=True)
class PrepResult:
    """Final state plus verification and accounting artifacts.

    ``fidelity`` is None when the cascade was stopped early for inspection.
    ``address_registers`` are the registers that carry the prepared
    amplitudes (lead registers first).
    """

    state: StateVector
    target: np.ndarray
    fidelity: float | None
    ancilla_clean: bool
    address_registers: tuple[str, ...]
    level_records: tuple[LevelRecord, ...]
    sign_records: tuple[SignRecord, ...]
    metrics: Metrics
    trace_lines: tuple[str, ...]

    @property
    def trace(self) -> str:
        return "\n".join(self.trace_lines)

    def register_amplitudes(self, *regs: str) -> np.ndarray:
        """Joint amplitudes over the named registers with every other register
        at 0; the first named register is most significant."""
        widths = [self.state.layout.width(r) for r in regs]
        total = sum(widths)
        out = np.empty(1 << total, dtype=np.complex128)
        for v in range(1 << total):
            fixed = {}
            rem = total
            for r, w in zip(regs, widths):
                rem -= w
                fixed[r] = (v >> rem) & ((1 << w) - 1)
            out[v] = self.state.amps[self.state.layout.pack(fixed)]
        return out

    def prepared_amplitudes(self) -> np.ndarray:
        return self.register_amplitudes(*self.address_registers)


def _finish(state, target, addr_regs, level_records, sign_records, trace,
            partial=False) -> PrepResult:
    clean = all(state.register_is_disentangled_zero(r) for r in ("a", "b", "c"))
    return PrepResult(
        state=state,
        target=target,
        fidelity=None if partial else state.fidelity(target),
        ancilla_clean=clean,
        address_registers=tuple(addr_regs),
        level_records=tuple(level_records),
        sign_records=tuple(sign_records),
        metrics=_build_metrics(level_records, sign_records),
        trace_lines=tuple(trace),
    )


# -- end-to-end preparations --------------------------------------------------


def prepare_vector(tree: KPTree, *, tol: Tolerance = Tolerance(), check: bool = True,
                   cap: int = 24, sign_variant: str = "kickback",
                   stop_after_level: "int | None" = None) -> PrepResult:
    """Prepare sum_j (-1)**sign_j sqrt(leaf_j / root) |j> on the dir register.

    ``stop_after_level`` halts the cascade early (no sign stage, fidelity
    None) so intermediate states can be inspected.
    """
    plan = PrepPlan.from_tree(tree, tol=tol, cap=cap)
    state = init_basis(plan.layout, {}, tol=tol, check=check)
    trace: list[str] = []
    records = []
    last = plan.n if stop_after_level is None else min(stop_after_level, plan.n)
    for l in range(1, last + 1):
        records.append(_run_level(state, plan, l, trace))
    signs = []
    if stop_after_level is None:
        signs.append(_sign_stage(state, plan, sign_variant, trace))
    target = np.zeros(plan.layout.dim, dtype=np.complex128)
    for j, amp in enumerate(tree.signed_amplitudes()):
        target[plan.layout.pack({plan.reg: j})] = amp
    return _finish(state, target, (plan.reg,), records, signs, trace,
                   partial=stop_after_level is not None)


def prepare_norms(forest: KPForest, **kwargs) -> PrepResult:
    """Prepare sum_i (||row i|| / ||M||_F) |i> from the norm tree."""
    if forest.norm_tree.root <= 0.0:
        raise ZeroVectorError("cannot prepare norms of a zero matrix")
    return prepare_vector(forest.norm_tree, **kwargs)


def prepare_row(forest: KPForest, i: int, *, tol: Tolerance = Tolerance(),
                check: bool = True, cap: int = 24,
                sign_variant: str = "kickback") -> PrepResult:
    """Prepare row i's normalized amplitudes on dir, with the row register
    held at |i> throughout."""
    if not 0 <= i < forest.n_rows:
        raise InputError(f"row {i} out of range")
    tree = forest.row_trees[i]
    if tree.root <= 0.0:
        raise ZeroVectorError(f"row {i} is zero")
    plan = _forest_plan(forest, tol=tol, cap=cap)
    state = init_basis(plan.layout, {"row": i}, tol=tol, check=check)
    trace: list[str] = []
    records = [_run_level(state, plan, l, trace) for l in range(1, plan.n + 1)]
    signs = [_sign_stage(state, plan, sign_variant, trace)]
    target = np.zeros(plan.layout.dim, dtype=np.complex128)
    for j, amp in enumerate(tree.signed_amplitudes()):
        target[plan.layout.pack({"row": i, "dir": j})] = amp
    return _finish(state, target, ("row", "dir"), records, signs, trace)


def encode_matrix(forest: KPForest, *, tol: Tolerance = Tolerance(),
                  check: bool = True, cap: int = 24,
                  sign_variant: str = "kickback") -> PrepResult:
    """Two-stage encoding: the norm cascade writes row-norm amplitudes onto
    the row register, then the row-multiplexed cascade writes each row's
    amplitudes onto dir, giving sum_ij (M_ij / ||M||_F) |i>|j>."""
    norm_tree = forest.norm_tree
    if norm_tree.root <= 0.0:
        raise ZeroVectorError("cannot encode a zero matrix")
    codec = WordCodec.for_trees(norm_tree, *forest.row_trees)
    row_plan = _forest_plan(forest, tol=tol, cap=cap, codec=codec)
    norm_plan = PrepPlan.from_tree(norm_tree, tol=tol, reg="row", codec=codec,
                                   layout=row_plan.layout)
    state = init_basis(row_plan.layout, {}, tol=tol, check=check)
    trace: list[str] = []
    records = []
    signs = []
    trace.append("STAGE NORMS")
    for l in range(1, norm_plan.n + 1):
        records.append(_run_level(state, norm_plan, l, trace))
    signs.append(_sign_stage(state, norm_plan, sign_variant, trace))
    trace.append("STAGE ROWS")
    for l in range(1, row_plan.n + 1):
        records.append(_run_level(state, row_plan, l, trace))
    signs.append(_sign_stage(state, row_plan, sign_variant, trace))
    froot = norm_tree.root
    target = np.zeros(row_plan.layout.dim, dtype=np.complex128)
    for i, t in enumerate(forest.row_trees):
        for j in range(t.dim):
            amp = math.sqrt(t.levels[t.depth][j] / froot)
            if t.leaf_signs[j]:
                amp = -amp
            target[row_plan.layout.pack({"row": i, "dir": j})] = amp
    return _finish(state, target, ("row", "dir"), records, signs, trace)
