"""Circuit-level bucket-brigade memory: a binary tree of three-state switches.

Address bits enter at the root one at a time.  A switch holding 0 forwards the
incoming bit to child 0, a switch holding 1 to child 1, and an empty switch
captures it.  Routing an n-bit address therefore costs n(n-1)/2 pass-throughs
plus n stores and leaves exactly n switches non-empty, one per level, tracing
the address.  Data retrieval XORs the addressed memory cell into a bus word,
and unrouting replays the stored bits back out in reverse.

Node indices are heap order: root 0, children of k at 2k+1 and 2k+2; the leaf
layer (memory cells) continues the numbering at 2^n - 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

from .core import BitPath, InputError, as_path


class SwitchState(IntEnum):
    """Qutrit switch: holds a routed bit, or waits empty for one."""

    ZERO = 0
    ONE = 1
    EMPTY = 2


class RoutingError(RuntimeError):
    """Routing protocol misuse: overfull route, retrieval without one, etc."""


@dataclass(frozen=True)
class LogEvent:
    step: int
    event: str
    node: int
    direction: int | None = None

    def to_line(self) -> str:
        tail = "" if self.direction is None else f" dir={self.direction}"
        return f"STEP {self.step} {self.event} node={self.node}{tail}"


class RoutingLog:
    """Ordered event record with operation counters.

    routing_ops counts forward pass-throughs only; that is the n(n-1)/2
    quantity.  Stores are tallied separately (whether the claim includes them
    is left open by the accounting convention; we expose both).  Unroute costs
    land in their own mirror counters so forward cost stays comparable.
    """

    def __init__(self):
        self.events: list[LogEvent] = []
        self.routing_ops = 0
        self.stores = 0
        self.bus_loads = 0
        self.bus_extracts = 0
        self.unroute_ops = 0
        self.unroute_stores = 0
        self.entangled_switches = 0

    def emit(self, event: str, node: int, direction: int | None = None) -> None:
        self.events.append(LogEvent(len(self.events), event, node, direction))

    def note_entangled(self, count: int) -> None:
        self.entangled_switches = max(self.entangled_switches, count)

    @property
    def time_steps(self) -> int:
        return time_steps(self)

    def counters(self) -> dict:
        return {
            "routing_ops": self.routing_ops,
            "stores": self.stores,
            "bus_loads": self.bus_loads,
            "bus_extracts": self.bus_extracts,
            "unroute_ops": self.unroute_ops,
            "unroute_stores": self.unroute_stores,
            "entangled_switches": self.entangled_switches,
            "time_steps": self.time_steps,
        }

    def to_text(self) -> str:
        return "\n".join(e.to_line() for e in self.events)


def time_steps(log: RoutingLog) -> int:
    """Parallel-time cost of the forward route.

    Each pass-through takes 2 steps (one gate conditioned on the switch
    holding 0, one on it holding 1); each store takes 1.  Routing n bits
    sequentially thus costs 2*n(n-1)/2 + n = n^2 steps.
    """
    return 2 * log.routing_ops + log.stores


class QramInstance:
    """One switch tree plus its classical memory cells.

    ``cells`` holds 2^n words (reals for partial-sum levels, 0/1 ints for the
    sign memory).  ``bus_width`` is carried for metrics reporting only; cell
    values are never truncated to it.
    """

    def __init__(self, cells: Sequence[float | int], bus_width: int = 1):
        cells = tuple(cells)
        if len(cells) < 1 or len(cells) & (len(cells) - 1):
            raise InputError(f"cell count must be a power of two, got {len(cells)}")
        self.cells = cells
        self.n = (len(cells) - 1).bit_length()
        self.bus_width = bus_width
        self.switches: list[SwitchState] = [SwitchState.EMPTY] * ((1 << self.n) - 1)
        # forward record of the current route: (stored node, [(passed node, dir)])
        self._bit_traces: list[tuple[int, list[tuple[int, int]]]] = []

    def snapshot(self) -> "QramInstance":
        """Fresh un-routed instance over the same cells."""
        return QramInstance(self.cells, self.bus_width)

    def entangled_count(self) -> int:
        return sum(1 for s in self.switches if s is not SwitchState.EMPTY)

    def routed_depth(self) -> int:
        return len(self._bit_traces)

    def route_bit(self, bit: int, log: RoutingLog) -> "QramInstance":
        """Send one address bit down from the root; it passes every already
        set switch and lodges in the first empty one."""
        if bit not in (0, 1):
            raise InputError(f"address bit must be 0 or 1, got {bit!r}")
        if self.routed_depth() >= self.n:
            raise RoutingError(f"route already complete ({self.n} bits stored)")
        log.emit("BUS_LOAD", 0)
        log.bus_loads += 1
        idx = 0
        passed: list[tuple[int, int]] = []
        while self.switches[idx] is not SwitchState.EMPTY:
            d = int(self.switches[idx])
            log.emit("PASS", idx, d)
            log.routing_ops += 1
            passed.append((idx, d))
            idx = 2 * idx + 1 + d
        self.switches[idx] = SwitchState(bit)
        log.emit("STORE", idx)
        log.stores += 1
        self._bit_traces.append((idx, passed))
        log.note_entangled(self.entangled_count())
        return self

    def route_address(self, addr, log: RoutingLog | None = None) -> RoutingLog:
        """Route a full address, most-significant bit first, into an empty tree."""
        addr = as_path(addr)
        if addr.depth != self.n:
            raise InputError(f"address width {addr.depth} != tree width {self.n}")
        if self.entangled_count():
            raise RoutingError("route_address requires a fully empty tree")
        if log is None:
            log = RoutingLog()
        for bit in addr.bits:
            self.route_bit(bit, log)
        return log

    def stored_address(self) -> BitPath | None:
        """Decode the switch path back to an address; None if incomplete."""
        bits = []
        idx = 0
        for _ in range(self.n):
            s = self.switches[idx]
            if s is SwitchState.EMPTY:
                return None
            bits.append(int(s))
            idx = 2 * idx + 1 + int(s)
        return BitPath(tuple(bits))

    def retrieve(self, register: float | int = 0, log: RoutingLog | None = None):
        """XOR the addressed cell into the bus register and return it.

        Real-valued cells use the toggle reading of XOR: a zero register takes
        the cell value, a register equal to the cell returns to zero.  Loading
        twice is always the identity.
        """
        addr = self.stored_address()
        if addr is None:
            raise RoutingError("retrieve requires a complete route")
        word = self.cells[addr.value]
        if log is not None:
            log.emit("BUS_EXTRACT", (1 << self.n) - 1 + addr.value)
            log.bus_extracts += 1
        if register == 0:
            return word
        if register == word:
            return type(register)(0)
        if isinstance(register, int) and isinstance(word, int):
            return register ^ word
        raise RoutingError(
            f"cannot XOR real word {word!r} into non-matching register {register!r}")

    def unroute(self, log: RoutingLog | None = None) -> "QramInstance":
        """Replay the stored route in reverse: each bit is lifted out of its
        switch, passed back up the path, and cleared from the bus."""
        if log is None:
            log = RoutingLog()
        while self._bit_traces:
            stored, passed = self._bit_traces.pop()
            self.switches[stored] = SwitchState.EMPTY
            log.emit("UNSTORE", stored)
            log.unroute_stores += 1
            for node, d in reversed(passed):
                log.emit("PASS", node, d)
                log.unroute_ops += 1
            log.emit("BUS_CLEAR", 0)
        return self

    def query_superposed(self, branches: Iterable[tuple]) -> "BranchedQuery":
        """Serve a superposed address query branch by branch.

        Each (address, amplitude) branch is routed, retrieved and unrouted on
        its own snapshot; amplitudes pass through untouched.  The physical
        device does all branches coherently in one query, so aggregate metrics
        are reported per branch plus max-over-branches parallel time.
        """
        if self.entangled_count():
            raise RoutingError("query on a partially routed instance")
        results = []
        seen = set()
        for path, amp in branches:
            p = as_path(path)
            if p.depth != self.n:
                raise InputError(f"address width {p.depth} != tree width {self.n}")
            if p.value in seen:
                raise InputError(f"duplicate address {p}")
            seen.add(p.value)
            snap = self.snapshot()
            log = snap.route_address(p)
            word = snap.retrieve(0, log)
            snap.unroute(log)
            results.append(QueryBranch(p, amp, word, log))
        return BranchedQuery(tuple(results))


@dataclass(frozen=True)
class QueryBranch:
    address: BitPath
    amplitude: complex
    word: float | int
    log: RoutingLog


@dataclass(frozen=True)
class BranchedQuery:
    """Result of one superposed query: per-branch words and routing logs."""

    branches: tuple[QueryBranch, ...]

    @property
    def addresses(self) -> tuple[BitPath, ...]:
        return tuple(b.address for b in self.branches)

    @property
    def amplitudes(self) -> tuple[complex, ...]:
        return tuple(b.amplitude for b in self.branches)

    @property
    def words(self) -> tuple:
        return tuple(b.word for b in self.branches)

    @property
    def ops_per_branch(self) -> int:
        return max((b.log.routing_ops for b in self.branches), default=0)

    @property
    def stores_per_branch(self) -> int:
        return max((b.log.stores for b in self.branches), default=0)

    @property
    def entangled_peak(self) -> int:
        return max((b.log.entangled_switches for b in self.branches), default=0)

    @property
    def parallel_time_steps(self) -> int:
        """One coherent query takes the slowest branch's schedule."""
        return max((b.log.time_steps for b in self.branches), default=0)

    @property
    def simulated_total_ops(self) -> int:
        """Branch-wise simulation cost; not a physical claim."""
        return sum(b.log.routing_ops for b in self.branches)


def fanout_switch_activations(n: int) -> int:
    """Switches driven by one n-bit query in the fanout layout, where address
    bit i toggles all 2^i level-i switches: 2^n - 1 in total, against the
    n stores of the bucket brigade."""
    if n < 0:
        raise InputError("address width must be >= 0")
    return (1 << n) - 1


class QutritTreeState:
    """Reference simulation with the switch tree as explicit qutrits.

    Joint basis states (switch configuration, address register, bus word) map
    to amplitudes.  Every protocol step is a deterministic relabeling of basis
    states, so the state stays a finite dict; the width guard keeps the
    3^(2^n - 1) configuration space at most 27.  Cells must be integers here
    (real words are compared through an encoding table by the caller).
    """

    def __init__(self, cells: Sequence[int]):
        cells = tuple(int(c) for c in cells)
        if len(cells) < 1 or len(cells) & (len(cells) - 1):
            raise InputError(f"cell count must be a power of two, got {len(cells)}")
        self.n = (len(cells) - 1).bit_length()
        if self.n > 2:
            raise InputError("full-qutrit reference supports n <= 2 only")
        self.cells = cells
        self.empty = (SwitchState.EMPTY,) * ((1 << self.n) - 1)
        self.state: dict[tuple, complex] = {}
        self._routed_bits = 0

    def load_branches(self, branches: Iterable[tuple]) -> None:
        """Initialize with an address superposition; bus word starts at 0."""
        state: dict[tuple, complex] = {}
        for path, amp in branches:
            p = as_path(path)
            if p.depth != self.n:
                raise InputError(f"address width {p.depth} != tree width {self.n}")
            key = (self.empty, p.value, 0)
            if key in state:
                raise InputError(f"duplicate address {p}")
            state[key] = complex(amp)
        self.state = state
        self._routed_bits = 0

    def _relabel(self, fn) -> None:
        new: dict[tuple, complex] = {}
        for key, amp in self.state.items():
            nk = fn(key)
            if nk in new:
                raise RoutingError("relabeling collision: step is not reversible")
            new[nk] = amp
        self.state = new

    def route_next_bit(self) -> None:
        """Coherently route address bit k on every branch at once."""
        if self._routed_bits >= self.n:
            raise RoutingError("route already complete")
        k = self._routed_bits

        def step(key):
            switches, addr, word = key
            bit = (addr >> (self.n - 1 - k)) & 1
            sw = list(switches)
            idx = 0
            while sw[idx] is not SwitchState.EMPTY:
                idx = 2 * idx + 1 + int(sw[idx])
            sw[idx] = SwitchState(bit)
            return (tuple(sw), addr, word)

        self._relabel(step)
        self._routed_bits += 1

    def route_all(self) -> None:
        while self._routed_bits < self.n:
            self.route_next_bit()

    def retrieve(self) -> None:
        """XOR every branch's addressed cell into its bus word."""
        if self._routed_bits != self.n:
            raise RoutingError("retrieve requires a complete route")

        def step(key):
            switches, addr, word = key
            idx = 0
            for _ in range(self.n):
                idx = 2 * idx + 1 + int(switches[idx])
            return (switches, addr, word ^ self.cells[idx - ((1 << self.n) - 1)])

        self._relabel(step)

    def unroute_all(self) -> None:
        """Lift the routed bits back out, last stored first."""
        while self._routed_bits > 0:
            k = self._routed_bits - 1

            def step(key):
                switches, addr, word = key
                sw = list(switches)
                idx = 0
                for j in range(k):
                    idx = 2 * idx + 1 + ((addr >> (self.n - 1 - j)) & 1)
                sw[idx] = SwitchState.EMPTY
                return (tuple(sw), addr, word)

            self._relabel(step)
            self._routed_bits -= 1

    def switch_configs(self) -> set[tuple]:
        return {key[0] for key in self.state}

    def amplitudes(self) -> dict[tuple[int, int], complex]:
        """(address, bus word) -> amplitude; requires all switches empty."""
        out = {}
        for (switches, addr, word), amp in self.state.items():
            if switches != self.empty:
                raise RoutingError("switch tree still entangled with the bus")
            out[(addr, word)] = amp
        return out
