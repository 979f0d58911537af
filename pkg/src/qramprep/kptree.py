"""Binary trees of squared-amplitude partial sums with signed leaves.

A tree over a 2**n dimensional vector stores, at depth d and node l, the sum
of v_j**2 over all indices j whose most-significant d bits equal l.  Leaves
store (v_j**2, sign).  The per-depth arrays double as the memory-cell
contents of the per-level qRAMs, and the leaf signs as the sign qRAM cells.

Updates recompute every node on the root-to-leaf path from its children, so
any two update sequences that end in the same leaf values produce bit-for-bit
identical trees, and the parent-sum invariant holds exactly (not just to
rounding).
"""

from __future__ import annotations

import math

from .core import BitPath, SparseMatrix, SparseVector, as_path


class KPTree:
    """Partial-sum tree; level d holds 2**d nonnegative reals, leaves carry signs.

    ``node_writes`` counts node-value writes since construction, so callers
    can observe the update cost contract (depth + 1 writes per entry update).
    """

    def __init__(self, depth: int):
        if depth < 0:
            raise ValueError("depth must be >= 0")
        self.depth = depth
        self.levels: list[list[float]] = [[0.0] * (1 << d) for d in range(depth + 1)]
        self.leaf_signs: list[int] = [0] * (1 << depth)
        self.node_writes = 0

    @property
    def dim(self) -> int:
        return 1 << self.depth

    @property
    def root(self) -> float:
        return self.levels[0][0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, KPTree):
            return NotImplemented
        return self.levels == other.levels and self.leaf_signs == other.leaf_signs

    def __repr__(self) -> str:
        return f"KPTree(depth={self.depth}, root={self.root})"

    def update_entry(self, index: int, value: float) -> "KPTree":
        """Set entry ``index`` to ``value``: leaf gets (value**2, sign), ancestors
        are recomputed from their children.  Writes exactly depth+1 node values."""
        sign = 1 if value < 0 else 0
        return self.update_squared_leaf(index, float(value) * float(value), sign)

    def update_squared_leaf(self, index: int, squared: float, sign: int) -> "KPTree":
        """Like update_entry but with the squared leaf value given directly.

        Used for the norm tree, whose leaves are already squared row norms;
        avoids a sqrt/square round trip that would cost a few ulps.
        """
        if not 0 <= index < self.dim:
            raise IndexError(f"leaf index {index} out of range for dim {self.dim}")
        if squared < 0.0:
            raise ValueError("squared leaf value must be nonnegative")
        self.levels[self.depth][index] = squared
        self.leaf_signs[index] = 1 if sign else 0
        self.node_writes += 1
        node = index
        for d in range(self.depth - 1, -1, -1):
            node >>= 1
            self.levels[d][node] = self.levels[d + 1][2 * node] + self.levels[d + 1][2 * node + 1]
            self.node_writes += 1
        return self

    def node_value(self, path: BitPath | str) -> float:
        """Stored partial sum at the node addressed by ``path`` (root for the
        empty path)."""
        p = as_path(path)
        if p.depth > self.depth:
            raise ValueError(f"path depth {p.depth} exceeds tree depth {self.depth}")
        return self.levels[p.depth][p.value]

    def level_cells(self, d: int) -> list[float]:
        """Values of level d in index order, as qRAM memory-cell contents."""
        if not 0 < d <= self.depth:
            raise ValueError(f"level must be in 1..{self.depth}, got {d}")
        return list(self.levels[d])

    def sign_cells(self) -> list[int]:
        """Leaf sign flags in index order (1 marks a negative entry)."""
        return list(self.leaf_signs)

    def signed_amplitudes(self) -> list[float]:
        """Normalized signed amplitudes (-1)**sign * sqrt(leaf/root) per index.

        This is the target state the preparation pipeline must reproduce.
        """
        r = self.root
        if r <= 0.0:
            raise ValueError("tree has zero root; no normalized amplitudes exist")
        out = []
        for j in range(self.dim):
            a = math.sqrt(self.levels[self.depth][j] / r)
            out.append(-a if self.leaf_signs[j] else a)
        return out

    def to_dict(self) -> dict:
        return {"levels": [list(lv) for lv in self.levels], "signs": list(self.leaf_signs)}

    @classmethod
    def from_dict(cls, data: dict) -> "KPTree":
        levels = data["levels"]
        depth = len(levels) - 1
        tree = cls(depth)
        for d, lv in enumerate(levels):
            if len(lv) != (1 << d):
                raise ValueError(f"level {d} must have {1 << d} cells")
            tree.levels[d] = [float(x) for x in lv]
        signs = data["signs"]
        if len(signs) != tree.dim:
            raise ValueError("sign array length mismatch")
        tree.leaf_signs = [1 if s else 0 for s in signs]
        return tree


def build_tree(v: SparseVector) -> KPTree:
    """Build the tree for a padded vector by folding entry updates into a zero
    tree; touches (depth+1) nodes per stored entry."""
    if v.dim & (v.dim - 1):
        raise ValueError(f"vector dim {v.dim} is not a power of two; pad first")
    tree = KPTree(v.dim.bit_length() - 1)
    for i, val in v.entries:
        tree.update_entry(i, val)
    return tree


class KPForest:
    """One tree per matrix row plus a norm tree over the row roots.

    The norm tree's leaves hold the squared row norms, i.e. exactly the row
    tree roots, so its own root is the squared Frobenius norm.
    """

    def __init__(self, row_trees: list[KPTree], norm_tree: KPTree):
        self.row_trees = row_trees
        self.norm_tree = norm_tree

    @property
    def n_rows(self) -> int:
        return len(self.row_trees)


def build_forest(m: SparseMatrix) -> KPForest:
    """Row trees plus the norm tree for a padded square matrix."""
    if m.rows != m.cols or m.rows & (m.rows - 1):
        raise ValueError("matrix must be square with power-of-two dims; pad first")
    row_trees = [build_tree(m.row(i)) for i in range(m.rows)]
    norm_tree = KPTree(m.rows.bit_length() - 1)
    for i, t in enumerate(row_trees):
        if t.root != 0.0:
            norm_tree.update_squared_leaf(i, t.root, 0)
    return KPForest(row_trees, norm_tree)
