"""Quadtree keyed on MBR containment (the SP-GiST analog).

Every entry lives at the deepest node whose cell fully contains its MBR;
entries straddling a split line stay at the inner node.  Leaves split at
capacity until the depth limit.  When a rect falls outside the root cell
the root grows by doubling toward it.  Split coordinates are stored when
a node subdivides, so quadrant cells are derived exactly and never drift
from their children.

Whole-trajectory rows carry large MBRs that straddle high-level split
lines, which concentrates them near the root; that is the structural
weakness this family has on non-segmented data.
"""

from __future__ import annotations

from .base import QueryStats, rects_overlap_t

RectT = tuple[float, float, float, float]


def _contains(cell: RectT, rect: RectT) -> bool:
    return (cell[0] <= rect[0] and rect[2] <= cell[2]
            and cell[1] <= rect[1] and rect[3] <= cell[3])


class _QNode:
    __slots__ = ("cell", "entries", "children", "parent", "split_x", "split_y")

    def __init__(self, cell: RectT, parent: "_QNode | None" = None):
        self.cell = cell
        self.entries: list[tuple[RectT, int]] = []
        self.children: list[_QNode] | None = None
        self.parent = parent
        self.split_x = 0.0
        self.split_y = 0.0

    def quadrant_cells(self) -> list[RectT]:
        minx, miny, maxx, maxy = self.cell
        cx, cy = self.split_x, self.split_y
        return [(minx, miny, cx, cy), (cx, miny, maxx, cy),
                (minx, cy, cx, maxy), (cx, cy, maxx, maxy)]

    def make_children(self, split_x: float, split_y: float) -> None:
        self.split_x = split_x
        self.split_y = split_y
        self.children = [_QNode(c, self) for c in self.quadrant_cells()]


class QuadTreeIndex:
    def __init__(self, capacity: int = 16, max_depth: int = 16):
        self.capacity = capacity
        self.max_depth = max_depth
        self.root: _QNode | None = None
        self.row_node: dict[int, _QNode] = {}

    # -- structure -------------------------------------------------------

    def _ensure_root(self, rect: RectT) -> None:
        if self.root is None:
            minx, miny, maxx, maxy = rect
            pad = max(maxx - minx, maxy - miny, 1.0)
            self.root = _QNode((minx - 0.5 * pad, miny - 0.5 * pad,
                                maxx + 0.5 * pad, maxy + 0.5 * pad))
            return
        while not _contains(self.root.cell, rect):
            self._grow_toward(rect)

    def _grow_toward(self, rect: RectT) -> None:
        # Double the root cell; the old root becomes one quadrant, split
        # exactly at its own former boundary.
        old = self.root
        minx, miny, maxx, maxy = old.cell
        w = maxx - minx
        h = maxy - miny
        grow_left = rect[0] < minx
        grow_down = rect[1] < miny
        new_cell = (minx - w if grow_left else minx,
                    miny - h if grow_down else miny,
                    maxx if grow_left else maxx + w,
                    maxy if grow_down else maxy + h)
        new_root = _QNode(new_cell)
        new_root.make_children(minx if grow_left else maxx,
                               miny if grow_down else maxy)
        quadrant = (1 if grow_left else 0) + 2 * (1 if grow_down else 0)
        old.parent = new_root
        old.cell = new_root.children[quadrant].cell  # identical by construction
        new_root.children[quadrant] = old
        self.root = new_root

    # -- maintenance -----------------------------------------------------

    def insert(self, row_id: int, rect: RectT, stats: QueryStats | None = None) -> None:
        self._ensure_root(rect)
        node = self.root
        depth = 0
        while node.children is not None:
            nxt = None
            for child in node.children:
                if _contains(child.cell, rect):
                    nxt = child
                    break
            if nxt is None:
                break
            node = nxt
            depth += 1
        node.entries.append((rect, row_id))
        self.row_node[row_id] = node
        if node.children is None and len(node.entries) > self.capacity \
                and depth < self.max_depth:
            self._split(node, depth)

    def _split(self, node: _QNode, depth: int) -> None:
        minx, miny, maxx, maxy = node.cell
        node.make_children(minx + (maxx - minx) / 2.0, miny + (maxy - miny) / 2.0)
        entries = node.entries
        node.entries = []
        for rect, rid in entries:
            placed = None
            for child in node.children:
                if _contains(child.cell, rect):
                    placed = child
                    break
            if placed is None:
                node.entries.append((rect, rid))
            else:
                placed.entries.append((rect, rid))
                self.row_node[rid] = placed
        for child in node.children:
            if len(child.entries) > self.capacity and depth + 1 < self.max_depth:
                self._split(child, depth + 1)

    def remove(self, row_id: int, rect: RectT, stats: QueryStats | None = None) -> None:
        node = self.row_node.pop(row_id)
        node.entries = [e for e in node.entries if e[1] != row_id]
        self._prune(node)

    def _prune(self, node: _QNode) -> None:
        # drop empty leaves; an inner node reverts to a leaf once all four
        # quadrants have died
        while node is not None and node.parent is not None and not node.entries \
                and node.children is None:
            parent = node.parent
            parent.children = [c for c in parent.children if c is not node]
            if parent.children:
                break
            parent.children = None
            node = parent

    # -- queries ---------------------------------------------------------

    def query(self, rect: RectT, stats: QueryStats) -> list[int]:
        out: list[int] = []
        if self.root is None:
            return out
        stack = [self.root]
        while stack:
            node = stack.pop()
            stats.nodes_visited += 1
            for r, rid in node.entries:
                stats.rows_touched += 1
                if rects_overlap_t(r, rect):
                    out.append(rid)
            if node.children is not None:
                for child in node.children:
                    if rects_overlap_t(child.cell, rect):
                        stack.append(child)
        return out

    # -- bulk loading ----------------------------------------------------

    def bulk_build(self, items: list[tuple[RectT, int]]) -> None:
        if not items:
            return
        # root cell spans all rows up front so loading never regrows it
        minx = min(r[0] for r, _ in items)
        miny = min(r[1] for r, _ in items)
        maxx = max(r[2] for r, _ in items)
        maxy = max(r[3] for r, _ in items)
        pad = max(maxx - minx, maxy - miny, 1.0) * 1e-9
        self.root = _QNode((minx - pad, miny - pad, maxx + pad, maxy + pad))
        for rect, rid in items:
            self.insert(rid, rect)

    # -- invariant helpers (used by tests) --------------------------------

    def check_invariants(self) -> None:
        if self.root is None:
            return

        def walk(node: _QNode):
            for r, _ in node.entries:
                assert _contains(node.cell, r), "entry escapes its cell"
            if node.children is not None:
                quads = node.quadrant_cells()
                for child in node.children:
                    assert child.cell in quads, "child cell is not a quadrant"
                    assert child.parent is node
                    walk(child)

        walk(self.root)
