"""R-tree with quadratic node split (the GiST analog).

Insertion descends by least MBR enlargement and splits overflowing nodes
with the quadratic seed/next heuristic; deletion condenses underflowing
nodes by reinserting their leaf entries.  Bulk loading packs rows bottom
up by sort-tile order so every node respects the fill bounds and all
leaves share one depth.

Tie-breaking is deterministic everywhere: enlargement, then area, then
entry order (split assignment additionally prefers the emptier group).
"""

from __future__ import annotations

import math

from .base import QueryStats, rects_overlap_t

RectT = tuple[float, float, float, float]


def _area(r: RectT) -> float:
    return (r[2] - r[0]) * (r[3] - r[1])


def _union(a: RectT, b: RectT) -> RectT:
    return (a[0] if a[0] < b[0] else b[0],
            a[1] if a[1] < b[1] else b[1],
            a[2] if a[2] > b[2] else b[2],
            a[3] if a[3] > b[3] else b[3])


def _union_all(rects) -> RectT:
    it = iter(rects)
    out = next(it)
    for r in it:
        out = _union(out, r)
    return out


class _Node:
    __slots__ = ("leaf", "entries", "parent", "mbr")

    def __init__(self, leaf: bool):
        self.leaf = leaf
        # (rect, child): child is a row id in leaves, a _Node above them
        self.entries: list[tuple[RectT, object]] = []
        self.parent: _Node | None = None
        self.mbr: RectT | None = None

    def recompute_mbr(self) -> None:
        self.mbr = _union_all(r for r, _ in self.entries) if self.entries else None


class RTreeIndex:
    def __init__(self, max_entries: int = 16, min_entries: int = 6):
        self.max_entries = max_entries
        self.min_entries = min_entries
        self.root = _Node(leaf=True)
        self.row_leaf: dict[int, _Node] = {}

    # -- queries ---------------------------------------------------------

    def query(self, rect: RectT, stats: QueryStats) -> list[int]:
        out: list[int] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            stats.nodes_visited += 1
            if node.leaf:
                for r, rid in node.entries:
                    stats.rows_touched += 1
                    if rects_overlap_t(r, rect):
                        out.append(rid)
            else:
                for r, child in node.entries:
                    if rects_overlap_t(r, rect):
                        stack.append(child)
        return out

    # -- insertion -------------------------------------------------------

    def insert(self, row_id: int, rect: RectT, stats: QueryStats | None = None) -> None:
        leaf = self._choose_leaf(rect)
        leaf.entries.append((rect, row_id))
        self.row_leaf[row_id] = leaf
        self._adjust_upward(leaf)

    def _choose_leaf(self, rect: RectT) -> _Node:
        node = self.root
        while not node.leaf:
            best = None
            best_key = None
            for r, child in node.entries:
                enlarged = _area(_union(r, rect)) - _area(r)
                key = (enlarged, _area(r))
                if best_key is None or key < best_key:
                    best_key = key
                    best = child
            node = best
        return node

    def _adjust_upward(self, node: _Node) -> None:
        while True:
            node.recompute_mbr()
            parent = node.parent
            if len(node.entries) > self.max_entries:
                sibling = self._split(node)
                if parent is None:
                    new_root = _Node(leaf=False)
                    new_root.entries = [(node.mbr, node), (sibling.mbr, sibling)]
                    node.parent = new_root
                    sibling.parent = new_root
                    new_root.recompute_mbr()
                    self.root = new_root
                    return
                self._refresh_child_rect(parent, node)
                parent.entries.append((sibling.mbr, sibling))
                sibling.parent = parent
                node = parent
            else:
                if parent is None:
                    return
                self._refresh_child_rect(parent, node)
                node = parent

    @staticmethod
    def _refresh_child_rect(parent: _Node, child: _Node) -> None:
        for i, (_, c) in enumerate(parent.entries):
            if c is child:
                parent.entries[i] = (child.mbr, child)
                return
        raise AssertionError("child entry missing from parent")

    def _split(self, node: _Node) -> _Node:
        """Quadratic split; both halves end with at least min_entries."""
        entries = node.entries
        n = len(entries)
        # seeds: the pair wasting the most area when grouped together
        best_waste = -math.inf
        si = sj = 0
        for i in range(n):
            ri = entries[i][0]
            ai = _area(ri)
            for j in range(i + 1, n):
                rj = entries[j][0]
                waste = _area(_union(ri, rj)) - ai - _area(rj)
                if waste > best_waste:
                    best_waste = waste
                    si, sj = i, j
        g1 = [entries[si]]
        g2 = [entries[sj]]
        mbr1 = entries[si][0]
        mbr2 = entries[sj][0]
        remaining = [e for k, e in enumerate(entries) if k != si and k != sj]
        while remaining:
            if len(g1) + len(remaining) == self.min_entries:
                for e in remaining:
                    g1.append(e)
                    mbr1 = _union(mbr1, e[0])
                break
            if len(g2) + len(remaining) == self.min_entries:
                for e in remaining:
                    g2.append(e)
                    mbr2 = _union(mbr2, e[0])
                break
            # next: the entry with the strongest group preference
            a1 = _area(mbr1)
            a2 = _area(mbr2)
            best_idx = 0
            best_diff = -math.inf
            best_d = (0.0, 0.0)
            for k, (r, _) in enumerate(remaining):
                d1 = _area(_union(mbr1, r)) - a1
                d2 = _area(_union(mbr2, r)) - a2
                diff = abs(d1 - d2)
                if diff > best_diff:
                    best_diff = diff
                    best_idx = k
                    best_d = (d1, d2)
            entry = remaining.pop(best_idx)
            d1, d2 = best_d
            if d1 < d2:
                target = 1
            elif d2 < d1:
                target = 2
            elif a1 < a2:
                target = 1
            elif a2 < a1:
                target = 2
            else:
                target = 1 if len(g1) <= len(g2) else 2
            if target == 1:
                g1.append(entry)
                mbr1 = _union(mbr1, entry[0])
            else:
                g2.append(entry)
                mbr2 = _union(mbr2, entry[0])
        node.entries = g1
        node.recompute_mbr()
        sibling = _Node(leaf=node.leaf)
        sibling.entries = g2
        sibling.recompute_mbr()
        self._reparent(node)
        self._reparent(sibling)
        return sibling

    def _reparent(self, node: _Node) -> None:
        if node.leaf:
            for _, rid in node.entries:
                self.row_leaf[rid] = node
        else:
            for _, child in node.entries:
                child.parent = node

    # -- deletion --------------------------------------------------------

    def remove(self, row_id: int, rect: RectT, stats: QueryStats | None = None) -> None:
        leaf = self.row_leaf.pop(row_id)
        leaf.entries = [e for e in leaf.entries if e[1] != row_id]
        self._condense(leaf)

    def _condense(self, leaf: _Node) -> None:
        orphans: list[tuple[RectT, int]] = []
        node = leaf
        while node.parent is not None:
            parent = node.parent
            if len(node.entries) < self.min_entries:
                parent.entries = [e for e in parent.entries if e[1] is not node]
                self._collect_leaf_entries(node, orphans)
            else:
                node.recompute_mbr()
                self._refresh_child_rect(parent, node)
            node = parent
        node.recompute_mbr()
        while not self.root.leaf and len(self.root.entries) == 1:
            self.root = self.root.entries[0][1]
            self.root.parent = None
        if not self.root.leaf and not self.root.entries:
            self.root = _Node(leaf=True)
        for r, rid in orphans:
            self.insert(rid, r)

    def _collect_leaf_entries(self, node: _Node, out: list) -> None:
        if node.leaf:
            for r, rid in node.entries:
                self.row_leaf.pop(rid, None)
                out.append((r, rid))
        else:
            for _, child in node.entries:
                self._collect_leaf_entries(child, out)

    # -- bulk loading ----------------------------------------------------

    def bulk_build(self, items: list[tuple[RectT, int]]) -> None:
        """Sort-tile packing: x-sorted slabs, y-sorted within a slab, spread
        evenly so every node lands inside the fill bounds."""
        if not items:
            self.root = _Node(leaf=True)
            self.row_leaf = {}
            return
        nodes = self._pack_level(list(items), leaf=True)
        while len(nodes) > 1:
            level_items = [(n.mbr, n) for n in nodes]
            nodes = self._pack_level(level_items, leaf=False)
        self.root = nodes[0]
        self.root.parent = None

    def _pack_level(self, items: list[tuple[RectT, object]], leaf: bool) -> list[_Node]:
        n = len(items)
        if n <= self.max_entries:
            node = _Node(leaf=leaf)
            node.entries = items
            node.recompute_mbr()
            self._reparent(node)
            return [node]
        target_nodes = math.ceil(n / self.max_entries)
        slabs = math.ceil(math.sqrt(target_nodes))
        items = sorted(items, key=lambda e: (e[0][0] + e[0][2]))
        base, rem = divmod(n, slabs)
        nodes: list[_Node] = []
        pos = 0
        for s in range(slabs):
            size = base + (1 if s < rem else 0)
            slab = sorted(items[pos:pos + size], key=lambda e: (e[0][1] + e[0][3]))
            pos += size
            groups = math.ceil(len(slab) / self.max_entries)
            gbase, grem = divmod(len(slab), groups)
            gpos = 0
            for g in range(groups):
                gsize = gbase + (1 if g < grem else 0)
                node = _Node(leaf=leaf)
                node.entries = slab[gpos:gpos + gsize]
                gpos += gsize
                node.recompute_mbr()
                self._reparent(node)
                nodes.append(node)
        return nodes

    # -- invariant helpers (used by tests) --------------------------------

    def check_invariants(self) -> None:
        """Fill bounds, tight parent MBRs, equal leaf depth."""
        depths: set[int] = set()

        def walk(node: _Node, depth: int):
            if node is not self.root:
                assert self.min_entries <= len(node.entries) <= self.max_entries, \
                    f"fill violation: {len(node.entries)} entries"
            else:
                assert len(node.entries) <= self.max_entries
            if node.entries:
                assert node.mbr == _union_all(r for r, _ in node.entries), "loose MBR"
            if node.leaf:
                depths.add(depth)
                return
            for r, child in node.entries:
                assert child.parent is node, "broken parent link"
                assert r == child.mbr, "stale child rect"
                walk(child, depth + 1)

        walk(self.root, 0)
        assert len(depths) <= 1, f"leaves at unequal depths: {depths}"
