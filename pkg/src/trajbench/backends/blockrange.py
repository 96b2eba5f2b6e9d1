"""Block-range index (the BRIN analog).

Rows are grouped into ranges of R consecutive row ids in insertion order;
each range keeps a summary MBR of its rows.  A query scans every summary,
then tests the rows of overlapping ranges individually.  Deletes only
tombstone rows (summaries stay fat until an explicit ``summarize``
rebuild), so maintenance cost is constant regardless of table size.
"""

from __future__ import annotations

from .base import QueryStats, StoredRow, rects_overlap_t

RectT = tuple[float, float, float, float]


class _Range:
    __slots__ = ("slots", "summary")

    def __init__(self):
        self.slots: list[int] = []
        self.summary: RectT | None = None

    def extend_summary(self, rect: RectT) -> None:
        if self.summary is None:
            self.summary = rect
        else:
            s = self.summary
            self.summary = (s[0] if s[0] < rect[0] else rect[0],
                            s[1] if s[1] < rect[1] else rect[1],
                            s[2] if s[2] > rect[2] else rect[2],
                            s[3] if s[3] > rect[3] else rect[3])


class BlockRangeIndex:
    def __init__(self, range_size: int, rows: dict[int, StoredRow]):
        self.range_size = range_size
        self.rows = rows          # shared heap; liveness = membership
        self.ranges: list[_Range] = []

    def range_count(self) -> int:
        return len(self.ranges)

    # -- maintenance -----------------------------------------------------

    def insert(self, row_id: int, rect: RectT, stats: QueryStats | None = None) -> None:
        # append-only: touch the tail summary, open a new range at the
        # boundary; never more than 2 range touches per row
        if not self.ranges or len(self.ranges[-1].slots) >= self.range_size:
            self.ranges.append(_Range())
            if stats is not None:
                stats.ranges_scanned += 1
        tail = self.ranges[-1]
        tail.slots.append(row_id)
        tail.extend_summary(rect)
        if stats is not None:
            stats.ranges_scanned += 1

    def remove(self, row_id: int, rect: RectT, stats: QueryStats | None = None) -> None:
        # tombstone only: the heap row disappears, the summary stays fat
        pass

    def summarize(self) -> None:
        """Rebuild every summary as the tight union of its live rows."""
        for rng in self.ranges:
            rng.summary = None
            for rid in rng.slots:
                row = self.rows.get(rid)
                if row is not None:
                    rng.extend_summary(row.rect)

    # -- queries ---------------------------------------------------------

    def query(self, rect: RectT, stats: QueryStats) -> list[int]:
        out: list[int] = []
        for rng in self.ranges:
            stats.ranges_scanned += 1
            if rng.summary is None or not rects_overlap_t(rng.summary, rect):
                continue
            for rid in rng.slots:
                row = self.rows.get(rid)
                if row is None:
                    continue  # tombstoned
                stats.rows_touched += 1
                if rects_overlap_t(row.rect, rect):
                    out.append(rid)
        return out

    # -- bulk loading ----------------------------------------------------

    def bulk_build(self, items: list[tuple[RectT, int]]) -> None:
        for rect, rid in items:
            self.insert(rid, rect)
