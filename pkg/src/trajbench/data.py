"""Dataset container and the trajectory CSV interchange format.

CSV schema: header ``traj_id,seq,x,y``; rows grouped by traj_id with
consecutive seq starting at 0; at least 2 rows per trajectory; ``.``
decimal separator, LF line endings, UTF-8.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateTrajectory, MalformedInput
from .geometry import Rect, Trajectory, mbr_of, mbr_union

CSV_HEADER = "traj_id,seq,x,y"


class Dataset:
    """An ordered collection of trajectories with unique ids."""

    def __init__(self, trajectories: Sequence[Trajectory], name: str = "dataset",
                 source: str = ""):
        self.trajectories = list(trajectories)
        self.name = name
        self.source = source
        seen: set[str] = set()
        for t in self.trajectories:
            if t.id in seen:
                raise DuplicateTrajectory(f"duplicate trajectory id {t.id!r}")
            seen.add(t.id)
        self._ids = seen
        self._mbr_arrays: tuple[np.ndarray, ...] | None = None
        self._bbox: Rect | None = None

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def __getitem__(self, i: int) -> Trajectory:
        return self.trajectories[i]

    @property
    def ids(self) -> set[str]:
        return self._ids

    def mbr_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Per-trajectory MBRs as four contiguous arrays, computed once."""
        if self._mbr_arrays is None:
            m = len(self.trajectories)
            minx = np.empty(m, dtype=np.float64)
            miny = np.empty(m, dtype=np.float64)
            maxx = np.empty(m, dtype=np.float64)
            maxy = np.empty(m, dtype=np.float64)
            for i, t in enumerate(self.trajectories):
                r = mbr_of(t)
                minx[i] = r.min_x
                miny[i] = r.min_y
                maxx[i] = r.max_x
                maxy[i] = r.max_y
            self._mbr_arrays = (minx, miny, maxx, maxy)
        return self._mbr_arrays

    def bbox(self) -> Rect:
        """MBR of the whole dataset."""
        if self._bbox is None:
            self._bbox = mbr_union(mbr_of(t) for t in self.trajectories)
        return self._bbox

    def total_points(self) -> int:
        return sum(t.n_points for t in self.trajectories)

    def total_segments(self) -> int:
        return sum(t.n_segments for t in self.trajectories)

    def mean_segment_length(self) -> float:
        total = 0.0
        count = 0
        for t in self.trajectories:
            dx = np.diff(t.xs)
            dy = np.diff(t.ys)
            total += float(np.sqrt(dx * dx + dy * dy).sum())
            count += t.n_segments
        return total / count if count else 0.0


def _fmt(v: float) -> str:
    # repr of a Python float is the shortest round-tripping decimal form,
    # which keeps generated files byte-identical across runs.
    return repr(float(v))


def write_csv(ds: Dataset | Iterable[Trajectory], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(CSV_HEADER + "\n")
        for t in ds:
            for seq in range(t.n_points):
                f.write(f"{t.id},{seq},{_fmt(t.xs[seq])},{_fmt(t.ys[seq])}\n")


def read_csv(path: str | Path, name: str | None = None) -> Dataset:
    """Parse a trajectory CSV; malformed rows raise line-numbered errors."""
    path = Path(path)
    trajectories: list[Trajectory] = []
    seen: set[str] = set()
    cur_id: str | None = None
    cur_xs: list[float] = []
    cur_ys: list[float] = []
    cur_start_line = 0

    def flush(line_no: int):
        nonlocal cur_id, cur_xs, cur_ys
        if cur_id is None:
            return
        if len(cur_xs) < 2:
            raise MalformedInput(
                f"trajectory {cur_id!r} has only {len(cur_xs)} point(s), need >= 2",
                line=cur_start_line)
        coords = np.column_stack((np.asarray(cur_xs), np.asarray(cur_ys)))
        trajectories.append(Trajectory(cur_id, coords))
        cur_id = None
        cur_xs = []
        cur_ys = []

    with path.open("r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n").rstrip("\r")
        if header != CSV_HEADER:
            raise MalformedInput(f"expected header {CSV_HEADER!r}, got {header!r}", line=1)
        for line_no, raw in enumerate(f, start=2):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise MalformedInput(f"expected 4 fields, got {len(parts)}", line=line_no)
            tid, seq_s, x_s, y_s = parts
            if not tid:
                raise MalformedInput("empty traj_id", line=line_no)
            try:
                seq = int(seq_s)
            except ValueError:
                raise MalformedInput(f"non-integer seq {seq_s!r}", line=line_no) from None
            try:
                x = float(x_s)
                y = float(y_s)
            except ValueError:
                raise MalformedInput(f"non-numeric coordinate in {line!r}", line=line_no) from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise MalformedInput(f"non-finite coordinate in {line!r}", line=line_no)
            if tid != cur_id:
                flush(line_no)
                if tid in seen:
                    raise MalformedInput(
                        f"trajectory {tid!r} appears in more than one row group", line=line_no)
                seen.add(tid)
                cur_id = tid
                cur_start_line = line_no
                if seq != 0:
                    raise MalformedInput(
                        f"trajectory {tid!r} must start at seq 0, got {seq}", line=line_no)
            else:
                expected = len(cur_xs)
                if seq != expected:
                    raise MalformedInput(
                        f"gap in seq for trajectory {tid!r}: expected {expected}, got {seq}",
                        line=line_no)
            cur_xs.append(x)
            cur_ys.append(y)
    flush(-1)
    if not trajectories:
        raise MalformedInput("file contains no trajectories")
    return Dataset(trajectories, name=name or path.stem, source=str(path))
