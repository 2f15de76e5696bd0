"""
Grid value type, cell accuracy and connected-component objects.

A grid is an R x C array of colour indices 0-9 where 0 is background.
Grids are immutable: the backing array is flagged read-only, so a Grid can be
shared freely between hypotheses and worker threads.
"""

from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

NUM_COLORS = 10
MAX_SIDE = 30
BACKGROUND = 0


class GridError(ValueError):
    """Base class for invalid grid construction or comparison."""


class RaggedRows(GridError):
    pass


class ValueOutOfRange(GridError):
    pass


class DimensionTooLarge(GridError):
    pass


class DimensionMismatch(GridError):
    pass


class AccuracyPolicy(str, enum.Enum):
    """Which cells count towards cell accuracy."""

    ALL_CELLS = "all"
    NON_BACKGROUND = "nonbg"


class Connectivity(enum.IntEnum):
    FOUR = 4
    EIGHT = 8


class Grid:
    """Immutable R x C grid of colours."""

    __slots__ = ("_a",)

    def __init__(self, array: np.ndarray):
        a = np.asarray(array)
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise RaggedRows(f"grid must be a nonempty 2-D array, got shape {a.shape}")
        if a.shape[0] > MAX_SIDE or a.shape[1] > MAX_SIDE:
            raise DimensionTooLarge(f"grid {a.shape[0]}x{a.shape[1]} exceeds {MAX_SIDE}x{MAX_SIDE}")
        if a.min() < 0 or a.max() >= NUM_COLORS:
            raise ValueOutOfRange(f"cell values must lie in [0, {NUM_COLORS - 1}]")
        a = a.astype(np.int8)  # always a fresh copy
        a.setflags(write=False)
        self._a = a

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_rows(self) -> list[list[int]]:
        return self._a.astype(int).tolist()

    def __getitem__(self, rc: tuple[int, int]) -> int:
        return int(self._a[rc])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self) -> int:
        return hash((self.shape, self._a.tobytes()))

    def __repr__(self) -> str:
        return f"Grid({self.to_rows()!r})"


def grid_from_rows(rows: Sequence[Sequence[int]]) -> Grid:
    """Build a Grid from a list of rows, validating shape and palette."""
    if not isinstance(rows, (list, tuple)) or len(rows) == 0:
        raise RaggedRows("grid must have at least one row")
    width = None
    for row in rows:
        if not isinstance(row, (list, tuple)) or len(row) == 0:
            raise RaggedRows("every row must be a nonempty list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise RaggedRows(f"row lengths differ ({width} vs {len(row)})")
        for v in row:
            # bool is an int subclass; reject it along with floats and strings
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ValueOutOfRange(f"cell value {v!r} is not an integer")
            if not 0 <= v < NUM_COLORS:
                raise ValueOutOfRange(f"cell value {v} outside [0, {NUM_COLORS - 1}]")
    if len(rows) > MAX_SIDE or width > MAX_SIDE:
        raise DimensionTooLarge(f"grid {len(rows)}x{width} exceeds {MAX_SIDE}x{MAX_SIDE}")
    return Grid(np.asarray(rows, dtype=np.int8))


def _check_same_shape(a: Grid, b: Grid) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"grid shapes differ: {a.shape} vs {b.shape}")


def cell_counts(predicted: Grid, truth: Grid,
                policy: AccuracyPolicy = AccuracyPolicy.ALL_CELLS) -> tuple[int, int]:
    """Return ``(matches, total)`` under ``policy``.

    Under NON_BACKGROUND only cells where the truth is nonzero are counted.
    """
    _check_same_shape(predicted, truth)
    eq = predicted.array == truth.array
    if AccuracyPolicy(policy) is AccuracyPolicy.ALL_CELLS:
        return int(eq.sum()), eq.size
    mask = truth.array != BACKGROUND
    return int((eq & mask).sum()), int(mask.sum())


def cell_accuracy(predicted: Grid, truth: Grid,
                  policy: AccuracyPolicy = AccuracyPolicy.ALL_CELLS) -> float:
    matches, total = cell_counts(predicted, truth, policy)
    if total == 0:
        logger.warning("non-background accuracy on an all-background truth grid; returning 1.0")
        return 1.0
    return matches / total


def aggregate_accuracy(per_example: Iterable[tuple[int, int]]) -> float:
    """Pooled accuracy: total matches over total counted cells.

    This is a micro average, so larger grids weigh more than smaller ones.
    """
    pairs = list(per_example)
    if not pairs:
        raise ValueError("aggregate_accuracy needs at least one example")
    matches = 0
    total = 0
    for m, t in pairs:
        if t < 0 or m < 0 or m > t:
            raise ValueError(f"invalid count pair ({m}, {t})")
        matches += m
        total += t
    if total == 0:
        logger.warning("no counted cells across examples; returning 1.0")
        return 1.0
    return matches / total


def mean_example_accuracy(per_example: Iterable[tuple[int, int]]) -> float:
    """Macro average of per-example accuracies; a diagnostic only."""
    fracs = [m / t if t else 1.0 for m, t in per_example]
    if not fracs:
        raise ValueError("mean_example_accuracy needs at least one example")
    return float(np.mean(fracs))


# ---------------------------------------------------------------------------
# objects


@dataclass(frozen=True)
class ObjectRegion:
    color: int
    cells: frozenset[tuple[int, int]]
    bounding_box: tuple[int, int, int, int]  # (min_row, min_col, max_row, max_col)

    @property
    def size(self) -> int:
        return len(self.cells)

    def sort_key(self):
        return (self.bounding_box[0], self.bounding_box[1], self.color, sorted(self.cells))


_FOUR = ((-1, 0), (1, 0), (0, -1), (0, 1))
_EIGHT = _FOUR + ((-1, -1), (-1, 1), (1, -1), (1, 1))


def extract_objects(grid: Grid, connectivity: Connectivity = Connectivity.FOUR) -> list[ObjectRegion]:
    """Maximal same-colour connected components of the nonzero cells.

    Regions come back ordered by the top-left corner of their bounding box.
    """
    steps = _FOUR if Connectivity(connectivity) is Connectivity.FOUR else _EIGHT
    a = grid.array
    R, C = a.shape
    seen = np.zeros((R, C), dtype=bool)
    regions = []
    for r in range(R):
        for c in range(C):
            color = int(a[r, c])
            if color == BACKGROUND or seen[r, c]:
                continue
            seen[r, c] = True
            queue = deque([(r, c)])
            cells = []
            while queue:
                cr, cc = queue.popleft()
                cells.append((cr, cc))
                for dr, dc in steps:
                    nr, nc = cr + dr, cc + dc
                    if 0 <= nr < R and 0 <= nc < C and not seen[nr, nc] and a[nr, nc] == color:
                        seen[nr, nc] = True
                        queue.append((nr, nc))
            rs = [p[0] for p in cells]
            cs = [p[1] for p in cells]
            regions.append(ObjectRegion(color, frozenset(cells), (min(rs), min(cs), max(rs), max(cs))))
    regions.sort(key=ObjectRegion.sort_key)
    return regions


def _relations(a: ObjectRegion, b: ObjectRegion) -> list[str]:
    ar0, ac0, ar1, ac1 = a.bounding_box
    br0, bc0, br1, bc1 = b.bounding_box
    out = []
    if ar1 < br0:
        out.append("above")
    elif ar0 > br1:
        out.append("below")
    if ac1 < bc0:
        out.append("left-of")
    elif ac0 > bc1:
        out.append("right-of")
    return out


def serialize_objects(grid: Grid, connectivity: Connectivity = Connectivity.FOUR) -> str:
    """Deterministic plain-text description of a grid's objects.

    Each object line gives colour, cell count and bounding box as
    ``(min_row,min_col,max_row,max_col)``; relation lines compare bounding
    boxes for every pair ``i < j``.
    """
    objs = extract_objects(grid, connectivity)
    lines = [f"grid {grid.rows}x{grid.cols} connectivity={int(connectivity)}",
             f"objects: {len(objs)}"]
    for i, o in enumerate(objs, 1):
        bbox = ",".join(str(v) for v in o.bounding_box)
        lines.append(f"object {i}: color={o.color} cells={o.size} bbox=({bbox})")
    rel_lines = []
    for i in range(len(objs)):
        for j in range(i + 1, len(objs)):
            for rel in _relations(objs[i], objs[j]):
                rel_lines.append(f"object {i + 1} {rel} object {j + 1}")
    if rel_lines:
        lines.append("relations:")
        lines.extend(rel_lines)
    return "\n".join(lines) + "\n"
