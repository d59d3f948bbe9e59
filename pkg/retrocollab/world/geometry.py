from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

UNIT_STEPS: tuple[tuple[int, int, int], ...] = (
    (1, 0, 0),
    (-1, 0, 0),
    (0, 1, 0),
    (0, -1, 0),
    (0, 0, 1),
    (0, 0, -1),
)


@dataclass(frozen=True, slots=True, order=True)
class GridCell:
    """Integer lattice coordinate, one unit per grid cell."""

    x: int
    y: int
    z: int

    def offset(self, dx: int, dy: int, dz: int) -> GridCell:
        return GridCell(self.x + dx, self.y + dy, self.z + dz)

    def delta(self, other: GridCell) -> tuple[int, int, int]:
        """Vector pointing from this cell to ``other``."""

        return (other.x - self.x, other.y - self.y, other.z - self.z)

    def l1(self, other: GridCell) -> int:
        return abs(self.x - other.x) + abs(self.y - other.y) + abs(self.z - other.z)

    def is_adjacent(self, other: GridCell) -> bool:
        return self.l1(other) == 1

    def neighbors(self) -> Iterator[GridCell]:
        for dx, dy, dz in UNIT_STEPS:
            yield self.offset(dx, dy, dz)

    def render(self) -> str:
        return f"({self.x},{self.y},{self.z})"

    def as_list(self) -> list[int]:
        return [self.x, self.y, self.z]

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True, slots=True)
class GridDims:
    x: int = 8
    y: int = 6
    z: int = 4

    def contains(self, cell: GridCell) -> bool:
        return 0 <= cell.x < self.x and 0 <= cell.y < self.y and 0 <= cell.z < self.z

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True, slots=True)
class ReachEnvelope:
    """Inclusive axis-aligned box a robot's effector may occupy (the IK stand-in)."""

    min_cell: GridCell
    max_cell: GridCell

    def __post_init__(self) -> None:
        lo, hi = self.min_cell, self.max_cell
        if lo.x > hi.x or lo.y > hi.y or lo.z > hi.z:
            raise ValueError(f"envelope corners out of order: {lo} > {hi}")

    def contains(self, cell: GridCell) -> bool:
        lo, hi = self.min_cell, self.max_cell
        return lo.x <= cell.x <= hi.x and lo.y <= cell.y <= hi.y and lo.z <= cell.z <= hi.z

    def render(self) -> str:
        return f"{self.min_cell.render()}-{self.max_cell.render()}"


def envelope(lo: tuple[int, int, int], hi: tuple[int, int, int]) -> ReachEnvelope:
    return ReachEnvelope(GridCell(*lo), GridCell(*hi))


def path_is_connected(path: list[GridCell] | tuple[GridCell, ...]) -> bool:
    """Consecutive waypoints are equal (a hold) or 6-neighbours."""

    return all(a.l1(b) <= 1 for a, b in zip(path, path[1:], strict=False))
