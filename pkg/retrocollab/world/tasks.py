from __future__ import annotations

import itertools
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from .geometry import GridCell, GridDims, ReachEnvelope, envelope
from .state import RobotState, UnknownRobotError, UnknownTaskError, WorldState

TASK_IDS: tuple[str, ...] = (
    "arrange_cabinet",
    "sweep_floor",
    "make_sandwich",
    "sort_cubes",
    "move_rope",
)

DEFAULT_MAX_STEPS = 15


@dataclass(frozen=True, slots=True)
class RobotSpec:
    name: str
    envelope: ReachEnvelope
    home: GridCell
    tool: str | None = None


@dataclass(frozen=True, slots=True)
class RopeSpec:
    left: str
    right: str
    length: int
    orientation: tuple[int, int, int]
    tray_cells: frozenset[GridCell]


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    dims: GridDims
    robots: tuple[RobotSpec, ...]
    goal: str
    landmarks: dict[str, GridCell] = field(default_factory=dict)
    pads: dict[str, str] = field(default_factory=dict)
    recipe: tuple[str, ...] | None = None
    stack_cell: GridCell | None = None
    handles: tuple[str, str] | None = None
    behind_door: frozenset[str] = frozenset()
    goal_cells: dict[str, GridCell] = field(default_factory=dict)
    broom: str | None = None
    dustpan: str | None = None
    bin_cell: GridCell | None = None
    trash: tuple[str, ...] = ()
    rope: RopeSpec | None = None
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self) -> None:
        if len(self.robots) < 2:
            raise ValueError(f"{self.task_id}: a task needs at least two robots")
        special = list(self.landmarks.values())
        special += [robot.home for robot in self.robots]
        special += [robot.envelope.min_cell for robot in self.robots]
        special += [robot.envelope.max_cell for robot in self.robots]
        if self.rope is not None:
            special += list(self.rope.tray_cells)
        outside = [cell for cell in special if not self.dims.contains(cell)]
        if outside:
            raise ValueError(f"{self.task_id}: special cells outside the grid: {outside}")
        for robot in self.robots:
            if not robot.envelope.contains(robot.home):
                raise ValueError(f"{self.task_id}: {robot.name} starts outside its reach")

    @property
    def roster(self) -> tuple[str, ...]:
        return tuple(robot.name for robot in self.robots)

    def robot_spec(self, name: str) -> RobotSpec:
        for robot in self.robots:
            if robot.name == name:
                return robot
        raise UnknownRobotError(name)

    @property
    def container_cells(self) -> frozenset[GridCell]:
        return frozenset({self.stack_cell}) if self.stack_cell is not None else frozenset()

    def resolve_target(self, target: str | GridCell | None) -> GridCell | None:
        if target is None:
            return None
        if isinstance(target, GridCell):
            return target
        return self.landmarks.get(target)


def load_task(task_id: str, seed: int) -> tuple[TaskSpec, WorldState]:
    """Build the task and its seeded initial state.

    The seed only picks an ordering of each task's candidate object cells; robots,
    pads, handles, tray, bin and stack are fixed per task. Seed 0 is the identity layout.
    """

    try:
        builder = _BUILDERS[task_id]
    except KeyError:
        raise UnknownTaskError(task_id) from None
    return builder(seed)


def seeded_layout(
    candidates: Sequence[GridCell], count: int, seed: int
) -> tuple[GridCell, ...]:
    orderings = list(itertools.permutations(candidates, count))
    return orderings[seed % len(orderings)]


def _initial_state(
    spec: TaskSpec,
    objects: dict[str, GridCell],
    *,
    door_open: bool | None = None,
    stack: tuple[str, ...] | None = None,
) -> WorldState:
    robots = {
        robot.name: RobotState(name=robot.name, effector=robot.home, held=robot.tool)
        for robot in spec.robots
    }
    tools = tuple(robot.tool for robot in spec.robots if robot.tool)
    return WorldState(
        task_id=spec.task_id,
        t=0,
        robots=robots,
        object_names=tuple(objects) + tools,
        free_objects=dict(objects),
        door_open=door_open,
        stack=stack,
    )


def _cells(*coords: tuple[int, int, int]) -> tuple[GridCell, ...]:
    return tuple(GridCell(*c) for c in coords)


def _sort_cubes(seed: int) -> tuple[TaskSpec, WorldState]:
    spec = TaskSpec(
        task_id="sort_cubes",
        dims=GridDims(),
        robots=(
            RobotSpec("Alice", envelope((0, 0, 0), (4, 5, 3)), GridCell(1, 0, 2)),
            RobotSpec("Bob", envelope((2, 0, 0), (5, 5, 3)), GridCell(3, 0, 2)),
            RobotSpec("Chad", envelope((3, 0, 0), (7, 5, 3)), GridCell(6, 0, 2)),
        ),
        goal=(
            "There are three cubes with different colors on the table. Pick each cube and place "
            "it on the pad with the same color: cube_red on pad_red, cube_green on pad_green, "
            "cube_blue on pad_blue."
        ),
        landmarks={
            "pad_red": GridCell(0, 4, 0),
            "pad_green": GridCell(3, 5, 0),
            "pad_blue": GridCell(7, 4, 0),
        },
        pads={"cube_red": "pad_red", "cube_green": "pad_green", "cube_blue": "pad_blue"},
    )
    cubes = ("cube_red", "cube_green", "cube_blue")
    layout = seeded_layout(_cells((3, 1, 0), (4, 2, 0), (3, 3, 0)), len(cubes), seed)
    return spec, _initial_state(spec, dict(zip(cubes, layout, strict=True)))


def _arrange_cabinet(seed: int) -> tuple[TaskSpec, WorldState]:
    spec = TaskSpec(
        task_id="arrange_cabinet",
        dims=GridDims(),
        robots=(
            RobotSpec("Alice", envelope((0, 0, 0), (3, 5, 3)), GridCell(1, 1, 2)),
            RobotSpec("Bob", envelope((4, 0, 0), (7, 5, 3)), GridCell(6, 1, 2)),
            RobotSpec("Chad", envelope((2, 0, 0), (5, 5, 3)), GridCell(4, 0, 3)),
        ),
        goal=(
            "Pick the cup from the cabinet and place it on the table at cup_target. The cabinet "
            "door is closed: two robots must open it together by each executing OPEN at one of "
            "the two handles (handle_left, handle_right) in the same step; the third robot is "
            "responsible for the cup."
        ),
        landmarks={
            "handle_left": GridCell(2, 4, 1),
            "handle_right": GridCell(5, 4, 1),
            "cup_target": GridCell(3, 1, 0),
        },
        handles=("handle_left", "handle_right"),
        behind_door=frozenset({"cup"}),
        goal_cells={"cup": GridCell(3, 1, 0)},
    )
    (cup_cell,) = seeded_layout(_cells((3, 5, 1), (4, 5, 1), (3, 5, 0), (4, 5, 0)), 1, seed)
    return spec, _initial_state(spec, {"cup": cup_cell}, door_open=False)


def _sweep_floor(seed: int) -> tuple[TaskSpec, WorldState]:
    spec = TaskSpec(
        task_id="sweep_floor",
        dims=GridDims(),
        robots=(
            RobotSpec("Alice", envelope((0, 0, 0), (7, 4, 3)), GridCell(2, 0, 2), tool="broom"),
            RobotSpec("Bob", envelope((0, 1, 0), (7, 5, 3)), GridCell(5, 1, 2), tool="dustpan"),
        ),
        goal=(
            "Three objects (chips, paper, can) are spread on the table. Alice holds the broom and "
            "Bob holds the dustpan. Sweep every object into the dustpan, then dump the dustpan "
            "into the bin."
        ),
        landmarks={"bin": GridCell(7, 5, 1)},
        broom="broom",
        dustpan="dustpan",
        bin_cell=GridCell(7, 5, 1),
        trash=("chips", "paper", "can"),
    )
    layout = seeded_layout(
        _cells((1, 2, 0), (3, 3, 0), (5, 2, 0), (6, 1, 0)), len(spec.trash), seed
    )
    return spec, _initial_state(spec, dict(zip(spec.trash, layout, strict=True)))


def _make_sandwich(seed: int) -> tuple[TaskSpec, WorldState]:
    recipe = ("bread_slice1", "cheese", "tomato", "bread_slice2")
    spec = TaskSpec(
        task_id="make_sandwich",
        dims=GridDims(),
        robots=(
            RobotSpec("Chad", envelope((0, 0, 0), (4, 5, 3)), GridCell(1, 0, 2)),
            RobotSpec("Dave", envelope((3, 0, 0), (7, 5, 3)), GridCell(6, 0, 2)),
        ),
        goal=(
            "Ingredients are spread on the table. Stack them on the cutting_board in exactly this "
            "order, bottom to top: " + ", ".join(recipe) + ". Other ingredients stay off the stack."
        ),
        landmarks={"cutting_board": GridCell(3, 4, 0)},
        recipe=recipe,
        stack_cell=GridCell(3, 4, 0),
    )
    names = recipe + ("lettuce",)
    layout = seeded_layout(
        _cells((1, 1, 0), (6, 1, 0), (2, 2, 0), (5, 2, 0), (0, 3, 0), (7, 3, 0)),
        len(names),
        seed,
    )
    return spec, _initial_state(spec, dict(zip(names, layout, strict=True)), stack=())


def _move_rope(seed: int) -> tuple[TaskSpec, WorldState]:
    tray = frozenset(GridCell(x, y, 0) for x in range(2, 6) for y in (4, 5))
    rope = RopeSpec("rope_l", "rope_r", length=3, orientation=(3, 0, 0), tray_cells=tray)
    spec = TaskSpec(
        task_id="move_rope",
        dims=GridDims(),
        robots=(
            RobotSpec("Alice", envelope((0, 0, 0), (4, 5, 3)), GridCell(1, 0, 2)),
            RobotSpec("Bob", envelope((3, 0, 0), (7, 5, 3)), GridCell(6, 0, 2)),
        ),
        goal=(
            "A rope lies on the table with endpoints rope_l and rope_r. Pick it up with two robots "
            "and place it on the tray (cells x=2..5, y=4..5, z=0) so that rope_r - rope_l equals "
            "(3,0,0) or (-3,0,0). The endpoints are tied together: they must always be moved in "
            "the same step, and never more than 3 cells apart."
        ),
        rope=rope,
    )
    (anchor,) = seeded_layout(_cells((0, 1, 0), (1, 1, 0), (0, 2, 0), (1, 2, 0)), 1, seed)
    objects = {"rope_l": anchor, "rope_r": anchor.offset(*rope.orientation)}
    return spec, _initial_state(spec, objects)


_BUILDERS: dict[str, Callable[[int], tuple[TaskSpec, WorldState]]] = {
    "arrange_cabinet": _arrange_cabinet,
    "sweep_floor": _sweep_floor,
    "make_sandwich": _make_sandwich,
    "sort_cubes": _sort_cubes,
    "move_rope": _move_rope,
}
