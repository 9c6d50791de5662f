"""The taxi gridworld: a 5x5 grid with walls, four named depots, and a
passenger to ferry around.

State variables are the taxi's cell, the passenger's cell, and whether
the passenger rides in the taxi (in which case both share a cell), for
650 states total: 25 x 25 passenger-outside combinations plus 25
co-located in-taxi states. Movement blocked by a wall or the grid edge
self-loops; every step costs -1.

The wall layout ships as data so alternative maps can be swapped in; the
default is the classic four-depot map with three two-cell interior wall
segments.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .abstraction import RewardMode
from .core import BaseMDP, Option, StateSpace, Variable
from .hierarchy import Hierarchy, PlanQuery
from .symbols import GroundingSet

Cell = tuple[int, int]

MOVES: tuple[tuple[str, int, int], ...] = (
    ("move-north", 0, 1),
    ("move-south", 0, -1),
    ("move-east", 1, 0),
    ("move-west", -1, 0),
)
ACTIONS: tuple[str, ...] = tuple(m[0] for m in MOVES) + ("pick-up", "put-down")

VARIABLES: tuple[Variable, ...] = (
    Variable("taxi-x", tuple(range(5))),
    Variable("taxi-y", tuple(range(5))),
    Variable("pass-x", tuple(range(5))),
    Variable("pass-y", tuple(range(5))),
    Variable("in-taxi", (False, True)),
)


def _norm_wall(a: Cell, b: Cell) -> tuple[Cell, Cell]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class TaxiLayout:
    """Grid geometry: size, blocked cell adjacencies, named depot cells."""

    width: int = 5
    height: int = 5
    walls: frozenset[tuple[Cell, Cell]] = frozenset()
    depots: tuple[tuple[str, Cell], ...] = ()

    def blocked(self, a: Cell, b: Cell) -> bool:
        return _norm_wall(a, b) in self.walls

    def in_bounds(self, c: Cell) -> bool:
        return 0 <= c[0] < self.width and 0 <= c[1] < self.height

    def depot_cell(self, name: str) -> Cell:
        return dict(self.depots)[name]

    def depot_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.depots)

    def depot_of_cell(self, cell: Cell) -> str | None:
        for name, c in self.depots:
            if c == cell:
                return name
        return None


DEFAULT_LAYOUT = TaxiLayout(
    walls=frozenset(
        _norm_wall(a, b)
        for a, b in [
            ((1, 4), (2, 4)),
            ((1, 3), (2, 3)),
            ((0, 1), (1, 1)),
            ((0, 0), (1, 0)),
            ((2, 1), (3, 1)),
            ((2, 0), (3, 0)),
        ]
    ),
    depots=(
        ("red", (0, 4)),
        ("green", (4, 4)),
        ("blue", (3, 0)),
        ("yellow", (0, 0)),
    ),
)


def build_taxi(layout: TaxiLayout = DEFAULT_LAYOUT, gamma: float = 1.0) -> BaseMDP:
    """The 650-state deterministic taxi MDP.

    Pick-up applies when taxi and passenger share a cell with the
    passenger outside; put-down applies while the passenger rides.
    """
    cells = [(x, y) for x in range(layout.width) for y in range(layout.height)]
    assignments: list[tuple] = []
    for tx, ty in cells:
        for px, py in cells:
            assignments.append((tx, ty, px, py, False))
    for tx, ty in cells:
        assignments.append((tx, ty, tx, ty, True))
    space = StateSpace(
        level_index=0,
        num_states=len(assignments),
        variables=VARIABLES,
        assignments=tuple(assignments),
    )

    def moved(cell: Cell, dx: int, dy: int) -> Cell:
        target = (cell[0] + dx, cell[1] + dy)
        if not layout.in_bounds(target) or layout.blocked(cell, target):
            return cell
        return target

    transition: dict[tuple[int, str], int] = {}
    reward: dict[tuple[int, str, int], float] = {}
    for sid, (tx, ty, px, py, riding) in enumerate(assignments):
        for name, dx, dy in MOVES:
            nx, ny = moved((tx, ty), dx, dy)
            if riding:
                nxt = space.state_of((nx, ny, nx, ny, True))
            else:
                nxt = space.state_of((nx, ny, px, py, False))
            assert nxt is not None
            transition[(sid, name)] = nxt
            reward[(sid, name, nxt)] = -1.0
        if not riding and (tx, ty) == (px, py):
            nxt = space.state_of((tx, ty, tx, ty, True))
            assert nxt is not None
            transition[(sid, "pick-up")] = nxt
            reward[(sid, "pick-up", nxt)] = -1.0
        if riding:
            nxt = space.state_of((tx, ty, tx, ty, False))
            assert nxt is not None
            transition[(sid, "put-down")] = nxt
            reward[(sid, "put-down", nxt)] = -1.0
    return BaseMDP(
        space=space, actions=ACTIONS, transition=transition, reward=reward, gamma=gamma
    )


def grid_distances(layout: TaxiLayout, target: Cell) -> dict[Cell, int]:
    """Breadth-first distances to ``target`` over the walled grid."""
    dist = {target: 0}
    queue = deque([target])
    while queue:
        cell = queue.popleft()
        for _, dx, dy in MOVES:
            nxt = (cell[0] - dx, cell[1] - dy)
            if not layout.in_bounds(nxt) or layout.blocked(cell, nxt):
                continue
            if nxt not in dist:
                dist[nxt] = dist[cell] + 1
                queue.append(nxt)
    return dist


def taxi_options_level1(
    mdp: BaseMDP, layout: TaxiLayout = DEFAULT_LAYOUT
) -> list[Option]:
    """The first option set: shortest-path navigation to each depot, plus
    pick-up and put-down.

    Navigation starts anywhere and stops when the taxi reaches the depot;
    a riding passenger arrives with it. Pick-up starts whenever taxi and
    passenger share a cell and stops once the passenger rides; put-down
    starts anywhere and stops once the passenger is outside.
    """
    space = mdp.space
    everything = GroundingSet.of(0, space.states)
    options: list[Option] = []
    for depot in layout.depot_names():
        cell = layout.depot_cell(depot)
        dist = grid_distances(layout, cell)
        policy: dict[int, str] = {}
        for sid in space.states:
            tx, ty, *_ = space.assignment(sid)
            here = (tx, ty)
            if here == cell:
                continue
            for name, dx, dy in MOVES:
                nxt = (tx + dx, ty + dy)
                if (
                    layout.in_bounds(nxt)
                    and not layout.blocked(here, nxt)
                    and dist[nxt] == dist[here] - 1
                ):
                    policy[sid] = name
                    break
        options.append(
            Option(
                name=f"drive-to-{depot}",
                initiation=everything,
                termination=space.where(**{"taxi-x": cell[0], "taxi-y": cell[1]}),
                policy=policy,
            )
        )
    colocated = GroundingSet.of(
        0,
        [
            s
            for s in space.states
            if space.assignment(s)[0:2] == space.assignment(s)[2:4]
        ],
    )
    riding = space.where(**{"in-taxi": True})
    options.append(
        Option(
            name="pick-up",
            initiation=colocated,
            termination=riding,
            policy={s: "pick-up" for s in colocated - riding},
        )
    )
    options.append(
        Option(
            name="put-down",
            initiation=everything,
            termination=everything - riding,
            policy={s: "put-down" for s in riding},
        )
    )
    return options


def taxi_options_level2(
    h: Hierarchy, layout: TaxiLayout = DEFAULT_LAYOUT
) -> list[Option]:
    """The second option set: ferry the passenger to each depot.

    Each option runs over the factored first level, starts whenever the
    passenger is not already at its depot, and ends with taxi and
    passenger at the depot, passenger outside.
    """
    level = h.level(1)
    space = level.space
    names = space.variable_names()
    options: list[Option] = []
    for depot in layout.depot_names():
        cell = layout.depot_cell(depot)
        pass_here = space.where(**{"pass-x": cell[0], "pass-y": cell[1]})
        initiation = GroundingSet.of(1, space.states) - pass_here
        termination = space.where(
            **{
                "taxi-x": cell[0],
                "taxi-y": cell[1],
                "pass-x": cell[0],
                "pass-y": cell[1],
                "in-taxi": False,
            }
        )
        policy: dict[int, str] = {}
        for sid in space.states:
            asg = dict(zip(names, space.assignment(sid)))
            taxi = (asg["taxi-x"], asg["taxi-y"])
            passenger = (asg["pass-x"], asg["pass-y"])
            if asg["in-taxi"]:
                policy[sid] = "put-down" if taxi == cell else f"drive-to-{depot}"
            elif passenger == cell:
                continue  # initiation excludes these
            elif taxi == passenger:
                policy[sid] = "pick-up"
            else:
                target = layout.depot_of_cell(passenger)
                if target is not None:
                    policy[sid] = f"drive-to-{target}"
        options.append(
            Option(
                name=f"passenger-to-{depot}",
                initiation=initiation,
                termination=termination,
                policy=policy,
            )
        )
    return options


def depot_seed_states(
    mdp: BaseMDP, layout: TaxiLayout = DEFAULT_LAYOUT
) -> GroundingSet:
    """Task-distribution seeds: taxi and passenger each at a depot,
    passenger outside."""
    cells = [layout.depot_cell(d) for d in layout.depot_names()]
    seeds = [
        mdp.space.state_of((tx, ty, px, py, False))
        for tx, ty in cells
        for px, py in cells
    ]
    return GroundingSet.of(0, [s for s in seeds if s is not None])


def build_taxi_hierarchy(
    layout: TaxiLayout = DEFAULT_LAYOUT,
    reward_mode: RewardMode | None = None,
) -> Hierarchy:
    """Base MDP, navigation level, ferry level."""
    mode = reward_mode if reward_mode is not None else RewardMode.UNIFORM_PENALTY
    mdp = build_taxi(layout)
    h = Hierarchy(base=mdp, reward_mode=mode)
    h = h.add_level(taxi_options_level1(mdp, layout), seeds=depot_seed_states(mdp, layout))
    h = h.add_level(taxi_options_level2(h, layout))
    return h


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


def expand_constraints(
    mdp: BaseMDP, spec: dict, layout: TaxiLayout = DEFAULT_LAYOUT
) -> GroundingSet:
    """Base states matching a constraint object.

    Keys: ``taxi-at`` / ``pass-at`` (a depot name, ``"any-depot"``, or an
    ``[x, y]`` cell), ``in-taxi`` (boolean), ``states`` (explicit id
    list), or raw variable names. Missing keys are unconstrained.
    """
    space = mdp.space
    if "states" in spec:
        return GroundingSet.of(0, spec["states"])
    constraints: dict[str, object] = {}

    def place(prefix: str, value) -> None:
        if isinstance(value, str):
            cell = layout.depot_cell(value)
        else:
            cell = (int(value[0]), int(value[1]))
        constraints[f"{prefix}-x"] = cell[0]
        constraints[f"{prefix}-y"] = cell[1]

    any_depot: list[str] = []
    for key, value in spec.items():
        if key in ("taxi-at", "pass-at"):
            prefix = "taxi" if key == "taxi-at" else "pass"
            if value == "any-depot":
                any_depot.append(prefix)
            else:
                place(prefix, value)
        elif key == "in-taxi":
            constraints["in-taxi"] = bool(value)
        else:
            constraints[key] = value
    result = space.where(**constraints) if constraints else GroundingSet.of(
        0, space.states
    )
    for prefix in any_depot:
        cells = [layout.depot_cell(d) for d in layout.depot_names()]
        at_depot = GroundingSet.empty(0)
        for cx, cy in cells:
            at_depot = at_depot | space.where(
                **{f"{prefix}-x": cx, f"{prefix}-y": cy}
            )
        result = result & at_depot
    return result


def benchmark_queries(
    mdp: BaseMDP, layout: TaxiLayout = DEFAULT_LAYOUT
) -> dict[str, PlanQuery]:
    """The three benchmark queries.

    1. passenger at blue, taxi at some depot; deliver to red.
    2. same starts; exact goal state with the taxi parked at yellow.
    3. taxi at red, passenger at blue; leave the passenger at (1, 4).
    """

    def q(b: dict, g: dict) -> PlanQuery:
        return PlanQuery(
            expand_constraints(mdp, b, layout), expand_constraints(mdp, g, layout)
        )

    return {
        "Q1": q(
            {"pass-at": "blue", "taxi-at": "any-depot", "in-taxi": False},
            {"pass-at": "red"},
        ),
        "Q2": q(
            {"pass-at": "blue", "taxi-at": "any-depot", "in-taxi": False},
            {"pass-at": "blue", "taxi-at": "yellow", "in-taxi": False},
        ),
        "Q3": q(
            {"pass-at": "blue", "taxi-at": "red", "in-taxi": False},
            {"pass-at": [1, 4]},
        ),
    }
