"""Shared fixtures and independent oracles for the test suite.

The oracles here (grid shortest paths, brute-force state enumeration,
random query generation) are deliberately written from scratch rather
than reusing library code, so tests check the implementation against an
independent computation of the same quantity.
"""

from __future__ import annotations

import random

import pytest

from hierplan import PlanQuery, build_taxi, build_taxi_hierarchy, benchmark_queries
from hierplan.taxi import expand_constraints

DEPOTS = {"red": (0, 4), "green": (4, 4), "blue": (3, 0), "yellow": (0, 0)}

# canonical wall segments, written out independently of the layout data
WALL_PAIRS = {
    frozenset({(1, 4), (2, 4)}),
    frozenset({(1, 3), (2, 3)}),
    frozenset({(0, 1), (1, 1)}),
    frozenset({(0, 0), (1, 0)}),
    frozenset({(2, 1), (3, 1)}),
    frozenset({(2, 0), (3, 0)}),
}


def oracle_grid_distance(a, b):
    """Shortest walk length between two cells, by plain frontier
    expansion over the walled 5x5 grid."""
    if a == b:
        return 0
    frontier = {a}
    seen = {a}
    steps = 0
    while frontier:
        steps += 1
        nxt = set()
        for x, y in frontier:
            for dx, dy in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                cell = (x + dx, y + dy)
                if not (0 <= cell[0] < 5 and 0 <= cell[1] < 5):
                    continue
                if frozenset({(x, y), cell}) in WALL_PAIRS:
                    continue
                if cell == b:
                    return steps
                if cell not in seen:
                    seen.add(cell)
                    nxt.add(cell)
        frontier = nxt
    raise AssertionError(f"no path {a} -> {b}")


def oracle_taxi_states():
    """All valid taxi assignments, enumerated directly."""
    cells = [(x, y) for x in range(5) for y in range(5)]
    out = [(tx, ty, px, py, False) for tx, ty in cells for px, py in cells]
    riding = [(tx, ty, tx, ty, True) for tx, ty in cells]
    return out + riding


@pytest.fixture(scope="session")
def taxi_mdp():
    return build_taxi()


@pytest.fixture(scope="session")
def taxi_hierarchy():
    return build_taxi_hierarchy()


@pytest.fixture(scope="session")
def queries(taxi_hierarchy):
    return benchmark_queries(taxi_hierarchy.base)


@pytest.fixture()
def fresh_hierarchy():
    """A hierarchy whose option statistics no other test has touched."""
    return build_taxi_hierarchy()


def state_of(mdp, tx, ty, px, py, riding=False):
    sid = mdp.space.state_of((tx, ty, px, py, riding))
    assert sid is not None
    return sid


def random_query(mdp, rng: random.Random) -> PlanQuery | None:
    """One uniformly drawn variable-constraint query, or None when a draw
    produces an empty side."""

    def constraint_side():
        spec = {}
        taxi_choice = rng.randrange(4)
        if taxi_choice == 1:
            spec["taxi-at"] = rng.choice(sorted(DEPOTS))
        elif taxi_choice == 2:
            spec["taxi-at"] = "any-depot"
        elif taxi_choice == 3:
            spec["taxi-at"] = [rng.randrange(5), rng.randrange(5)]
        pass_choice = rng.randrange(4)
        if pass_choice == 1:
            spec["pass-at"] = rng.choice(sorted(DEPOTS))
        elif pass_choice == 2:
            spec["pass-at"] = "any-depot"
        elif pass_choice == 3:
            spec["pass-at"] = [rng.randrange(5), rng.randrange(5)]
        ride_choice = rng.randrange(3)
        if ride_choice == 1:
            spec["in-taxi"] = False
        elif ride_choice == 2:
            spec["in-taxi"] = True
        return expand_constraints(mdp, spec)

    starts = constraint_side()
    goals = constraint_side()
    if starts.is_empty() or goals.is_empty():
        return None
    return PlanQuery(starts, goals)


def random_queries(mdp, count: int, seed: int = 20250810):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        q = random_query(mdp, rng)
        if q is not None:
            out.append(q)
    return out
