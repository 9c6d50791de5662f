"""Wall-clock comparison of three ways to answer the same plan query.

* hierarchical: top-down level matching plus planning at the matched
  level, timed as the matching/planning phase split reported by the
  planner's instrumentation (the two phases partition the search loop,
  so their sum is the hierarchical total);
* base + options: planning over the base MDP augmented with every option
  flattened to its base-level endpoint map (temporal abstraction without
  state abstraction);
* flat: planning over the bare base MDP.

Each mode runs ``repetitions`` times after one untimed warm-up; rows
report means in milliseconds. Absolute numbers are hardware-dependent;
orderings and ratios between modes are the meaningful output.
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Mapping

from .core import BaseMDP
from .hierarchy import Hierarchy, PlanQuery
from .planner import answer_query, execute_refined, findplan


@dataclass(frozen=True)
class FlatSMDP:
    """Base MDP plus flattened options, for planning without state
    abstraction. Satisfies the same level protocol as BaseMDP."""

    base: BaseMDP
    extra_transitions: Mapping[tuple[int, str], int]
    extra_rewards: Mapping[tuple[int, str], float]
    extra_actions: tuple[str, ...]
    _predecessors: dict[int, tuple[tuple[int, str], ...]] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        preds: dict[int, list[tuple[int, str]]] = {}
        for (s, a), t in self.base.transition.items():
            preds.setdefault(t, []).append((s, a))
        for (s, a), t in self.extra_transitions.items():
            preds.setdefault(t, []).append((s, a))
        object.__setattr__(
            self, "_predecessors", {t: tuple(v) for t, v in preds.items()}
        )

    @property
    def level_index(self) -> int:
        return 0

    @property
    def num_states(self) -> int:
        return self.base.num_states

    @property
    def action_ids(self) -> tuple[str, ...]:
        return self.base.actions + self.extra_actions

    def successor(self, state: int, action: str) -> int | None:
        t = self.base.transition.get((state, action))
        if t is not None:
            return t
        return self.extra_transitions.get((state, action))

    def predecessor_edges(self, state: int) -> tuple[tuple[int, str], ...]:
        return self._predecessors.get(state, ())

    def reward_of(self, state: int, action: str, successor: int) -> float:
        r = self.base.reward.get((state, action, successor))
        if r is not None:
            return r
        return self.extra_rewards[(state, action)]


def flatten_options(h: Hierarchy) -> FlatSMDP:
    """Add every option of every level into the base MDP as a one-shot
    action whose endpoints come from actual refined execution."""
    transitions: dict[tuple[int, str], int] = {}
    rewards: dict[tuple[int, str], float] = {}
    names: list[str] = []
    for j, options in enumerate(h.option_sets, start=1):
        for option in options:
            name = f"{option.name}@{j}"
            names.append(name)
            base_init = h.final_ground(j - 1, option.initiation)
            for x in base_init:
                trace = execute_refined(h, j, option, x)
                if trace.steps == 0:
                    continue
                transitions[(x, name)] = trace.end
                rewards[(x, name)] = trace.cumulative_reward
    return FlatSMDP(
        base=h.base,
        extra_transitions=transitions,
        extra_rewards=rewards,
        extra_actions=tuple(names),
    )


@dataclass(frozen=True)
class BenchmarkRow:
    """Mean per-mode timings for one query, milliseconds."""

    query: str
    level: int
    match_ms: float
    plan_ms: float
    hier_ms: float
    options_ms: float
    flat_ms: float


CSV_HEADER = "query,level,match_ms,plan_ms,hier_ms,options_ms,flat_ms"


def _mean_ms(samples: list[float]) -> float:
    return 1000.0 * sum(samples) / len(samples)


def run_benchmark(
    h: Hierarchy,
    queries: Mapping[str, PlanQuery],
    repetitions: int = 100,
    smdp: FlatSMDP | None = None,
) -> list[BenchmarkRow]:
    """Time all three modes for each query; one warm-up run per mode is
    excluded, and the flattened SMDP is built once outside all timers."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    flat_plus = smdp if smdp is not None else flatten_options(h)
    rows: list[BenchmarkRow] = []
    for name, query in queries.items():
        answer = answer_query(h, query)
        level = answer.level_index if answer is not None else -1

        match_s: list[float] = []
        plan_s: list[float] = []
        for _ in range(repetitions + 1):
            result = answer_query(h, query)
            if result is not None:
                match_s.append(result.record.match_seconds)
                plan_s.append(result.record.plan_seconds)
        match_s, plan_s = match_s[1:], plan_s[1:]

        options_s: list[float] = []
        for i in range(repetitions + 1):
            t0 = time.perf_counter()
            findplan(flat_plus, query.starts, query.goals)
            if i:
                options_s.append(time.perf_counter() - t0)

        base_s: list[float] = []
        for i in range(repetitions + 1):
            t0 = time.perf_counter()
            findplan(h.base, query.starts, query.goals)
            if i:
                base_s.append(time.perf_counter() - t0)

        match_ms = _mean_ms(match_s) if match_s else 0.0
        plan_ms = _mean_ms(plan_s) if plan_s else 0.0
        rows.append(
            BenchmarkRow(
                query=name,
                level=level,
                match_ms=match_ms,
                plan_ms=plan_ms,
                hier_ms=match_ms + plan_ms,
                options_ms=_mean_ms(options_s),
                flat_ms=_mean_ms(base_s),
            )
        )
    return rows


def rows_to_csv(rows: list[BenchmarkRow]) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in rows:
        out.write(
            f"{r.query},{r.level},{r.match_ms:.6f},{r.plan_ms:.6f},"
            f"{r.hier_ms:.6f},{r.options_ms:.6f},{r.flat_ms:.6f}\n"
        )
    return out.getvalue()


def rows_to_json(rows: list[BenchmarkRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2)
