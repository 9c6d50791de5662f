"""Representation acquisition: from an option set over one level to the
abstract MDP of the next level.

Two constructions are supported, chosen by what the options look like
after partitioning:

* every part is a subgoal (one fixed terminal state per part): a plan
  graph, one abstract state per part, with an edge ``i -> j`` whenever
  part ``i``'s effect set is contained in part ``j``'s initiation set;
* every part sets a mask of state variables to start-independent values
  and leaves the rest untouched: a factored space built by closure from
  seed assignments under the parts' (mask, effect-values) rules.

Groundings of plan-graph nodes are widened from the raw effect set to all
lower states with the same initiation-membership profile, which keeps
applicability sound (edge existence already implies the widened set lies
inside every usable initiation set) while letting node groundings cover
every state the node is interchangeable with. Factored-level groundings
are exact assignment matches and are never widened.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

from .core import Assignment, Option, StateSpace, execute_option
from .errors import (
    InapplicableAction,
    InvalidSeed,
    MissingStatistics,
    NoFactoredStructure,
    NoSubgoalStructure,
    PartitionExplosion,
)
from .symbols import GroundingSet

DEFAULT_PART_LIMIT = 64


# ---------------------------------------------------------------------------
# option classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Subgoal:
    """Terminal state is the same no matter where execution began."""


@dataclass(frozen=True)
class AbstractSubgoal:
    """Masked variables end at start-independent values; unmasked
    variables are unchanged by execution.

    An empty mask is the degenerate identity case (execution changes
    nothing for any start in the part).
    """

    mask: frozenset[str]


@dataclass(frozen=True)
class Unclassifiable:
    reason: str = ""


OptionClass = Subgoal | AbstractSubgoal | Unclassifiable


@dataclass(frozen=True)
class EffectSet:
    """All states an option may terminate in, over its initiation set."""

    option_id: str
    states: GroundingSet

    def __post_init__(self) -> None:
        if self.states.is_empty():
            raise ValueError(f"effect set of {self.option_id!r} is empty")


@dataclass(frozen=True)
class OptionPart:
    """A restriction of an option to a subset of its initiation states
    that individually passes a classification test.

    The part shares the parent option's policy; only the initiation set
    shrinks. For subgoal parts ``terminal_state`` is set; for abstract
    subgoal parts ``mask``/``effect_values`` describe the variable update.
    """

    part_id: str
    option: Option
    initiation: GroundingSet
    option_class: OptionClass
    effect: GroundingSet
    terminal_state: int | None = None
    mask: frozenset[str] = frozenset()
    effect_values: tuple[tuple[str, Any], ...] = ()

    @property
    def option_id(self) -> str:
        return self.option.name


@dataclass(frozen=True)
class PartitionedOption:
    option_id: str
    parts: tuple[OptionPart, ...]


def _terminal_map(option: Option, level) -> dict[int, int]:
    """Terminal state for every initiation state, by exhaustive simulation."""
    return {
        s: execute_option(level, option, s).end
        for s in option.initiation
    }


def compute_effect_set(option: Option, level) -> EffectSet:
    """The option's effect set: simulate from every initiation state and
    collect the terminal states."""
    terminals = _terminal_map(option, level)
    return EffectSet(
        option.name,
        GroundingSet.of(option.level_index, set(terminals.values())),
    )


def _classify_pairs(
    space: StateSpace, pairs: Sequence[tuple[int, int]]
) -> OptionClass:
    """Classify a set of (start, terminal) pairs.

    Over an unfactored space only a constant terminal classifies. Over a
    factored space the candidate mask is the set of variables changed by
    at least one start, and the test requires constant terminal values on
    the mask; enlarging the mask can never rescue a failing candidate, so
    this single check is complete. A constant terminal counts as a plain
    subgoal only when the mask is trivial (empty or every variable);
    otherwise the partial mask is the tighter description and the pairs
    classify as an abstract subgoal that leaves the unmasked variables
    alone.
    """
    terminals = {t for _, t in pairs}
    if not space.is_factored:
        if len(terminals) == 1:
            return Subgoal()
        return Unclassifiable("terminal depends on start and space is not factored")
    names = space.variable_names()
    changed = set()
    for s, t in pairs:
        sa, ta = space.assignment(s), space.assignment(t)
        changed.update(n for n, sv, tv in zip(names, sa, ta) if sv != tv)
    if len(terminals) == 1 and len(changed) in (0, len(names)):
        return Subgoal()
    for var in changed:
        i = names.index(var)
        values = {space.assignment(t)[i] for _, t in pairs}
        if len(values) > 1:
            return Unclassifiable(f"terminal value of {var!r} depends on start")
    return AbstractSubgoal(frozenset(changed))


def classify_option(option: Option, level) -> OptionClass:
    """Classify the whole (unpartitioned) option."""
    terminals = _terminal_map(option, level)
    return _classify_pairs(level.space, sorted(terminals.items()))


def _raw_group_key(space: StateSpace, start: int, terminal: int):
    names = space.variable_names()
    sa, ta = space.assignment(start), space.assignment(terminal)
    changed = tuple(sorted(n for n, sv, tv in zip(names, sa, ta) if sv != tv))
    values = tuple(ta[names.index(n)] for n in changed)
    return changed, values


def _merge_key(group: tuple[tuple[str, ...], tuple[Any, ...]]):
    changed, values = group
    return (-len(changed), changed, repr(values))


def partition_option(
    option: Option,
    level,
    part_limit: int = DEFAULT_PART_LIMIT,
    _terminals: Mapping[int, int] | None = None,
) -> PartitionedOption:
    """Split the initiation set into the fewest groups this greedy pass
    finds such that each group individually classifies.

    Over a factored space, starts are first grouped by (changed
    variables, terminal values of those variables), then groups are
    folded, largest changed-set first, into the first accumulated part
    the combined pairs still classify with. Over an unfactored space the
    grouping key is the terminal state itself, so every part is a
    subgoal. Deterministic by construction.
    """
    space: StateSpace = level.space
    terminals = dict(_terminals) if _terminals is not None else _terminal_map(option, level)

    part_pairs: list[list[tuple[int, int]]]
    if not space.is_factored:
        by_terminal: dict[int, list[tuple[int, int]]] = {}
        for s in sorted(terminals):
            by_terminal.setdefault(terminals[s], []).append((s, terminals[s]))
        part_pairs = [by_terminal[t] for t in sorted(by_terminal)]
    else:
        groups: dict[tuple, list[tuple[int, int]]] = {}
        for s in sorted(terminals):
            groups.setdefault(_raw_group_key(space, s, terminals[s]), []).append(
                (s, terminals[s])
            )
        part_pairs = []
        for key in sorted(groups, key=_merge_key):
            pairs = groups[key]
            for existing in part_pairs:
                merged = _classify_pairs(space, existing + pairs)
                if not isinstance(merged, Unclassifiable):
                    existing.extend(pairs)
                    break
            else:
                part_pairs.append(list(pairs))

    if len(part_pairs) > part_limit:
        raise PartitionExplosion(
            f"option {option.name!r} split into {len(part_pairs)} parts "
            f"(limit {part_limit})"
        )

    lvl = option.level_index
    parts = []
    multi = len(part_pairs) > 1
    for k, pairs in enumerate(part_pairs):
        cls = _classify_pairs(space, pairs)
        assert not isinstance(cls, Unclassifiable), "grouping must classify"
        part_id = f"{option.name}#{k}" if multi else option.name
        effect = GroundingSet.of(lvl, {t for _, t in pairs})
        terminal = pairs[0][1] if isinstance(cls, Subgoal) else None
        mask: frozenset[str] = frozenset()
        values: tuple[tuple[str, Any], ...] = ()
        if space.is_factored:
            names = space.variable_names()
            if isinstance(cls, AbstractSubgoal):
                mask = cls.mask
            else:
                # subgoal over a factored space: full-mask variable update
                mask = frozenset(names)
            ta = space.assignment(pairs[0][1])
            values = tuple(
                (n, ta[names.index(n)]) for n in sorted(mask)
            )
        parts.append(
            OptionPart(
                part_id=part_id,
                option=option,
                initiation=GroundingSet.of(lvl, [s for s, _ in pairs]),
                option_class=cls,
                effect=effect,
                terminal_state=terminal,
                mask=mask,
                effect_values=values,
            )
        )
    return PartitionedOption(option.name, tuple(parts))


# ---------------------------------------------------------------------------
# abstract levels
# ---------------------------------------------------------------------------


class RewardMode(enum.Enum):
    UNIFORM_PENALTY = "uniform"
    EMPIRICAL_MEAN = "empirical"


class Construction(enum.Enum):
    PLAN_GRAPH = "plan-graph"
    FACTORED = "factored"


@dataclass(frozen=True)
class AbstractLevel:
    """One abstract MDP of a hierarchy.

    States carry groundings into the level below. An action is an option
    part; a transition ``(s, part) -> s'`` exists only when ``s``'s
    grounding lies inside the part's initiation set, and the image of the
    grounding under the option is contained in ``s'``'s grounding.
    """

    space: StateSpace
    actions: tuple[OptionPart, ...]
    transitions: Mapping[tuple[int, str], int]
    rewards: Mapping[str, float]
    groundings: Mapping[int, GroundingSet]
    construction: Construction
    gamma: float = 1.0
    _by_id: dict[str, OptionPart] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )
    _by_option: dict[str, tuple[OptionPart, ...]] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )
    _predecessors: dict[int, tuple[tuple[int, str], ...]] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        by_id = {p.part_id: p for p in self.actions}
        by_option: dict[str, list[OptionPart]] = {}
        for p in self.actions:
            by_option.setdefault(p.option_id, []).append(p)
        preds: dict[int, list[tuple[int, str]]] = {}
        for (s, a), t in self.transitions.items():
            preds.setdefault(t, []).append((s, a))
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(
            self, "_by_option", {k: tuple(v) for k, v in by_option.items()}
        )
        object.__setattr__(
            self, "_predecessors", {t: tuple(v) for t, v in preds.items()}
        )

    @property
    def level_index(self) -> int:
        return self.space.level_index

    @property
    def num_states(self) -> int:
        return self.space.num_states

    @property
    def action_ids(self) -> tuple[str, ...]:
        return tuple(p.part_id for p in self.actions)

    def part(self, part_id: str) -> OptionPart:
        return self._by_id[part_id]

    def parts_of(self, option_id: str) -> tuple[OptionPart, ...]:
        return self._by_option.get(option_id, ())

    def grounding_of(self, state: int) -> GroundingSet:
        return self.groundings[state]

    def resolve_part(self, state: int, action_id: str) -> str | None:
        """Map an action or option id to the part id applicable in
        ``state``; parts of one option have disjoint initiations, so at
        most one applies."""
        if action_id in self._by_id and (state, action_id) in self.transitions:
            return action_id
        for p in self._by_option.get(action_id, ()):
            if (state, p.part_id) in self.transitions:
                return p.part_id
        return None

    def successor(self, state: int, action_id: str) -> int | None:
        return self.transitions.get((state, action_id))

    def predecessor_edges(self, state: int) -> tuple[tuple[int, str], ...]:
        return self._predecessors.get(state, ())

    def reward_of(self, state: int, action_id: str, successor: int) -> float:
        return self.rewards[action_id]

    def step(self, state: int, action_id: str) -> tuple[int, float]:
        """Apply an option (by part id or option id) as one abstract step."""
        part_id = self.resolve_part(state, action_id)
        if part_id is None:
            raise InapplicableAction(f"option {action_id!r} in abstract state {state}")
        return self.transitions[(state, part_id)], self.rewards[part_id]


def _partition_all(
    options: Sequence[Option],
    level,
    part_limit: int,
    terminal_maps: Mapping[str, Mapping[int, int]] | None = None,
) -> list[OptionPart]:
    parts: list[OptionPart] = []
    for o in options:
        tmap = terminal_maps.get(o.name) if terminal_maps else None
        parts.extend(partition_option(o, level, part_limit, _terminals=tmap).parts)
    return parts


def build_plan_graph(
    options: Sequence[Option],
    level,
    part_limit: int = DEFAULT_PART_LIMIT,
    _parts: Sequence[OptionPart] | None = None,
) -> AbstractLevel:
    """Abstract level whose states are the subgoal parts of ``options``.

    Node ``i`` reaches node ``j`` by part ``j`` exactly when part ``i``'s
    effect set is inside part ``j``'s initiation set. Node groundings are
    the initiation-profile widening of the effect sets.
    """
    parts = list(_parts) if _parts is not None else _partition_all(
        options, level, part_limit
    )
    bad = [p.part_id for p in parts if not isinstance(p.option_class, Subgoal)]
    if bad:
        raise NoSubgoalStructure(
            f"parts without a fixed terminal state: {', '.join(bad)}"
        )
    lvl = level.space.level_index

    # profile-based widening: all lower states whose membership pattern
    # across every part initiation matches the effect set's containment
    # pattern
    inits = [p.initiation for p in parts]
    by_profile: dict[tuple[bool, ...], list[int]] = {}
    for s in level.space.states:
        by_profile.setdefault(tuple(s in i for i in inits), []).append(s)
    widened = [
        GroundingSet.of(
            lvl, by_profile.get(tuple(p.effect.issubset(i) for i in inits), ())
        )
        for p in parts
    ]

    transitions: dict[tuple[int, str], int] = {}
    for i, pi in enumerate(parts):
        for j, pj in enumerate(parts):
            if pi.effect.issubset(pj.initiation):
                transitions[(i, pj.part_id)] = j

    space = StateSpace(
        level_index=lvl + 1,
        num_states=len(parts),
        labels=tuple(p.part_id for p in parts),
    )
    lvl_obj = AbstractLevel(
        space=space,
        actions=tuple(parts),
        transitions=transitions,
        rewards={p.part_id: -1.0 for p in parts},
        groundings=dict(enumerate(widened)),
        construction=Construction.PLAN_GRAPH,
        gamma=getattr(level, "gamma", 1.0),
    )
    return lvl_obj


def build_factored_abstraction(
    options: Sequence[Option],
    level,
    seed_states: GroundingSet,
    part_limit: int = DEFAULT_PART_LIMIT,
    _parts: Sequence[OptionPart] | None = None,
) -> AbstractLevel:
    """Abstract level over the lower space's variables, closed from the
    seed states' assignments under the parts' variable-update rules.

    A part applies to an assignment when every matching lower state lies
    in its initiation set; the successor assignment overwrites the mask
    with the part's effect values. Groundings are exact-match lower
    states, never widened, so distinct assignments stay distinct states.
    """
    space: StateSpace = level.space
    if not space.is_factored:
        raise NoFactoredStructure(f"level {space.level_index} space is not factored")
    for s in seed_states:
        if not 0 <= s < space.num_states:
            raise InvalidSeed(f"seed state {s} outside level {space.level_index}")
    parts = list(_parts) if _parts is not None else _partition_all(
        options, level, part_limit
    )
    bad = [p.part_id for p in parts if isinstance(p.option_class, Unclassifiable)]
    if bad:
        raise NoFactoredStructure(f"unclassifiable parts: {', '.join(bad)}")

    names = space.variable_names()
    lvl = space.level_index

    def grounding_of(asg: Assignment) -> GroundingSet:
        sid = space.state_of(asg)
        if sid is None:
            return GroundingSet.empty(lvl)
        return GroundingSet.single(lvl, sid)

    def apply_part(asg: Assignment, part: OptionPart) -> Assignment:
        out = list(asg)
        for var, value in part.effect_values:
            out[names.index(var)] = value
        return tuple(out)

    seeds = sorted(seed_states)
    order: dict[Assignment, int] = {}
    for s in seeds:
        asg = space.assignment(s)
        if asg not in order:
            order[asg] = len(order)
    queue = list(order)
    transitions: dict[tuple[int, str], int] = {}
    while queue:
        asg = queue.pop(0)
        sid = order[asg]
        g = grounding_of(asg)
        for part in parts:
            if g.is_empty() or not g.issubset(part.initiation):
                continue
            nxt = apply_part(asg, part)
            if nxt not in order:
                order[nxt] = len(order)
                queue.append(nxt)
            transitions[(sid, part.part_id)] = order[nxt]

    assignments = tuple(order)
    new_space = StateSpace(
        level_index=lvl + 1,
        num_states=len(assignments),
        variables=space.variables,
        assignments=assignments,
    )
    groundings = {
        i: grounding_of(asg) for i, asg in enumerate(assignments)
    }
    return AbstractLevel(
        space=new_space,
        actions=tuple(parts),
        transitions=transitions,
        rewards={p.part_id: -1.0 for p in parts},
        groundings=groundings,
        construction=Construction.FACTORED,
        gamma=getattr(level, "gamma", 1.0),
    )


def assign_rewards(level: AbstractLevel, mode: RewardMode) -> AbstractLevel:
    """Set every transition reward to -1, or to the empirical mean reward
    of the part's parent option."""
    if mode is RewardMode.UNIFORM_PENALTY:
        rewards = {p.part_id: -1.0 for p in level.actions}
    else:
        rewards = {}
        for p in level.actions:
            stats = p.option.reward_stats
            if stats.count == 0:
                raise MissingStatistics(
                    f"option {p.option_id!r} has no recorded executions"
                )
            rewards[p.part_id] = stats.mean
    return replace(level, rewards=rewards)
