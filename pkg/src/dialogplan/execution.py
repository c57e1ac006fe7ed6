"""Interleaved planning and execution.

The loop: solve the problem at the current state with the remaining horizon,
execute the plan's first operator against an environment, observe the real
outcome (which may diverge from the predicted effect), and replan from the
observed state. Discount bookkeeping stays global: turn i always carries
weight gamma**i even though each solve is re-based to position 0, which is
harmless because scaling every suffix value by gamma**offset preserves both
the argmax and the tie-break order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from .limits import Limits
from .model import (
    Operator,
    Plan,
    PlanningError,
    Problem,
    State,
    apply,
    format_rational,
    ObjectiveKind,
)
from .search import solve

__all__ = [
    "Environment",
    "FaithfulEnvironment",
    "EnvironmentFaultError",
    "EpisodeStatus",
    "Turn",
    "Episode",
    "replan_step",
    "run_episode",
    "transcript_lines",
    "transcript_document",
]


class Environment:
    """Where predicted effects meet reality.

    observe() receives the operator just executed and the state the model
    predicts, and returns the state that actually holds. terminal flips to
    True when the counterpart (a user, a simulator) walks away; the episode
    loop checks it before every turn.
    """

    def observe(self, op: Operator, predicted: State) -> State:
        raise NotImplementedError

    @property
    def terminal(self) -> bool:
        return False


class FaithfulEnvironment(Environment):
    """Reality agrees with the model: observed is always predicted."""

    def observe(self, op: Operator, predicted: State) -> State:
        return predicted


class EnvironmentFaultError(PlanningError):
    """The environment produced an ill-formed state; the episode aborted.

    Carries the turns executed before the fault so the caller can inspect
    the partial transcript.
    """

    def __init__(self, message: str, turns: "tuple[Turn, ...]"):
        super().__init__(message)
        self.turns = turns


class EpisodeStatus(str, Enum):
    COMPLETED = "completed"
    USER_ABANDONED = "user_abandoned"
    HORIZON_EXHAUSTED = "horizon_exhausted"


@dataclass(frozen=True)
class Turn:
    index: int
    op: str
    predicted_state: State
    observed_state: State
    cost: Fraction
    utility: Fraction
    discount_weight: Fraction
    realized_contribution: Fraction

    @property
    def diverged(self) -> bool:
        return self.observed_state != self.predicted_state


@dataclass(frozen=True)
class Episode:
    turns: tuple[Turn, ...]
    realized_value: Fraction
    status: EpisodeStatus


def replan_step(
    pr: Problem,
    s: State,
    remaining: int,
    global_offset: int = 0,
    solver: str = "dp",
    limits: "Limits | None" = None,
) -> Optional[str]:
    """First operator of the optimal plan from (s, remaining), or None to stop.

    global_offset is the number of turns already executed; it is accepted so
    callers can assert the invariant that it cannot change the choice (the
    true objective from that position is the re-based one scaled by
    gamma**offset, and positive scaling preserves the optimum and ties).
    MinCost subproblems whose goal is out of reach also stop.
    """
    if not 0 <= remaining <= pr.k:
        raise PlanningError(f"remaining {remaining} outside [0, {pr.k}]")
    if global_offset < 0:
        raise PlanningError("global_offset must be non-negative")
    if remaining == 0:
        return None
    sub = dataclasses.replace(pr, s0=s, k=remaining)
    result = solve(sub, algo=solver, limits=limits)
    if result.plan is None or len(result.plan) == 0:
        return None
    return result.plan.steps[0]


def _check_observed(pr: Problem, s: State, index: int, turns: list) -> None:
    declared = set(pr.variable_map)
    bound = set(s.names)
    problems = []
    for missing in sorted(declared - bound):
        problems.append(f"misses variable '{missing}'")
    for extra in sorted(bound - declared):
        problems.append(f"binds unknown variable '{extra}'")
    for var, val in s.assignment:
        vdef = pr.variable_map.get(var)
        if vdef is not None and val not in vdef.domain:
            problems.append(f"assigns '{val}' outside the domain of '{var}'")
    if problems:
        raise EnvironmentFaultError(
            f"turn {index}: observed state {problems[0]}", tuple(turns)
        )


def run_episode(
    pr: Problem,
    env: Environment,
    solver: str = "dp",
    limits: "Limits | None" = None,
) -> Episode:
    """Drive one full episode of plan, act, observe, replan.

    Stops with status completed when the optimal remaining plan is empty,
    user_abandoned when the environment turns terminal, and
    horizon_exhausted when all k turns were used.
    """
    gamma = pr.objective.effective_gamma
    s = pr.s0
    remaining = pr.k
    turns: list[Turn] = []
    weight = Fraction(1)
    while True:
        if env.terminal:
            status = EpisodeStatus.USER_ABANDONED
            break
        if remaining == 0:
            status = EpisodeStatus.HORIZON_EXHAUSTED
            break
        index = pr.k - remaining
        op_name = replan_step(pr, s, remaining, global_offset=index, solver=solver, limits=limits)
        if op_name is None:
            status = EpisodeStatus.COMPLETED
            break
        op = pr.operator(op_name)
        predicted = apply(op, s)
        observed = env.observe(op, predicted)
        _check_observed(pr, observed, index, turns)
        turns.append(
            Turn(
                index=index,
                op=op_name,
                predicted_state=predicted,
                observed_state=observed,
                cost=op.cost,
                utility=op.utility,
                discount_weight=weight,
                realized_contribution=(op.utility - op.cost) * weight,
            )
        )
        s = observed
        remaining -= 1
        weight *= gamma

    if pr.objective.kind is ObjectiveKind.MIN_COST:
        realized = sum((t.cost for t in turns), Fraction(0))
    else:
        realized = sum((t.realized_contribution for t in turns), Fraction(0))
    return Episode(tuple(turns), realized, status)


def transcript_lines(ep: Episode) -> list[str]:
    """Line-oriented transcript: one record per turn plus a trailer."""
    out = []
    for t in ep.turns:
        out.append(
            "turn"
            f" index={t.index}"
            f" op={t.op}"
            f" cost={format_rational(t.cost)}"
            f" utility={format_rational(t.utility)}"
            f" weight={format_rational(t.discount_weight)}"
            f" contribution={format_rational(t.realized_contribution)}"
            f" diverged={'yes' if t.diverged else 'no'}"
        )
    out.append(
        f"realized_value={format_rational(ep.realized_value)} status={ep.status.value}"
    )
    return out


def transcript_document(ep: Episode) -> dict:
    """The same transcript as a JSON-ready document."""
    return {
        "turns": [
            {
                "index": t.index,
                "op": t.op,
                "cost": format_rational(t.cost),
                "utility": format_rational(t.utility),
                "weight": format_rational(t.discount_weight),
                "contribution": format_rational(t.realized_contribution),
                "diverged": "yes" if t.diverged else "no",
            }
            for t in ep.turns
        ],
        "realized_value": format_rational(ep.realized_value),
        "status": ep.status.value,
    }
