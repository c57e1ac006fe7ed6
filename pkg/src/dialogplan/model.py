"""Core planning semantics: variables, states, operators, plans, objectives.

All values are immutable once constructed and every operation in this module
is a pure function, so problems and states can be shared freely across
threads. Costs, utilities, and discount factors are exact rationals
(`fractions.Fraction`); floating point never enters objective arithmetic,
which keeps solver cross-checks and tie-breaking deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Union

Rational = Union[int, str, Fraction]

__all__ = [
    "PlanningError",
    "ValidationError",
    "PreconditionError",
    "InvalidPlanError",
    "HorizonExceededError",
    "InapplicableStepError",
    "UnknownOperatorError",
    "as_rational",
    "format_rational",
    "VariableDef",
    "PartialState",
    "State",
    "Operator",
    "ObjectiveKind",
    "Objective",
    "Problem",
    "Plan",
    "PlanEval",
    "consistent",
    "applicable",
    "apply",
    "validate_plan",
    "evaluate_plan",
    "objective_value",
]


class PlanningError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PlanningError):
    """A value violates a structural invariant."""


class PreconditionError(PlanningError):
    """An operator was applied in a state where its precondition fails."""


class InvalidPlanError(PlanningError):
    """A plan failed validation against a problem."""


class HorizonExceededError(InvalidPlanError):
    def __init__(self, length: int, k: int):
        super().__init__(f"plan has {length} steps but the horizon is {k}")
        self.length = length
        self.k = k


class InapplicableStepError(InvalidPlanError):
    def __init__(self, step: int, op_name: str):
        super().__init__(f"operator '{op_name}' is not applicable at step {step}")
        self.step = step
        self.op_name = op_name


class UnknownOperatorError(InvalidPlanError):
    def __init__(self, name: str):
        super().__init__(f"unknown operator '{name}'")
        self.name = name


def as_rational(value: Rational) -> Fraction:
    """Coerce an int, "num/den" string, or Fraction to an exact Fraction.

    Floats are rejected: objective arithmetic must stay exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}") from exc
    raise ValidationError(
        f"expected an exact rational, got {type(value).__name__}"
    )


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "num/den", omitting the denominator when it is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _sorted_bindings(
    bindings: Union[Mapping[str, str], Iterable[tuple[str, str]]],
    what: str,
) -> tuple[tuple[str, str], ...]:
    if isinstance(bindings, Mapping):
        items = tuple(sorted(bindings.items()))
    else:
        items = tuple(sorted(bindings))
    seen = set()
    for name, _ in items:
        if name in seen:
            raise ValidationError(f"{what} binds variable '{name}' twice")
        seen.add(name)
    return items


@dataclass(frozen=True)
class VariableDef:
    """A finite-domain variable: a name and an ordered, non-empty domain."""

    name: str
    domain: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        if not self.domain:
            raise ValidationError(f"variable '{self.name}' has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise ValidationError(
                f"variable '{self.name}' has duplicate domain values"
            )


@dataclass(frozen=True)
class PartialState:
    """An assignment to a subset of variables (possibly empty).

    Bindings are kept sorted by variable name, so two partial states with the
    same content compare and hash equal regardless of construction order.
    """

    bindings: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "bindings", _sorted_bindings(self.bindings, "partial state")
        )

    @classmethod
    def of(cls, mapping: Mapping[str, str]) -> "PartialState":
        return cls(tuple(mapping.items()))

    def get(self, name: str) -> "str | None":
        for var, val in self.bindings:
            if var == name:
                return val
        return None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(var for var, _ in self.bindings)

    def as_dict(self) -> dict[str, str]:
        return dict(self.bindings)

    def __len__(self) -> int:
        return len(self.bindings)


EMPTY_PARTIAL = PartialState()


@dataclass(frozen=True)
class State:
    """A complete assignment: every variable of the problem bound exactly once."""

    assignment: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "assignment", _sorted_bindings(self.assignment, "state")
        )

    @classmethod
    def of(cls, mapping: Mapping[str, str]) -> "State":
        return cls(tuple(mapping.items()))

    def value(self, name: str) -> str:
        for var, val in self.assignment:
            if var == name:
                return val
        raise ValidationError(f"state does not bind variable '{name}'")

    def get(self, name: str) -> "str | None":
        for var, val in self.assignment:
            if var == name:
                return val
        return None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(var for var, _ in self.assignment)

    def as_dict(self) -> dict[str, str]:
        return dict(self.assignment)

    def updated(self, overrides: PartialState) -> "State":
        merged = self.as_dict()
        merged.update(overrides.as_dict())
        return State.of(merged)

    def __len__(self) -> int:
        return len(self.assignment)


@dataclass(frozen=True)
class Operator:
    """A named action with a precondition, an effect, a cost, and a utility.

    Preconditions and effects are partial states. Cost and utility are
    non-negative exact rationals.
    """

    name: str
    pre: PartialState = EMPTY_PARTIAL
    eff: PartialState = EMPTY_PARTIAL
    cost: Fraction = Fraction(0)
    utility: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "cost", as_rational(self.cost))
        object.__setattr__(self, "utility", as_rational(self.utility))
        if self.cost < 0:
            raise ValidationError(f"operator '{self.name}' has negative cost")
        if self.utility < 0:
            raise ValidationError(f"operator '{self.name}' has negative utility")


class ObjectiveKind(str, Enum):
    MIN_COST = "mincost"
    NET_BENEFIT = "netbenefit"
    DISCOUNTED = "discounted"


@dataclass(frozen=True)
class Objective:
    """What the planner optimizes.

    ``mincost`` minimizes total cost, optionally subject to reaching a goal
    partial state (without a goal the empty plan is trivially optimal).
    ``netbenefit`` maximizes total utility minus total cost. ``discounted``
    maximizes the same per-step differences weighted by gamma**i, where i is
    the 0-based plan position, with gamma an exact rational in (0, 1].
    """

    kind: ObjectiveKind
    goal: "PartialState | None" = None
    gamma: "Fraction | None" = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", as_rational(self.gamma))
        if self.kind is ObjectiveKind.DISCOUNTED:
            if self.gamma is None:
                raise ValidationError("discounted objective requires gamma")
            if not (0 < self.gamma <= 1):
                raise ValidationError("gamma must lie in (0, 1]")
        elif self.gamma is not None:
            raise ValidationError(f"{self.kind.value} objective takes no gamma")
        if self.goal is not None and self.kind is not ObjectiveKind.MIN_COST:
            raise ValidationError(f"{self.kind.value} objective takes no goal")

    @classmethod
    def net_benefit(cls) -> "Objective":
        return cls(ObjectiveKind.NET_BENEFIT)

    @classmethod
    def discounted(cls, gamma: Rational) -> "Objective":
        return cls(ObjectiveKind.DISCOUNTED, gamma=as_rational(gamma))

    @classmethod
    def min_cost(cls, goal: "PartialState | None" = None) -> "Objective":
        return cls(ObjectiveKind.MIN_COST, goal=goal)

    @property
    def effective_gamma(self) -> Fraction:
        """The discount weight base: gamma for discounted, 1 otherwise."""
        return self.gamma if self.gamma is not None else Fraction(1)


@dataclass(frozen=True)
class Plan:
    """An ordered sequence of operator names, at most k long."""

    steps: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @classmethod
    def of(cls, steps: Iterable[str]) -> "Plan":
        return cls(tuple(steps))

    def __len__(self) -> int:
        return len(self.steps)


EMPTY_PLAN = Plan()


@dataclass(frozen=True)
class PlanEval:
    """Exact accounting for a valid plan.

    ``net_benefit`` always equals ``total_utility - total_cost``;
    ``discounted_net`` equals ``net_benefit`` whenever the objective is
    undiscounted or gamma is 1.
    """

    total_cost: Fraction
    total_utility: Fraction
    net_benefit: Fraction
    discounted_net: Fraction
    final_state: State


@dataclass(frozen=True)
class Problem:
    """A bounded-horizon planning problem.

    Holds the variables, the operators, a complete initial state, a positive
    horizon, and an objective. Operators are normalized to name order at
    construction; their declaration order carries no meaning (tie-breaking is
    by name). Variable order is preserved because domain order and variable
    order index canonical states.
    """

    name: str
    variables: tuple[VariableDef, ...]
    operators: tuple[Operator, ...]
    s0: State
    k: int
    objective: Objective

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self, "operators", tuple(sorted(self.operators, key=lambda o: o.name))
        )
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate variable name")
        op_names = [o.name for o in self.operators]
        if len(set(op_names)) != len(op_names):
            raise ValidationError("duplicate operator name")
        if not isinstance(self.k, int) or self.k < 1:
            raise ValidationError("horizon k must be a positive integer")
        self._check_total(self.s0)
        for op in self.operators:
            self.check_partial_state(op.pre, f"precondition of '{op.name}'")
            self.check_partial_state(op.eff, f"effect of '{op.name}'")
        if self.objective.goal is not None:
            self.check_partial_state(self.objective.goal, "goal")

    @cached_property
    def variable_map(self) -> dict[str, VariableDef]:
        return {v.name: v for v in self.variables}

    @cached_property
    def operator_map(self) -> dict[str, Operator]:
        return {o.name: o for o in self.operators}

    def operator(self, name: str) -> Operator:
        try:
            return self.operator_map[name]
        except KeyError:
            raise UnknownOperatorError(name) from None

    def check_partial_state(self, p: PartialState, what: str = "partial state"):
        for var, val in p.bindings:
            vdef = self.variable_map.get(var)
            if vdef is None:
                raise ValidationError(f"{what} references unknown variable '{var}'")
            if val not in vdef.domain:
                raise ValidationError(
                    f"{what} assigns '{val}' outside the domain of '{var}'"
                )

    def _check_total(self, s: State):
        self.check_partial_state(PartialState(s.assignment), "initial state")
        missing = [v.name for v in self.variables if s.get(v.name) is None]
        if missing:
            raise ValidationError(
                f"initial state does not bind variable '{missing[0]}'"
            )
        extra = set(s.names) - set(self.variable_map)
        if extra:
            raise ValidationError(
                f"initial state binds unknown variable '{sorted(extra)[0]}'"
            )


def consistent(p: PartialState, s: State) -> bool:
    """True iff every variable bound in p has the same value in s.

    Raises ValidationError when p binds a variable s does not carry (the two
    must be well-formed over the same variable set). The empty partial state
    is consistent with everything.
    """
    state_map = s.as_dict()
    for var, val in p.bindings:
        if var not in state_map:
            raise ValidationError(f"partial state binds unknown variable '{var}'")
        if state_map[var] != val:
            return False
    return True


def applicable(o: Operator, s: State) -> bool:
    """True iff o's precondition is consistent with s."""
    return consistent(o.pre, s)


def apply(o: Operator, s: State) -> State:
    """Apply o to s: the effect's variables take the effect's values, every
    other variable keeps its value from s.

    Raises PreconditionError when o is not applicable in s.
    """
    if not applicable(o, s):
        raise PreconditionError(
            f"operator '{o.name}' is not applicable in the given state"
        )
    return s.updated(o.eff)


def _roll_forward(pr: Problem, pl: Plan) -> tuple[list[Operator], State]:
    if len(pl.steps) > pr.k:
        raise HorizonExceededError(len(pl.steps), pr.k)
    ops: list[Operator] = []
    s = pr.s0
    for i, name in enumerate(pl.steps):
        op = pr.operator(name)
        if not applicable(op, s):
            raise InapplicableStepError(i, name)
        s = apply(op, s)
        ops.append(op)
    return ops, s


def evaluate_plan(pr: Problem, pl: Plan) -> PlanEval:
    """Exact accounting for a valid plan; raises InvalidPlanError otherwise.

    discounted_net sums (utility_i - cost_i) * gamma**i over 0-based step
    positions i, with gamma taken as 1 for undiscounted objectives.
    """
    ops, final = _roll_forward(pr, pl)
    gamma = pr.objective.effective_gamma
    total_cost = Fraction(0)
    total_utility = Fraction(0)
    discounted = Fraction(0)
    weight = Fraction(1)
    for op in ops:
        total_cost += op.cost
        total_utility += op.utility
        discounted += (op.utility - op.cost) * weight
        weight *= gamma
    return PlanEval(
        total_cost=total_cost,
        total_utility=total_utility,
        net_benefit=total_utility - total_cost,
        discounted_net=discounted,
        final_state=final,
    )


def validate_plan(pr: Problem, pl: Plan) -> PlanEval:
    """Check applicability step by step and the horizon bound, then evaluate.

    The empty plan is valid for every well-formed problem. Raises
    HorizonExceededError, InapplicableStepError, or UnknownOperatorError.
    """
    return evaluate_plan(pr, pl)


def objective_value(obj: Objective, ev: PlanEval) -> Fraction:
    """The scalar a solver optimizes, read off a plan evaluation."""
    if obj.kind is ObjectiveKind.MIN_COST:
        return ev.total_cost
    if obj.kind is ObjectiveKind.NET_BENEFIT:
        return ev.net_benefit
    return ev.discounted_net
