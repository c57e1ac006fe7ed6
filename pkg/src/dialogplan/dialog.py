"""Dialog specifications and their compilation into planning problems.

A dialog is described by slots the agent can ask the user to fill, data
queries that become runnable once their required slots are known, and
advisories that deliver value once their required queries have run.
compile_dialog lowers such a spec to the core planning formalism: slots,
query completion, and advisory delivery become finite-domain variables;
asks, runs, and advisories become operators; the turn budget becomes the
horizon.

The planning model is deterministic, so an ask operator predicts the slot's
default answer. The real user may answer differently; that divergence is the
executor's concern (observe, then replan), never the compiler's.
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .execution import Environment
from .limits import Limits
from .model import (
    Objective,
    Operator,
    PartialState,
    Problem,
    Rational,
    State,
    ValidationError,
    VariableDef,
    as_rational,
)

__all__ = [
    "NAME_RE",
    "UNKNOWN",
    "Slot",
    "Query",
    "Advisory",
    "DialogSpec",
    "SimUser",
    "compile_dialog",
    "compiled_operator_count",
    "make_sim_env",
    "render_message",
    "water_spec",
    "BUILTIN_SPECS",
]

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")
PLACEHOLDER_RE = re.compile(r"\{([^{}]*)\}")

# Slot variables reserve this domain value for "not answered yet".
UNKNOWN = "unknown"


def _check_name(name: str, what: str) -> None:
    if not isinstance(name, str) or not NAME_RE.match(name):
        raise ValidationError(
            f"{what} name {name!r} is not an identifier"
            " ([A-Za-z_][A-Za-z0-9_-]*)"
        )


def _check_text(text: str, what: str) -> None:
    if "\n" in text or "\r" in text:
        raise ValidationError(f"{what} must be a single line")


def _nonneg(value: Rational, what: str) -> Fraction:
    f = as_rational(value)
    if f < 0:
        raise ValidationError(f"{what} must be non-negative")
    return f


@dataclass(frozen=True)
class Slot:
    """Information the agent may acquire by asking the user one question."""

    name: str
    prompt: str
    answers: tuple[str, ...]
    default_answer: str
    ask_cost: Fraction = Fraction(0)

    def __post_init__(self):
        _check_name(self.name, "slot")
        _check_text(self.prompt, "slot prompt")
        object.__setattr__(self, "answers", tuple(self.answers))
        if not self.answers:
            raise ValidationError(f"slot '{self.name}' declares no answers")
        for a in self.answers:
            _check_name(a, f"slot '{self.name}' answer")
        if len(set(self.answers)) != len(self.answers):
            raise ValidationError(f"slot '{self.name}' has duplicate answers")
        if UNKNOWN in self.answers:
            raise ValidationError(
                f"slot '{self.name}' may not use the reserved answer '{UNKNOWN}'"
            )
        if self.default_answer not in self.answers:
            raise ValidationError(
                f"slot '{self.name}' default answer '{self.default_answer}'"
                " is not among its answers"
            )
        object.__setattr__(self, "ask_cost", _nonneg(self.ask_cost, "ask_cost"))


@dataclass(frozen=True)
class Query:
    """A data retrieval runnable once every required slot is known."""

    name: str
    requires: tuple[str, ...]
    run_cost: Fraction = Fraction(0)
    utility: Fraction = Fraction(0)

    def __post_init__(self):
        _check_name(self.name, "query")
        object.__setattr__(self, "requires", tuple(sorted(set(self.requires))))
        if not self.requires:
            raise ValidationError(f"query '{self.name}' requires no slots")
        object.__setattr__(self, "run_cost", _nonneg(self.run_cost, "run_cost"))
        object.__setattr__(self, "utility", _nonneg(self.utility, "utility"))


@dataclass(frozen=True)
class Advisory:
    """A user-facing recommendation unlocked by completed queries.

    The message template may embed {slot} placeholders; they are filled with
    the user's concrete answers at delivery time.
    """

    name: str
    requires_queries: tuple[str, ...]
    message_template: str
    cost: Fraction = Fraction(0)
    utility: Fraction = Fraction(0)

    def __post_init__(self):
        _check_name(self.name, "advisory")
        _check_text(self.message_template, "advisory message")
        object.__setattr__(
            self, "requires_queries", tuple(sorted(set(self.requires_queries)))
        )
        object.__setattr__(self, "cost", _nonneg(self.cost, "cost"))
        object.__setattr__(self, "utility", _nonneg(self.utility, "utility"))

    @property
    def placeholders(self) -> tuple[str, ...]:
        return tuple(m.group(1) for m in PLACEHOLDER_RE.finditer(self.message_template))


@dataclass(frozen=True)
class DialogSpec:
    name: str
    slots: tuple[Slot, ...]
    queries: tuple[Query, ...] = ()
    advisories: tuple[Advisory, ...] = ()
    max_turns: int = 1
    discount: Optional[Fraction] = None

    def __post_init__(self):
        _check_name(self.name, "dialog")
        object.__setattr__(self, "slots", tuple(self.slots))
        object.__setattr__(self, "queries", tuple(self.queries))
        object.__setattr__(self, "advisories", tuple(self.advisories))
        if not isinstance(self.max_turns, int) or self.max_turns < 1:
            raise ValidationError("max_turns must be a positive integer")
        if self.discount is not None:
            d = as_rational(self.discount)
            if not (0 < d <= 1):
                raise ValidationError("discount must lie in (0, 1]")
            object.__setattr__(self, "discount", d)
        names = (
            [s.name for s in self.slots]
            + [q.name for q in self.queries]
            + [a.name for a in self.advisories]
        )
        if len(set(names)) != len(names):
            raise ValidationError("slot/query/advisory names must all be distinct")
        slot_names = {s.name for s in self.slots}
        query_names = {q.name for q in self.queries}
        for q in self.queries:
            for s in q.requires:
                if s not in slot_names:
                    raise ValidationError(
                        f"query '{q.name}' requires undeclared slot '{s}'"
                    )
        for a in self.advisories:
            for qn in a.requires_queries:
                if qn not in query_names:
                    raise ValidationError(
                        f"advisory '{a.name}' requires undeclared query '{qn}'"
                    )
            for ph in a.placeholders:
                if ph not in slot_names:
                    raise ValidationError(
                        f"advisory '{a.name}' references undeclared slot"
                        f" '{ph}' in its message"
                    )

    def slot(self, name: str) -> Slot:
        for s in self.slots:
            if s.name == name:
                return s
        raise ValidationError(f"no slot named '{name}'")


def render_message(template: str, bindings: Mapping[str, str]) -> str:
    """Fill {slot} placeholders; unanswered slots render as 'unknown'."""
    return PLACEHOLDER_RE.sub(
        lambda m: bindings.get(m.group(1), UNKNOWN), template
    )


def compiled_operator_count(ds: DialogSpec) -> int:
    """Operators compile_dialog would emit: one ask per slot, one run variant
    per answer combination of each query's required slots, one advisory."""
    by_name = {s.name: s for s in ds.slots}
    total = len(ds.slots) + len(ds.advisories)
    for q in ds.queries:
        total += math.prod(len(by_name[s].answers) for s in q.requires)
    return total


def compile_dialog(ds: DialogSpec, limits: "Limits | None" = None) -> Problem:
    """Lower a dialog spec to a planning problem.

    Variables: slot_<s> over {unknown} + answers (init unknown), done_<q>
    and given_<a> over {no, yes} (init no). Operators: ask_<s> predicts the
    default answer; run_<q>__<answers...> is grounded once per combination
    of the required slots' concrete values (shared cost/utility, answers in
    sorted slot-name order); advise_<a> requires its queries done. The
    objective discounts by the spec's discount when present, and the horizon
    is max_turns. Refuses, stating the count, when grounding would exceed
    the operator limit.
    """
    lim = limits if limits is not None else Limits.from_env()
    count = compiled_operator_count(ds)
    lim.check("compiled operators", count, lim.ops)

    variables: list[VariableDef] = []
    init: dict[str, str] = {}
    for s in ds.slots:
        variables.append(VariableDef(f"slot_{s.name}", (UNKNOWN,) + s.answers))
        init[f"slot_{s.name}"] = UNKNOWN
    for q in ds.queries:
        variables.append(VariableDef(f"done_{q.name}", ("no", "yes")))
        init[f"done_{q.name}"] = "no"
    for a in ds.advisories:
        variables.append(VariableDef(f"given_{a.name}", ("no", "yes")))
        init[f"given_{a.name}"] = "no"

    by_name = {s.name: s for s in ds.slots}
    ops: list[Operator] = []
    for s in ds.slots:
        ops.append(
            Operator(
                f"ask_{s.name}",
                pre=PartialState.of({f"slot_{s.name}": UNKNOWN}),
                eff=PartialState.of({f"slot_{s.name}": s.default_answer}),
                cost=s.ask_cost,
                utility=Fraction(0),
            )
        )
    for q in ds.queries:
        required = [by_name[n] for n in q.requires]
        for combo in itertools.product(*(s.answers for s in required)):
            pre = {f"done_{q.name}": "no"}
            for s, v in zip(required, combo):
                pre[f"slot_{s.name}"] = v
            suffix = "".join(f"__{v}" for v in combo)
            ops.append(
                Operator(
                    f"run_{q.name}{suffix}",
                    pre=PartialState.of(pre),
                    eff=PartialState.of({f"done_{q.name}": "yes"}),
                    cost=q.run_cost,
                    utility=q.utility,
                )
            )
    for a in ds.advisories:
        pre = {f"given_{a.name}": "no"}
        for qn in a.requires_queries:
            pre[f"done_{qn}"] = "yes"
        ops.append(
            Operator(
                f"advise_{a.name}",
                pre=PartialState.of(pre),
                eff=PartialState.of({f"given_{a.name}": "yes"}),
                cost=a.cost,
                utility=a.utility,
            )
        )

    op_names = [o.name for o in ops]
    if len(set(op_names)) != len(op_names):
        dup = sorted(n for n in set(op_names) if op_names.count(n) > 1)[0]
        raise ValidationError(
            f"compiled operator names collide on '{dup}';"
            " rename the query or its answers"
        )

    objective = (
        Objective.discounted(ds.discount)
        if ds.discount is not None
        else Objective.net_benefit()
    )
    return Problem(
        name=ds.name,
        variables=tuple(variables),
        operators=tuple(ops),
        s0=State.of(init),
        k=ds.max_turns,
        objective=objective,
    )


@dataclass(frozen=True)
class SimUser:
    """A stand-in user: scripted answers per slot, seeded random for the rest.

    Slots neither scripted nor covered by a seed answer with their default,
    which makes the resulting environment faithful to the planner's
    predictions.
    """

    script: Optional[Mapping[str, str]] = None
    seed: Optional[int] = None


class _AnswerEnvironment(Environment):
    def __init__(self, ds: DialogSpec, su: SimUser, abandon_after: Optional[int]):
        self._asks = {f"ask_{s.name}": s for s in ds.slots}
        self._script = dict(su.script) if su.script else {}
        self._rng = random.Random(su.seed) if su.seed is not None else None
        self._abandon_after = abandon_after
        self._observed = 0

    def observe(self, op, predicted):
        self._observed += 1
        slot = self._asks.get(op.name)
        if slot is None:
            return predicted
        answer = self._script.get(slot.name)
        if answer is None:
            if self._rng is not None:
                answer = self._rng.choice(slot.answers)
            else:
                answer = slot.default_answer
        return predicted.updated(PartialState.of({f"slot_{slot.name}": answer}))

    @property
    def terminal(self) -> bool:
        return self._abandon_after is not None and self._observed >= self._abandon_after


def make_sim_env(
    ds: DialogSpec, su: SimUser, abandon_after: Optional[int] = None
) -> Environment:
    """An Environment answering asks for a simulated user.

    Replies to ask_<s> set slot_<s> to the scripted or sampled answer; every
    other operator behaves exactly as declared. abandon_after=n makes the
    environment terminal after n observations (the user walks away).
    """
    if su.script:
        slot_names = {s.name for s in ds.slots}
        for name, answer in su.script.items():
            if name not in slot_names:
                raise ValidationError(f"script answers undeclared slot '{name}'")
            slot = ds.slot(name)
            if answer not in slot.answers:
                raise ValidationError(
                    f"script answer '{answer}' is not an answer of slot '{name}'"
                )
    if abandon_after is not None and abandon_after < 0:
        raise ValidationError("abandon_after must be non-negative")
    return _AnswerEnvironment(ds, su, abandon_after)


def water_spec(max_turns: int = 4, discount: Optional[Rational] = None) -> DialogSpec:
    """A small two-slot, one-query, one-advisory dialog used throughout the
    tests and as the default built-in: ask where and what for, fetch the
    water data, then advise."""
    return DialogSpec(
        name="water",
        slots=(
            Slot(
                name="location",
                prompt="Which city are you asking about?",
                answers=("cityA", "cityB"),
                default_answer="cityA",
                ask_cost=Fraction(1),
            ),
            Slot(
                name="purpose",
                prompt="What do you want to use the water for?",
                answers=("drink", "irrigate"),
                default_answer="drink",
                ask_cost=Fraction(1),
            ),
        ),
        queries=(
            Query(
                name="waterdata",
                requires=("location", "purpose"),
                run_cost=Fraction(2),
                utility=Fraction(0),
            ),
        ),
        advisories=(
            Advisory(
                name="advise",
                requires_queries=("waterdata",),
                message_template="Advice for {purpose} water in {location} is ready.",
                cost=Fraction(0),
                utility=Fraction(10),
            ),
        ),
        max_turns=max_turns,
        discount=as_rational(discount) if discount is not None else None,
    )


BUILTIN_SPECS: dict[str, DialogSpec] = {
    "water": water_spec(),
    "water_discounted": water_spec(discount=Fraction(9, 10)),
}
