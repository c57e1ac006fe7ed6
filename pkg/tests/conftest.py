"""Shared builders for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from dialogplan import (
    GEN_CLASSES,
    GenClass,
    Objective,
    Operator,
    PartialState,
    Problem,
    State,
    VariableDef,
    gen_instance,
)


def two_op_problem(objective: Objective | None = None, k: int = 3) -> Problem:
    """The worked two-operator instance: a toggles x on, b toggles it off."""
    return Problem(
        "two_op",
        (VariableDef("x", ("0", "1")),),
        (
            Operator("a", PartialState.of({"x": "0"}), PartialState.of({"x": "1"}), 1, 3),
            Operator("b", PartialState.of({"x": "1"}), PartialState.of({"x": "0"}), 1, 1),
        ),
        State.of({"x": "0"}),
        k,
        objective if objective is not None else Objective.net_benefit(),
    )


def toggle_chain_problem(n_vars: int = 13, k: int = 20) -> Problem:
    """n independent on-switches: 2^n reachable states, all profitable."""
    variables = tuple(VariableDef(f"v{i:02d}", ("off", "on")) for i in range(n_vars))
    ops = tuple(
        Operator(
            f"set_v{i:02d}",
            PartialState.of({f"v{i:02d}": "off"}),
            PartialState.of({f"v{i:02d}": "on"}),
            1,
            Fraction(3 + i),
        )
        for i in range(n_vars)
    )
    s0 = State.of({f"v{i:02d}": "off" for i in range(n_vars)})
    return Problem("toggles", variables, ops, s0, k, Objective.net_benefit())


def random_instances(
    count: int,
    rng_seed: int = 0,
    max_vars: int = 3,
    max_dom: int = 3,
    max_ops: int = 5,
    max_k: int = 5,
    seed_base: int = 0,
) -> list[Problem]:
    """A deterministic stream of small instances cycling the generator
    classes; objectives vary with the per-instance seed."""
    rng = random.Random(rng_seed)
    out = []
    for i in range(count):
        sizes = (
            rng.randint(1, max_vars),
            rng.randint(1, max_dom),
            rng.randint(1, max_ops),
            rng.randint(1, max_k),
        )
        g = GenClass(GEN_CLASSES[i % len(GEN_CLASSES)], sizes, seed_base + i)
        out.append(gen_instance(g))
    return out


def enumerate_valid_plans(pr: Problem):
    """Yield every valid step sequence, independently of the solvers."""

    def rec(state, depth, steps):
        yield steps
        if depth == pr.k:
            return
        for op in pr.operators:
            ok = all(state.value(v) == x for v, x in op.pre.bindings)
            if not ok:
                continue
            nxt = state.updated(op.eff)
            yield from rec(nxt, depth + 1, steps + (op.name,))

    yield from rec(pr.s0, 0, ())


@pytest.fixture
def two_op() -> Problem:
    return two_op_problem()
