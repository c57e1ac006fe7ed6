"""The acceptance gate.

One test per shipped guarantee, each ending in a single printed PASS line so
the suite output doubles as a checklist. Everything is exact rational
arithmetic; the two timing checks use generous wall-clock budgets that the
implementation beats by a wide margin.
"""

import dataclasses
import threading
import time
from fractions import Fraction

from fastapi.testclient import TestClient

from dialogplan import (
    FaithfulEnvironment,
    GEN_CLASSES,
    GenClass,
    Objective,
    SimUser,
    compile_dialog,
    gen_instance,
    make_sim_env,
    parse_problem,
    pareto_front,
    run_episode,
    serialize_problem,
    solve_bnb,
    solve_brute,
    solve_dp,
    water_spec,
)
from dialogplan.service import create_app

from conftest import random_instances, toggle_chain_problem, two_op_problem
from test_textio import fuzz_parsers


def _ok(label: str):
    print(f"PASS {label}")


# ---------------------------------------------------------------------------

def test_solver_cross_agreement_on_200_instances():
    t0 = time.perf_counter()
    instances = random_instances(200, rng_seed=1, seed_base=1000)
    classes_seen = set()
    objectives_seen = set()
    for pr in instances:
        classes_seen.add(pr.name.split("_s")[0].rsplit("_", 1)[0])
        objectives_seen.add(pr.objective.kind.value)
        brute = solve_brute(pr)
        dp = solve_dp(pr)
        bnb = solve_bnb(pr)
        assert brute.optimal_value == dp.optimal_value == bnb.optimal_value, pr.name
        plans = {
            None if r.plan is None else r.plan.steps for r in (brute, dp, bnb)
        }
        assert len(plans) == 1, pr.name
    elapsed = time.perf_counter() - t0
    assert len(instances) >= 200
    assert objectives_seen == {"netbenefit", "discounted", "mincost"}
    assert len(classes_seen) == 3
    assert elapsed < 60.0
    _ok(
        f"cross-agreement: dp=bnb=brute on {len(instances)} seeded instances "
        f"({elapsed:.1f}s)"
    )


def test_worked_instance_exact_numbers():
    pr = two_op_problem()
    nb = solve_brute(pr)
    assert nb.optimal_value == 4 and nb.plan.steps == ("a", "b", "a")

    disc = dataclasses.replace(pr, objective=Objective.discounted("1/2"))
    assert solve_brute(disc).optimal_value == Fraction(5, 2)

    front = pareto_front(pr)
    assert [(c, u) for c, u, _ in front.points] == [
        (0, 0), (1, 3), (2, 4), (3, 7)
    ]

    from dialogplan import PartialState
    mc = dataclasses.replace(
        pr, objective=Objective.min_cost(PartialState.of({"x": "1"}))
    )
    assert solve_brute(mc).optimal_value == 1
    _ok("worked instance: NB 4 [a,b,a], DNB(1/2) 5/2, front {(0,0)..(3,7)}, MinCost 1")


def test_objective_identities():
    sample = random_instances(60, rng_seed=2, seed_base=3000)
    for pr in sample:
        nb = dataclasses.replace(pr, objective=Objective.net_benefit())
        g1 = dataclasses.replace(pr, objective=Objective.discounted(1))
        a, b = solve_dp(nb), solve_dp(g1)
        assert a.optimal_value == b.optimal_value
        assert a.plan.steps == b.plan.steps
    for pr in sample[:20]:
        nb = dataclasses.replace(pr, objective=Objective.net_benefit())
        values = [
            solve_dp(dataclasses.replace(nb, k=k)).optimal_value
            for k in range(1, 6)
        ]
        assert all(x <= y for x, y in zip(values, values[1:]))
        assert all(v >= 0 for v in values)
    _ok("identities: gamma=1 = undiscounted; NB monotone in k; NB >= 0")


def test_water_dialog_values_and_ordering():
    assert solve_brute(compile_dialog(water_spec(max_turns=4))).optimal_value == 6
    assert solve_brute(compile_dialog(water_spec(max_turns=3))).optimal_value == 0
    disc = compile_dialog(water_spec(discount=Fraction(9, 10)))
    assert solve_brute(disc).optimal_value == Fraction(377, 100)

    for ds in (water_spec(max_turns=4), water_spec(max_turns=6),
               water_spec(discount=Fraction(9, 10))):
        pr = compile_dialog(ds)
        for fn in (solve_brute, solve_dp, solve_bnb):
            steps = fn(pr).plan.steps
            seen = set()
            for step in steps:
                if step.startswith("run_waterdata__"):
                    assert {"ask_location", "ask_purpose"} <= seen, steps
                if step == "advise_advise":
                    assert any(s.startswith("run_waterdata__") for s in seen), steps
                seen.add(step)
    _ok("water dialog: 6 at 4 turns, 0 at 3 turns, 377/100 at gamma 9/10, ordered")


def test_faithful_episodes_realize_open_loop_optimum():
    count = 0
    objectives_seen = set()
    for pr in random_instances(100, rng_seed=3, seed_base=5000):
        objectives_seen.add(pr.objective.kind.value)
        res = solve_dp(pr)
        ep = run_episode(pr, FaithfulEnvironment())
        if res.optimal_value is None:
            assert ep.turns == ()
        else:
            assert ep.realized_value == res.optimal_value, pr.name
        count += 1
    assert count >= 100 and objectives_seen == {"netbenefit", "discounted", "mincost"}

    ds = water_spec()
    env = make_sim_env(
        ds, SimUser(script={"location": "cityB", "purpose": "irrigate"})
    )
    ep = run_episode(compile_dialog(ds), env)
    assert any(t.diverged for t in ep.turns)
    assert ep.realized_value == 6
    _ok(f"episodes: faithful = optimum on {count} instances; divergent water = 6")


def test_parser_round_trip_and_fuzz():
    for pr in random_instances(200, rng_seed=4, seed_base=7000):
        assert parse_problem(serialize_problem(pr)) == pr
    n = 10_000
    rejected = fuzz_parsers(n, seed=4242)
    assert rejected > 0
    _ok(f"parser: 200/200 round trips; {n} fuzz inputs, 0 crashes, "
        f"{rejected} positioned rejections")


def test_service_driver_and_isolation():
    app = create_app()

    def drive(client, loc, pur):
        r = client.post("/api/v1/sessions", json={"builtin": "water"})
        assert r.status_code == 201
        sid = r.json()["session_id"]
        body = r.json()
        while body["action"]["kind"] == "ask":
            answer = loc if body["action"]["slot"] == "location" else pur
            r = client.post(f"/api/v1/sessions/{sid}/reply", json={"answer": answer})
            assert r.status_code == 200
            body = r.json()
        return sid, body, client.get(f"/api/v1/sessions/{sid}").json()

    client = TestClient(app)
    sid, final, snap = drive(client, "cityB", "irrigate")
    assert final["value"] == "6"
    assert len(snap["turns"]) == 4

    r = client.post("/api/v1/sessions", json={"builtin": "water"})
    bad = client.post(
        f"/api/v1/sessions/{r.json()['session_id']}/reply", json={"answer": "tea"}
    )
    assert bad.status_code == 422
    assert bad.json()["error"]["allowed"] == ["cityA", "cityB"]

    combos = [(l, p) for l in ("cityA", "cityB") for p in ("drink", "irrigate")] * 4
    outcomes = [None] * 16
    def worker(i):
        outcomes[i] = drive(TestClient(app), *combos[i])
    threads = [threading.Thread(target=worker, args=(i,)) for i in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len({sid for sid, _, _ in outcomes}) == 16
    for i, (_, final, snap) in enumerate(outcomes):
        loc, pur = combos[i]
        assert final["value"] == "6"
        assert snap["turns"][2]["op"] == f"run_waterdata__{loc}__{pur}"
    _ok('service: water driver got "6" with 4 turns; 422 lists answers; '
        "16 drivers isolated")


def test_performance_sanity():
    pr = toggle_chain_problem(n_vars=13, k=20)  # 8192 reachable states
    t0 = time.perf_counter()
    res = solve_dp(pr)
    elapsed = time.perf_counter() - t0
    assert res.optimal_value == sum(2 + i for i in range(13))
    assert len(res.plan.steps) == 13
    assert elapsed < 1.0

    worse = 0
    for pr in random_instances(25, rng_seed=5, seed_base=9000):
        brute = solve_brute(pr)
        bnb = solve_bnb(pr)
        assert bnb.optimal_value == brute.optimal_value
        assert bnb.nodes_expanded <= brute.nodes_expanded
        worse = max(worse, bnb.nodes_expanded - brute.nodes_expanded)
    assert worse <= 0
    _ok(f"performance: 8192-state k=20 dp in {elapsed*1000:.0f}ms; "
        "bnb nodes <= brute on all agreement instances")
