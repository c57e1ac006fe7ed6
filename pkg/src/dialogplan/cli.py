"""Command-line front end.

Subcommands: validate, plan, pareto, simulate, chat, gen, bench, serve.
Machine-readable results go to stdout with a stable field order; diagnostics
go to stderr. Exit codes: 0 success, 1 infeasible or validation failure,
2 usage error, 3 size-limit refusal.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .dialog import (
    DialogSpec,
    SimUser,
    compile_dialog,
    make_sim_env,
    render_message,
)
from .execution import (
    Environment,
    FaithfulEnvironment,
    run_episode,
    transcript_lines,
)
from .limits import LimitExceededError
from .model import (
    Objective,
    Operator,
    PartialState,
    Problem,
    State,
    ValidationError,
    VariableDef,
    format_rational,
)
from .search import ALGORITHMS, pareto_front, solve
from .textio import (
    PROBLEM_SUFFIX,
    SourceError,
    detect_kind,
    parse_dialog_spec,
    parse_problem,
    serialize_problem,
)

__all__ = ["GEN_CLASSES", "GenClass", "gen_instance", "main"]


class CliError(Exception):
    """Terminate the command with a specific exit code and stderr message."""

    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code
        self.message = message


# ---------------------------------------------------------------------------
# Instance generator.
# ---------------------------------------------------------------------------

GEN_CLASSES = (
    "constant_cost",
    "constant_utility_and_cost",
    "varying_utility_constant_cost",
)

_GEN_COSTS = tuple(
    Fraction(x) for x in (0, 1, 2, 3)
) + (Fraction(1, 2), Fraction(3, 2), Fraction(5, 2))
_GEN_UTILS = tuple(
    Fraction(x) for x in (0, 1, 2, 3, 4, 5)
) + (Fraction(1, 2), Fraction(5, 2), Fraction(7, 2))
_GEN_GAMMAS = (Fraction(1, 2), Fraction(3, 4), Fraction(9, 10))


@dataclass(frozen=True)
class GenClass:
    """A family of seeded random instances with a fixed structural shape."""

    kind: str
    sizes: tuple[int, int, int, int]  # (num vars, domain size, num ops, k)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in GEN_CLASSES:
            raise ValidationError(f"unknown generator class '{self.kind}'")
        if len(self.sizes) != 4 or any(
            not isinstance(n, int) or n < 1 for n in self.sizes
        ):
            raise ValidationError("generator sizes must be four positive integers")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")


def gen_instance(g: GenClass) -> Problem:
    """Draw one instance. Identical GenClass values yield identical problems.

    Costs and utilities obey the class constraint; preconditions and effects
    each touch one or two variables; the objective (and any goal or discount)
    is drawn from the same seed, so a stream of seeds covers all three.
    """
    rng = random.Random(g.seed)
    nv, dom, nops, k = g.sizes
    variables = tuple(
        VariableDef(f"v{i}", tuple(str(j) for j in range(dom))) for i in range(nv)
    )

    if g.kind == "constant_cost":
        cost = rng.choice(_GEN_COSTS)
        costs = [cost] * nops
        utils = [rng.choice(_GEN_UTILS) for _ in range(nops)]
    elif g.kind == "constant_utility_and_cost":
        cost = rng.choice(_GEN_COSTS)
        util = rng.choice(_GEN_UTILS)
        costs = [cost] * nops
        utils = [util] * nops
    else:
        cost = rng.choice(_GEN_COSTS)
        costs = [cost] * nops
        utils = [rng.choice(_GEN_UTILS) for _ in range(nops)]
        while nops >= 2 and len(set(utils)) < 2:
            utils = [rng.choice(_GEN_UTILS) for _ in range(nops)]

    width = len(str(nops - 1))
    ops = []
    for i in range(nops):
        pre_vars = sorted(rng.sample(range(nv), rng.randint(1, min(2, nv))))
        eff_vars = sorted(rng.sample(range(nv), rng.randint(1, min(2, nv))))
        ops.append(
            Operator(
                f"op{i:0{width}d}",
                PartialState.of({f"v{j}": str(rng.randrange(dom)) for j in pre_vars}),
                PartialState.of({f"v{j}": str(rng.randrange(dom)) for j in eff_vars}),
                costs[i],
                utils[i],
            )
        )

    s0 = State.of({f"v{i}": str(rng.randrange(dom)) for i in range(nv)})
    okind = rng.choice(("netbenefit", "discounted", "mincost"))
    if okind == "netbenefit":
        objective = Objective.net_benefit()
    elif okind == "discounted":
        objective = Objective.discounted(rng.choice(_GEN_GAMMAS))
    else:
        goal_vars = sorted(rng.sample(range(nv), rng.randint(1, min(2, nv))))
        objective = Objective.min_cost(
            PartialState.of({f"v{j}": str(rng.randrange(dom)) for j in goal_vars})
        )

    name = f"gen_{g.kind}_{nv}x{dom}x{nops}x{k}_s{g.seed}"
    return Problem(name, variables, tuple(ops), s0, k, objective)


# ---------------------------------------------------------------------------
# Shared loading helpers.
# ---------------------------------------------------------------------------

def _load_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(1, f"{path}: {exc.strerror or exc}") from None


def _parse_path(path: str):
    """Parse a file as a problem or a dialog spec, keyed off its first word."""
    text = _load_text(path)
    try:
        if detect_kind(text) == "dialog":
            return "dialog", parse_dialog_spec(text)
        return "problem", parse_problem(text)
    except SourceError as exc:
        raise CliError(1, f"{path}:{exc}") from None


def _as_problem(path: str) -> Problem:
    kind, obj = _parse_path(path)
    if kind == "problem":
        return obj
    try:
        return compile_dialog(obj)
    except ValidationError as exc:
        raise CliError(1, f"{path}: {exc}") from None


def _fmt_value(value) -> str:
    return "-" if value is None else format_rational(value)


def _fmt_steps(steps) -> str:
    return " ".join(steps) if steps else "-"


def _parse_answers_file(path: str) -> dict[str, str]:
    script: dict[str, str] = {}
    for lineno, raw in enumerate(_load_text(path).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, answer = line.partition("=")
        name, answer = name.strip(), answer.strip()
        if not sep or not name or not answer:
            raise CliError(1, f"{path}:{lineno}: expected slot=answer")
        if name in script:
            raise CliError(1, f"{path}:{lineno}: duplicate answer for slot '{name}'")
        script[name] = answer
    return script


# ---------------------------------------------------------------------------
# Commands.
# ---------------------------------------------------------------------------

def _cmd_validate(args) -> int:
    kind, obj = _parse_path(args.file)
    if kind == "dialog":
        try:
            compile_dialog(obj)
        except ValidationError as exc:
            raise CliError(1, f"{args.file}: {exc}") from None
    print(f"ok {kind} {obj.name}")
    return 0


def _cmd_plan(args) -> int:
    pr = _as_problem(args.file)
    res = solve(pr, algo=args.algo)
    print(f"value {_fmt_value(res.optimal_value)}")
    print(f"plan {_fmt_steps(res.plan.steps if res.plan else None)}")
    print(f"nodes {res.nodes_expanded}")
    print(f"algorithm {res.algorithm}")
    return 0 if res.optimal_value is not None else 1


def _cmd_pareto(args) -> int:
    pr = _as_problem(args.file)
    front = pareto_front(pr)
    for cost, utility, plan in front.points:
        print(
            f"point {format_rational(cost)} {format_rational(utility)} "
            f"{_fmt_steps(plan.steps)}"
        )
    return 0


def _cmd_simulate(args) -> int:
    kind, obj = _parse_path(args.file)
    if kind == "problem":
        if args.answers is not None or args.seed is not None:
            raise CliError(2, "--answers and --seed apply to dialog files only")
        episode = run_episode(obj, FaithfulEnvironment())
    else:
        script = _parse_answers_file(args.answers) if args.answers else None
        env = make_sim_env(obj, SimUser(script=script, seed=args.seed))
        episode = run_episode(compile_dialog(obj), env)
    for line in transcript_lines(episode):
        print(line)
    return 0


class _ChatEnvironment(Environment):
    """Answers asks from an interactive stream and echoes advisory messages."""

    def __init__(self, ds: DialogSpec, fin, fout):
        self._fin = fin
        self._fout = fout
        self._asks = {f"ask_{s.name}": s for s in ds.slots}
        self._advisories = {f"advise_{a.name}": a for a in ds.advisories}
        self._bindings: dict[str, str] = {}

    def _say(self, text: str):
        self._fout.write(text + "\n")
        self._fout.flush()

    def observe(self, op, predicted):
        slot = self._asks.get(op.name)
        if slot is not None:
            while True:
                self._say(f"{slot.prompt} [{'/'.join(slot.answers)}]")
                line = self._fin.readline()
                if line == "":
                    raise EOFError
                answer = line.strip()
                if answer in slot.answers:
                    break
                self._say(f"please answer one of: {', '.join(slot.answers)}")
            self._bindings[slot.name] = answer
            return predicted.updated(
                PartialState.of({f"slot_{slot.name}": answer})
            )
        advisory = self._advisories.get(op.name)
        if advisory is not None:
            self._say(render_message(advisory.message_template, self._bindings))
        return predicted


def _cmd_chat(args) -> int:
    kind, ds = _parse_path(args.file)
    if kind != "dialog":
        raise CliError(2, "chat needs a dialog file")
    pr = compile_dialog(ds)
    try:
        episode = run_episode(pr, _ChatEnvironment(ds, sys.stdin, sys.stdout))
    except EOFError:
        print("chat ended: no more input", file=sys.stderr)
        return 0
    for line in transcript_lines(episode):
        print(line)
    return 0


def _cmd_gen(args) -> int:
    try:
        g = GenClass(
            args.gen_class, (args.vars, args.dom, args.ops, args.k), args.seed
        )
        pr = gen_instance(g)
    except ValidationError as exc:
        raise CliError(2, str(exc)) from None
    sys.stdout.write(serialize_problem(pr))
    return 0


def _cmd_bench(args) -> int:
    root = Path(args.dir)
    if not root.is_dir():
        raise CliError(2, f"{args.dir}: not a directory")
    files = sorted(root.glob(f"*{PROBLEM_SUFFIX}"))
    if not files:
        raise CliError(1, f"{args.dir}: no *{PROBLEM_SUFFIX} instances found")
    disagreements = 0
    for path in files:
        try:
            pr = parse_problem(path.read_text(encoding="utf-8"))
        except SourceError as exc:
            raise CliError(1, f"{path}:{exc}") from None
        results = {}
        for algo in ("brute", "dp", "bnb"):
            t0 = time.perf_counter()
            res = solve(pr, algo=algo)
            ms = (time.perf_counter() - t0) * 1000.0
            results[algo] = res
            plan_len = "-" if res.plan is None else len(res.plan.steps)
            print(
                f"instance={path.name} algo={algo} "
                f"value={_fmt_value(res.optimal_value)} plan_len={plan_len} "
                f"nodes={res.nodes_expanded} ms={ms:.3f}"
            )
        outcomes = {
            (r.optimal_value, None if r.plan is None else r.plan.steps)
            for r in results.values()
        }
        if len(outcomes) > 1:
            disagreements += 1
            detail = "; ".join(
                f"{algo}: value={_fmt_value(r.optimal_value)} "
                f"plan={_fmt_steps(r.plan.steps if r.plan else None)}"
                for algo, r in results.items()
            )
            print(f"{path.name}: algorithms disagree: {detail}", file=sys.stderr)
    if disagreements:
        print(f"bench failed: {disagreements} disagreement(s)", file=sys.stderr)
        return 1
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    ui = args.ui
    if ui is None:
        for cand in ("frontend/dist", "frontend"):
            if Path(cand, "index.html").is_file():
                ui = cand
                break
    serve(
        addr=args.addr,
        port=args.port,
        idle_timeout=args.idle_timeout,
        persist_dir=args.persist_dir,
        ui_dir=ui,
    )
    return 0


# ---------------------------------------------------------------------------
# Parser and entry point.
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dialogplan",
        description="Plan, simulate, and serve budgeted finite-domain dialogs.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("validate", help="parse a problem or dialog file")
    c.add_argument("file")
    c.set_defaults(func=_cmd_validate)

    c = sub.add_parser("plan", help="solve a problem (dialogs are compiled)")
    c.add_argument("file")
    c.add_argument("--algo", choices=sorted(ALGORITHMS), default="dp")
    c.set_defaults(func=_cmd_plan)

    c = sub.add_parser("pareto", help="enumerate nondominated cost/utility points")
    c.add_argument("file")
    c.set_defaults(func=_cmd_pareto)

    c = sub.add_parser("simulate", help="run one scripted or faithful episode")
    c.add_argument("file")
    c.add_argument("--answers", help="file of slot=answer lines for the sim user")
    c.add_argument("--seed", type=int, help="sample unscripted answers with this seed")
    c.set_defaults(func=_cmd_simulate)

    c = sub.add_parser("chat", help="conduct a dialog interactively in the terminal")
    c.add_argument("file")
    c.set_defaults(func=_cmd_chat)

    c = sub.add_parser("gen", help="emit one seeded random problem to stdout")
    c.add_argument("--class", dest="gen_class", required=True, choices=GEN_CLASSES)
    c.add_argument("--vars", type=int, default=3)
    c.add_argument("--dom", type=int, default=2)
    c.add_argument("--ops", type=int, default=4)
    c.add_argument("--k", type=int, default=4)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=_cmd_gen)

    c = sub.add_parser("bench", help="solve every instance in a directory three ways")
    c.add_argument("dir")
    c.set_defaults(func=_cmd_bench)

    c = sub.add_parser("serve", help="run the HTTP session service")
    c.add_argument("--addr", default="127.0.0.1")
    c.add_argument("--port", type=int, default=8750)
    c.add_argument("--idle-timeout", type=float, default=1800.0)
    c.add_argument("--persist-dir")
    c.add_argument("--ui", help="static client directory (default: auto-detect)")
    c.set_defaults(func=_cmd_serve)

    return p


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except CliError as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code
    except LimitExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ValueError as exc:
        # bad DIALOG_NETBENCH_LIMITS and similar configuration mistakes
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
