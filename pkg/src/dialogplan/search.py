"""Exact solvers for bounded-horizon problems, plus Pareto-front enumeration.

Three algorithms produce the same optimal value and the same plan on every
instance: exhaustive enumeration (`solve_brute`), dynamic programming over
(state, remaining) cells (`solve_dp`), and depth-first branch-and-bound
(`solve_bnb`). The redundancy is deliberate: `solve_brute` works directly on
the model-level types and serves as the oracle the other two are checked
against, so it must never be rewritten to share their machinery.

Ties are broken identically everywhere: better objective value first, then
shorter plan, then lexicographically smaller operator-name sequence.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .limits import Limits
from .model import (
    EMPTY_PLAN,
    ObjectiveKind,
    Plan,
    Problem,
    applicable,
    apply,
    consistent,
)

__all__ = ["SolveResult", "ParetoFront", "solve_brute", "solve_dp", "solve_bnb", "solve", "pareto_front", "ALGORITHMS"]

_F0 = Fraction(0)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one solver run.

    optimal_value is None exactly when the objective is MinCost with a goal
    no valid plan reaches within the horizon; plan is None in that same case.
    degenerate_goalless marks MinCost without a goal, where the empty plan
    is trivially optimal at cost 0.
    """

    optimal_value: Optional[Fraction]
    plan: Optional[Plan]
    nodes_expanded: int
    algorithm: str
    degenerate_goalless: bool = False

    @property
    def feasible(self) -> bool:
        return self.optimal_value is not None


@dataclass(frozen=True)
class ParetoFront:
    """All non-dominated (total_cost, total_utility) outcomes, cost-ascending.

    A point dominates another when its cost is no higher and its utility no
    lower, with at least one strict. Each point carries one witness plan,
    the shortest then lexicographically smallest plan achieving it.
    """

    points: tuple[tuple[Fraction, Fraction, Plan], ...]


def _improves_max(val, steps, best_val, best_steps) -> bool:
    if val != best_val:
        return val > best_val
    if len(steps) != len(best_steps):
        return len(steps) < len(best_steps)
    return steps < best_steps


def _improves_min(val, steps, best_val, best_steps) -> bool:
    if val != best_val:
        return val < best_val
    if len(steps) != len(best_steps):
        return len(steps) < len(best_steps)
    return steps < best_steps


def _degenerate(algorithm: str) -> SolveResult:
    return SolveResult(_F0, EMPTY_PLAN, 1, algorithm, degenerate_goalless=True)


# ---------------------------------------------------------------------------
# Brute force: the oracle. Model-level objects only, no shared machinery.
# ---------------------------------------------------------------------------

def solve_brute(pr: Problem, limits: "Limits | None" = None, parallel: bool = False) -> SolveResult:
    """Enumerate every valid plan of length <= k by prefix extension.

    Refuses up front when the full prefix tree, sum over d = 0..k of
    |operators|**d, exceeds the configured limit; enumeration is never
    silently truncated. nodes_expanded counts visited valid prefixes,
    the empty one included.

    With parallel=True the root branches are searched in worker threads and
    merged under the tie-break rule; the result is identical to the serial
    mode.
    """
    lim = limits if limits is not None else Limits.from_env()
    n_ops = len(pr.operators)
    tree_size = sum(n_ops ** d for d in range(pr.k + 1))
    lim.check("brute-force plan tree", tree_size, lim.brute)

    obj = pr.objective
    minimize = obj.kind is ObjectiveKind.MIN_COST
    if minimize and obj.goal is None:
        return _degenerate("brute")
    goal = obj.goal
    gamma = obj.effective_gamma
    improves = _improves_min if minimize else _improves_max

    def merge(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return b if improves(b[0], b[1], a[0], a[1]) else a

    def rec(s, depth, acc, weight, steps):
        # One node per visited valid prefix; the prefix itself is a
        # candidate whenever the objective admits it.
        nodes = 1
        if minimize:
            best = (acc, steps) if consistent(goal, s) else None
        else:
            best = (acc, steps)
        if depth < pr.k:
            for op in pr.operators:
                if applicable(op, s):
                    if minimize:
                        child_acc = acc + op.cost
                    else:
                        child_acc = acc + (op.utility - op.cost) * weight
                    sub, sub_nodes = rec(
                        apply(op, s), depth + 1, child_acc,
                        weight * gamma, steps + (op.name,),
                    )
                    nodes += sub_nodes
                    best = merge(best, sub)
        return best, nodes

    if parallel and pr.k >= 1:
        branches = [op for op in pr.operators if applicable(op, pr.s0)]
        if minimize:
            best = (_F0, ()) if consistent(goal, pr.s0) else None
        else:
            best = (_F0, ())
        nodes = 1
        if branches:
            with ThreadPoolExecutor(max_workers=min(8, len(branches))) as pool:
                futures = [
                    pool.submit(
                        rec,
                        apply(op, pr.s0),
                        1,
                        op.cost if minimize else op.utility - op.cost,
                        gamma,
                        (op.name,),
                    )
                    for op in branches
                ]
            # Merge in operator order, not completion order, so the
            # tie-break outcome cannot depend on scheduling.
            for fut in futures:
                sub, sub_nodes = fut.result()
                nodes += sub_nodes
                best = merge(best, sub)
    else:
        best, nodes = rec(pr.s0, 0, _F0, Fraction(1), ())

    if best is None:
        return SolveResult(None, None, nodes, "brute")
    return SolveResult(best[0], Plan.of(best[1]), nodes, "brute")


# ---------------------------------------------------------------------------
# Shared compact representation for the table-driven solvers.
# ---------------------------------------------------------------------------

class _Compact:
    """Index-based view of a problem: states become tuples of small ints."""

    __slots__ = ("pr", "names", "pre", "eff", "costs", "utils", "diffs", "s0", "goal", "_succ")

    def __init__(self, pr: Problem):
        self.pr = pr
        self._succ: dict[tuple, list[tuple[int, tuple]]] = {}
        pos = {v.name: i for i, v in enumerate(pr.variables)}
        val_idx = [{val: j for j, val in enumerate(v.domain)} for v in pr.variables]
        self.names = [o.name for o in pr.operators]
        self.pre = [
            tuple(sorted((pos[n], val_idx[pos[n]][v]) for n, v in o.pre.bindings))
            for o in pr.operators
        ]
        self.eff = [
            tuple(sorted((pos[n], val_idx[pos[n]][v]) for n, v in o.eff.bindings))
            for o in pr.operators
        ]
        self.costs = [o.cost for o in pr.operators]
        self.utils = [o.utility for o in pr.operators]
        self.diffs = [o.utility - o.cost for o in pr.operators]
        self.s0 = tuple(val_idx[pos[v.name]][pr.s0.value(v.name)] for v in pr.variables)
        g = pr.objective.goal
        self.goal = (
            None if g is None
            else tuple(sorted((pos[n], val_idx[pos[n]][v]) for n, v in g.bindings))
        )

    def applicable(self, oi: int, s: tuple) -> bool:
        for i, v in self.pre[oi]:
            if s[i] != v:
                return False
        return True

    def apply(self, oi: int, s: tuple) -> tuple:
        out = list(s)
        for i, v in self.eff[oi]:
            out[i] = v
        return tuple(out)

    def at_goal(self, s: tuple) -> bool:
        for i, v in self.goal:
            if s[i] != v:
                return False
        return True

    def successors(self, s: tuple) -> list[tuple[int, tuple]]:
        """Applicable (op index, successor state) pairs, cached per state."""
        row = self._succ.get(s)
        if row is None:
            row = [
                (oi, self.apply(oi, s))
                for oi in range(len(self.names))
                if self.applicable(oi, s)
            ]
            self._succ[s] = row
        return row


def _reach(c: _Compact, lim: Limits):
    """Breadth-first closure of s0 under all operators.

    Returns (states, trans) with trans[si] = [(op index, successor index)]
    over applicable operators, in operator-name order. The state-table
    guard |states| * k trips incrementally, so work stays bounded by the
    limit even on huge spaces.
    """
    k = c.pr.k
    states = [c.s0]
    index = {c.s0: 0}
    trans: list[list[tuple[int, int]]] = []
    i = 0
    n_ops = len(c.names)
    while i < len(states):
        s = states[i]
        row = []
        for oi in range(n_ops):
            if c.applicable(oi, s):
                t = c.apply(oi, s)
                ti = index.get(t)
                if ti is None:
                    ti = len(states)
                    index[t] = ti
                    states.append(t)
                    lim.check("reachable-state table", len(states) * k, lim.states)
                row.append((oi, ti))
        trans.append(row)
        i += 1
    return states, trans


# ---------------------------------------------------------------------------
# Dynamic programming over (state, remaining).
# ---------------------------------------------------------------------------

def solve_dp(pr: Problem, limits: "Limits | None" = None) -> SolveResult:
    """Finite-horizon value iteration over reachable states.

    Maximizing objectives use V(s, 0) = 0 and
    V(s, d) = max(0, max over applicable o of w(o) + gamma * V(o(s), d-1)),
    the 0 branch being the always-allowed stop. MinCost-with-goal uses
    C(s, d) = 0 on goal states, else min of c(o) + C(o(s), d-1), infeasible
    at d = 0. Tables hold integers scaled by the weight denominators, so
    all arithmetic is exact. nodes_expanded counts table cells.
    """
    lim = limits if limits is not None else Limits.from_env()
    obj = pr.objective
    if obj.kind is ObjectiveKind.MIN_COST and obj.goal is None:
        return _degenerate("dp")
    c = _Compact(pr)
    states, trans = _reach(c, lim)
    n = len(states)
    k = pr.k
    nodes = n * (k + 1)

    if obj.kind is ObjectiveKind.MIN_COST:
        value, steps = _dp_min_cost(c, states, trans, k)
    else:
        value, steps = _dp_max(c, trans, k, obj.effective_gamma)
    if value is None:
        return SolveResult(None, None, nodes, "dp")
    return SolveResult(value, Plan.of(steps), nodes, "dp")


def _scale(fracs) -> tuple[int, list[int]]:
    denom = math.lcm(*(f.denominator for f in fracs), 1)
    return denom, [int(f * denom) for f in fracs]


def _dp_max(c: _Compact, trans, k: int, gamma: Fraction):
    scale, w = _scale(c.diffs)
    p, q = gamma.numerator, gamma.denominator
    n = len(trans)

    tables = [[0] * n]
    prev = tables[0]
    if p == 1 and q == 1:
        for _ in range(k):
            cur = [0] * n
            for si, row in enumerate(trans):
                best = 0
                for oi, ti in row:
                    v = w[oi] + prev[ti]
                    if v > best:
                        best = v
                cur[si] = best
            tables.append(cur)
            prev = cur
    else:
        qp = 1
        for _ in range(k):
            wq = [x * qp for x in w]
            cur = [0] * n
            for si, row in enumerate(trans):
                best = 0
                for oi, ti in row:
                    v = wq[oi] + p * prev[ti]
                    if v > best:
                        best = v
                cur[si] = best
            tables.append(cur)
            prev = cur
            qp *= q

    value = Fraction(tables[k][0], scale * q ** (k - 1))

    # Shortest value-achieving suffix length per cell, computed lazily and
    # only along optimal arcs; drives the shorter-then-lex tie-break.
    qpow = [q ** (d - 1) if d >= 1 else 0 for d in range(k + 1)]
    plen_memo: dict[tuple[int, int], int] = {}

    def plen(si: int, d: int) -> int:
        if tables[d][si] == 0:
            return 0
        key = (si, d)
        got = plen_memo.get(key)
        if got is None:
            target = tables[d][si]
            qp_d = qpow[d]
            prev_t = tables[d - 1]
            best = None
            for oi, ti in trans[si]:
                if w[oi] * qp_d + p * prev_t[ti] == target:
                    length = 1 + plen(ti, d - 1)
                    if best is None or length < best:
                        best = length
            plen_memo[key] = got = best
        return got

    steps = []
    si, d = 0, k
    while d > 0 and tables[d][si] != 0:
        target = tables[d][si]
        qp_d = qpow[d]
        want = plen(si, d)
        for oi, ti in trans[si]:
            if w[oi] * qp_d + p * tables[d - 1][ti] == target and 1 + plen(ti, d - 1) == want:
                steps.append(c.names[oi])
                si = ti
                d -= 1
                break
        else:
            raise AssertionError("value table lost its own optimum")
    return value, tuple(steps)


def _dp_min_cost(c: _Compact, states, trans, k: int):
    scale, cost = _scale(c.costs)
    n = len(states)
    inf = float("inf")
    at_goal = [c.at_goal(s) for s in states]

    tables = [[0 if at_goal[si] else inf for si in range(n)]]
    prev = tables[0]
    for _ in range(k):
        cur = [0] * n
        for si, row in enumerate(trans):
            if at_goal[si]:
                continue
            best = inf
            for oi, ti in row:
                v = cost[oi] + prev[ti]
                if v < best:
                    best = v
            cur[si] = best
        tables.append(cur)
        prev = cur

    if tables[k][0] == inf:
        return None, ()
    value = Fraction(int(tables[k][0]), scale)

    plen_memo: dict[tuple[int, int], int] = {}

    def plen(si: int, d: int) -> int:
        if at_goal[si]:
            return 0
        key = (si, d)
        got = plen_memo.get(key)
        if got is None:
            target = tables[d][si]
            prev_t = tables[d - 1]
            best = None
            for oi, ti in trans[si]:
                if cost[oi] + prev_t[ti] == target:
                    length = 1 + plen(ti, d - 1)
                    if best is None or length < best:
                        best = length
            plen_memo[key] = got = best
        return got

    steps = []
    si, d = 0, k
    while not at_goal[si]:
        target = tables[d][si]
        want = plen(si, d)
        for oi, ti in trans[si]:
            if cost[oi] + tables[d - 1][ti] == target and 1 + plen(ti, d - 1) == want:
                steps.append(c.names[oi])
                si = ti
                d -= 1
                break
        else:
            raise AssertionError("cost table lost its own optimum")
    return value, tuple(steps)


# ---------------------------------------------------------------------------
# Branch and bound.
# ---------------------------------------------------------------------------

def solve_bnb(pr: Problem, limits: "Limits | None" = None) -> SolveResult:
    """Depth-first search with admissible pruning and exact-suffix memoing.

    The incumbent starts at the empty plan. For maximizing objectives a
    subtree is cut when prefix value plus an optimistic suffix bound cannot
    beat the incumbent: the bound is max(0, max op net) times the remaining
    undiscounted step count, or times the remaining discount-weight mass
    under DiscountedNetBenefit. Preconditions are ignored by the bound, so
    it is admissible. For MinCost the accumulated cost prunes, refined so a
    cost-tied subtree is still explored while it could hold a shorter plan.

    Fully explored subtrees are memoized per (state, remaining) and replayed
    by re-basing when reached again along another prefix. Cuts never drop a
    plan that would win the tie-break, so the result matches solve_dp and
    solve_brute exactly, plan included. nodes_expanded counts visited
    prefixes and is never higher than solve_brute's count.
    """
    obj = pr.objective
    if obj.kind is ObjectiveKind.MIN_COST:
        if obj.goal is None:
            return _degenerate("bnb")
        return _bnb_min_cost(pr)
    return _bnb_max(pr)


def _bnb_max(pr: Problem) -> SolveResult:
    c = _Compact(pr)
    k = pr.k
    gamma = pr.objective.effective_gamma
    names = c.names
    diffs = c.diffs
    step_gain = max(max(diffs, default=_F0), _F0)

    gamma_pow = [Fraction(1)]
    for _ in range(k):
        gamma_pow.append(gamma_pow[-1] * gamma)
    # tail[d] = sum of discount weights for steps d..k-1
    tail = [_F0] * (k + 1)
    for d in range(k - 1, -1, -1):
        tail[d] = gamma_pow[d] + tail[d + 1]

    inc_val = _F0
    inc_steps: tuple[str, ...] = ()
    nodes = 0
    memo: dict[tuple[tuple, int], tuple[Fraction, tuple[str, ...]]] = {}

    def offer(val, steps):
        nonlocal inc_val, inc_steps
        if _improves_max(val, steps, inc_val, inc_steps):
            inc_val, inc_steps = val, steps

    def rec(s: tuple, depth: int, acc: Fraction, steps: tuple[str, ...]):
        """Returns (suffix-local best value, its steps, exact flag)."""
        nonlocal nodes
        nodes += 1
        offer(acc, steps)
        if depth == k:
            return _F0, (), True
        hit = memo.get((s, k - depth))
        if hit is not None:
            lv, lsteps = hit
            offer(acc + gamma_pow[depth] * lv, steps + lsteps)
            return lv, lsteps, True
        if acc + step_gain * tail[depth] <= inc_val:
            # Nothing below can beat the incumbent, even on tie-break: an
            # equal-value descendant would need all k - depth steps at the
            # maximal per-step gain, making it no shorter than any plan.
            return _F0, (), False
        best_lv, best_lsteps = _F0, ()
        exact = True
        for oi, t in c.successors(s):
            w = diffs[oi]
            clv, clsteps, cexact = rec(
                t, depth + 1,
                acc + gamma_pow[depth] * w, steps + (names[oi],),
            )
            exact = exact and cexact
            lv = w + gamma * clv
            lsteps = (names[oi],) + clsteps
            if _improves_max(lv, lsteps, best_lv, best_lsteps):
                best_lv, best_lsteps = lv, lsteps
        if exact:
            memo[(s, k - depth)] = (best_lv, best_lsteps)
        return best_lv, best_lsteps, exact

    rec(c.s0, 0, _F0, ())
    return SolveResult(inc_val, Plan.of(inc_steps), nodes, "bnb")


def _bnb_min_cost(pr: Problem) -> SolveResult:
    c = _Compact(pr)
    k = pr.k
    names = c.names
    costs = c.costs

    inc: "tuple[Fraction, tuple[str, ...]] | None" = None
    nodes = 0
    infeasible = object()
    memo: dict[tuple[tuple, int], object] = {}

    def offer(val, steps):
        nonlocal inc
        if inc is None or _improves_min(val, steps, inc[0], inc[1]):
            inc = (val, steps)

    def rec(s: tuple, depth: int, acc: Fraction, steps: tuple[str, ...]):
        nonlocal nodes
        nodes += 1
        if c.at_goal(s):
            offer(acc, steps)
        if depth == k:
            return (0, ()) if c.at_goal(s) else infeasible, True
        hit = memo.get((s, k - depth))
        if hit is not None:
            if hit is not infeasible:
                lv, lsteps = hit
                offer(acc + lv, steps + lsteps)
            return hit, True
        if inc is not None and (
            acc > inc[0] or (acc == inc[0] and depth + 1 >= len(inc[1]))
        ):
            # Costs are non-negative, so nothing below is cheaper; on a cost
            # tie only a strictly shorter descendant could win, and none fits.
            return infeasible, False
        best = (Fraction(0), ()) if c.at_goal(s) else None
        exact = True
        for oi, t in c.successors(s):
            sub, sub_exact = rec(
                t, depth + 1, acc + costs[oi], steps + (names[oi],)
            )
            exact = exact and sub_exact
            if sub is not infeasible:
                lv = costs[oi] + sub[0]
                lsteps = (names[oi],) + sub[1]
                if best is None or _improves_min(lv, lsteps, best[0], best[1]):
                    best = (lv, lsteps)
        result = infeasible if best is None else best
        if exact:
            memo[(s, k - depth)] = result
        return result, exact

    rec(c.s0, 0, _F0, ())
    if inc is None:
        return SolveResult(None, None, nodes, "bnb")
    return SolveResult(inc[0], Plan.of(inc[1]), nodes, "bnb")


def solve(pr: Problem, algo: str = "dp", limits: "Limits | None" = None, **kwargs) -> SolveResult:
    try:
        fn = ALGORITHMS[algo]
    except KeyError:
        raise ValueError(f"unknown algorithm '{algo}'") from None
    return fn(pr, limits=limits, **kwargs)


# ---------------------------------------------------------------------------
# Pareto front.
# ---------------------------------------------------------------------------

def pareto_front(pr: Problem, limits: "Limits | None" = None) -> ParetoFront:
    """Exact non-dominated (cost, utility) outcomes over all valid plans.

    Dynamic programming over (state, remaining) with per-cell dominance
    pruning: level 0 holds just (0, 0); each later level merges stopping
    with every applicable one-step extension of the successor's front.
    Witness plans inherit the shortest-then-lex tie-break per point.
    """
    lim = limits if limits is not None else Limits.from_env()
    c = _Compact(pr)
    states, trans = _reach(c, lim)
    n = len(states)
    zero = ((_F0, _F0, ()),)

    prev = [zero] * n
    for _ in range(pr.k):
        cur = []
        for si in range(n):
            cands = [(_F0, _F0, ())]
            for oi, ti in trans[si]:
                co, uo, name = c.costs[oi], c.utils[oi], c.names[oi]
                for cc, uu, st in prev[ti]:
                    cands.append((co + cc, uo + uu, (name,) + st))
            cur.append(_nondominated(cands))
        prev = cur

    points = tuple((cst, ut, Plan.of(st)) for cst, ut, st in prev[0])
    return ParetoFront(points)


def _nondominated(cands):
    """Dominance filter keeping one witness per surviving point.

    Sorting by (cost asc, utility desc, length, steps) makes a single sweep
    with a rising utility watermark exact: equal points keep their first
    (tie-break least) witness, dominated points never raise the watermark.
    """
    cands.sort(key=lambda t: (t[0], -t[1], len(t[2]), t[2]))
    out = []
    best_u = None
    for cst, ut, st in cands:
        if best_u is None or ut > best_u:
            out.append((cst, ut, st))
            best_u = ut
    return tuple(out)


ALGORITHMS = {
    "brute": solve_brute,
    "dp": solve_dp,
    "bnb": solve_bnb,
}
