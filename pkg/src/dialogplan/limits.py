"""Resource guards shared by the solvers, the compiler, and the CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass

from .model import PlanningError

ENV_VAR = "DIALOG_NETBENCH_LIMITS"

DEFAULT_BRUTE_NODES = 2_000_000
DEFAULT_STATE_CELLS = 2_000_000
DEFAULT_COMPILED_OPS = 10_000


class LimitExceededError(PlanningError):
    """A guard tripped before the work was attempted."""

    def __init__(self, what: str, needed: int, limit: int):
        super().__init__(f"{what} needs {needed}, limit is {limit}")
        self.what = what
        self.needed = needed
        self.limit = limit


@dataclass(frozen=True)
class Limits:
    """Upper bounds applied before a computation is started.

    brute: maximum size of the plan-prefix tree solve_brute may enumerate,
        counted as sum over d = 0..k of |O|**d.
    states: maximum number of (state, remaining) table cells for solve_dp,
        counted as |reachable states| * (k + 1).
    ops: maximum number of operators dialog compilation may emit.
    """

    brute: int = DEFAULT_BRUTE_NODES
    states: int = DEFAULT_STATE_CELLS
    ops: int = DEFAULT_COMPILED_OPS

    @classmethod
    def from_env(cls, environ: "dict[str, str] | None" = None) -> "Limits":
        """Read overrides from DIALOG_NETBENCH_LIMITS.

        The format is comma-separated key=value pairs, e.g.
        "brute=500000,states=100000,ops=2000". Unknown keys and malformed
        entries raise ValueError so typos do not silently run unguarded.
        """
        env = os.environ if environ is None else environ
        raw = env.get(ENV_VAR, "").strip()
        if not raw:
            return cls()
        values: dict[str, int] = {}
        for entry in raw.split(","):
            entry = entry.strip()
            if not entry:
                continue
            key, sep, val = entry.partition("=")
            key = key.strip()
            if not sep or key not in ("brute", "states", "ops"):
                raise ValueError(f"bad {ENV_VAR} entry: {entry!r}")
            try:
                n = int(val.strip())
            except ValueError:
                raise ValueError(f"bad {ENV_VAR} entry: {entry!r}") from None
            if n < 1:
                raise ValueError(f"{ENV_VAR} values must be positive: {entry!r}")
            values[key] = n
        return cls(**values)

    def check(self, what: str, needed: int, limit: int):
        if needed > limit:
            raise LimitExceededError(what, needed, limit)
