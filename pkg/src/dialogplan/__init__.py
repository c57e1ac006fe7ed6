"""Exact bounded-horizon planning for cost/utility dialogs.

The package solves finite-domain, finite-horizon planning problems exactly
(minimum cost, net benefit, discounted net benefit, Pareto fronts), compiles
slot/query/advisory dialog specs into such problems, executes them against
real or simulated users with replanning, and exposes live dialog sessions
over HTTP.
"""

from .model import (
    Objective,
    ObjectiveKind,
    Operator,
    PartialState,
    Plan,
    PlanEval,
    PlanningError,
    Problem,
    State,
    ValidationError,
    VariableDef,
    applicable,
    apply,
    as_rational,
    consistent,
    evaluate_plan,
    format_rational,
    objective_value,
    validate_plan,
)
from .limits import Limits, LimitExceededError
from .search import (
    ParetoFront,
    SolveResult,
    pareto_front,
    solve,
    solve_bnb,
    solve_brute,
    solve_dp,
)
from .execution import (
    Environment,
    Episode,
    EpisodeStatus,
    FaithfulEnvironment,
    Turn,
    replan_step,
    run_episode,
)
from .execution import transcript_document, transcript_lines
from .dialog import (
    Advisory,
    BUILTIN_SPECS,
    DialogSpec,
    Query,
    SimUser,
    Slot,
    compile_dialog,
    compiled_operator_count,
    make_sim_env,
    render_message,
    water_spec,
)
from .textio import (
    SourceError,
    detect_kind,
    parse_dialog_spec,
    parse_problem,
    serialize_dialog_spec,
    serialize_problem,
)
from .cli import GEN_CLASSES, GenClass, gen_instance

__version__ = "0.1.0"
