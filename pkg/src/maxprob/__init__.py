"""Most-probable and expected occurrence vectors at finite sample size, and
their divergence-minimization limits."""

from .divergence import jem_solve, jeffreys_entropy, npml_solve, rem_solve
from .errors import *  # noqa: F401,F403
from .experiment import (
    ExperimentConfig,
    ResultRow,
    ResultTable,
    emit,
    load_config,
    parse_config,
    reproduce_paper_tables,
    run_experiment,
)
from .finite import FiniteAnswer, solve_q1, solve_q2, solve_q4, solve_q4_expected
from .kernel import (
    digamma,
    digamma_gap,
    log_gen_multinomial,
    log_multinomial,
    scaled_differential_identity,
)
from .model import (
    MomentConstraintSet,
    OccurrenceVector,
    Pmf,
    SolverReport,
    WorkingSetSpec,
    build_working_set_spec,
    moment_constraints,
    parse_rational,
    uniform_pmf,
    validate_pmf,
)
from .workingset import WorkingSetStream, count, enumerate_working_set

__version__ = "0.1.0"
