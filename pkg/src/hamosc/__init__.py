"""Sufficient oscillation tests for linear Hamiltonian systems.

The package has three layers: a small expression language for
time-dependent matrix coefficients (:mod:`hamosc.expr`,
:mod:`hamosc.matfun`), the criterion pipelines that reduce the matrix
system to planar scalar tests (:mod:`hamosc.criteria`,
:mod:`hamosc.scalarosc`, :mod:`hamosc.linalg`), and independent numerical
oracles that integrate the system itself (:mod:`hamosc.hamsys`).  Every
criterion verdict is either "oscillatory" with an evidence trail or
"inconclusive"; nothing here ever claims nonoscillation.
"""

from .config import DEFAULT_INTEGRATOR, DEFAULT_TOLERANCES, IntegratorSettings, Tolerances
from .expr import (
    EvalError, ExprSyntaxError, UnknownIdentifierError,
    compile_expr, differentiate, evaluate, parse_scalar_expr, to_source,
)
from .matfun import MatrixFunction, num_derivative, parse_matrix_function
from .linalg import (
    HermitianCheckReport, OmegaReport, hermitian_check, is_psd,
    least_eigenvalue, omega_membership, solve_eq27, solve_lyapunov, sqrt_psd,
    trace,
)
from .verdict import INCONCLUSIVE, OSCILLATORY, OSCILLATORY_ON_INTERVAL, \
    Condition, CriterionVerdict
from .scalarosc import (
    E_function, ScalarSystem, prufer_integrate, sl_oscillation_check,
    theorem23_check, theorem24_check,
)
from .hamsys import (
    OracleTrace, PreparedInitial, SystemSpec, detect_det_zeros,
    integrate_riccati, integrate_system, make_prepared_initial,
    oracle_verdict, validate_system,
)
from .criteria import (
    DFFunction, SChoice, build_DS, corollary_check, remark21_aggregate,
    sigma_S, suggest_S, theorem21_check, theorem22_check, theorem25_check,
)
from .presets import PRESET_IDS, build_preset, preset_catalog

__version__ = "0.1.0"
