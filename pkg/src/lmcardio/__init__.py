"""Levenberg-Marquardt training of small MLPs for tabular clinical records."""
from .linalg import IndefiniteSystem, gram, mul_transpose_vec, solve_spd
from .lm import (
    LmConfig,
    NonFiniteObjective,
    Termination,
    TrainHistory,
    damping_update,
    lm_train,
    predict_sse_curve,
    solve_lm_step,
    sse,
)
from .mlp import (
    Architecture,
    InitSpec,
    MlpModel,
    MlpProblem,
    flatten,
    forward,
    init_model,
    predict,
    residual_jacobian,
    unflatten,
)

__version__ = "0.1.0"
