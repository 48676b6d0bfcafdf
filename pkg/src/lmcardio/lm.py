"""Levenberg-Marquardt training loop for nonlinear least squares.

Any object with ``residuals(beta)`` and ``residual_jacobian(beta)`` methods can
be trained; residuals are ``y - f(beta)`` and the Jacobian is ``df/dbeta``.
"""
import csv
import enum
import math
from dataclasses import dataclass, field, fields
from typing import Protocol

import numpy as np

from ._fmt import fmt_float
from .linalg import IndefiniteSystem, as_matrix, as_vector, gram, mul_transpose_vec, solve_spd

MODES = ("identity", "diagonal")


class NonFiniteObjective(ArithmeticError):
    """The sum of squares became NaN or infinite; ``history`` holds the run so far."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history


class Termination(str, enum.Enum):
    MAX_ITERATIONS = "max_iterations"
    GRADIENT_CONVERGED = "gradient_converged"
    STEP_CONVERGED = "step_converged"
    SSE_REACHED = "sse_reached"
    LAMBDA_OVERFLOW = "lambda_overflow"


class ResidualProvider(Protocol):
    def residuals(self, beta: np.ndarray) -> np.ndarray: ...

    def residual_jacobian(self, beta: np.ndarray) -> tuple: ...


@dataclass(frozen=True)
class LmConfig:
    lambda0: float = 1e-3
    lambda_increase: float = 10.0
    lambda_decrease: float = 10.0
    lambda_max: float = 1e10
    lambda_min: float = 1e-12
    mode: str = "diagonal"
    max_iterations: int = 200
    gradient_tol: float = 1e-8
    step_tol: float = 1e-10
    sse_tol: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (0 <= self.lambda_min <= self.lambda0 <= self.lambda_max):
            raise ValueError("need lambda_min <= lambda0 <= lambda_max")
        if self.lambda0 <= 0 or self.lambda_max <= 0:
            raise ValueError("lambda0 and lambda_max must be positive")
        if not (self.lambda_increase > 1 and self.lambda_decrease > 1):
            raise ValueError("lambda factors must exceed 1")
        if min(self.gradient_tol, self.step_tol, self.sse_tol) < 0:
            raise ValueError("tolerances must be non-negative")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    sse_before: float
    sse_after: float
    lam: float
    accepted: bool
    grad_inf_norm: float


@dataclass
class TrainHistory:
    records: list = field(default_factory=list)
    termination: Termination = None

    def accepted(self):
        return [rec for rec in self.records if rec.accepted]

    def check_invariants(self, cfg):
        """Return a list of violated invariants (empty when the history is sound)."""
        problems = []
        prev = math.inf
        for rec in self.records:
            if rec.accepted:
                if not rec.sse_after < rec.sse_before:
                    problems.append(f"iteration {rec.iteration}: accepted without decrease")
                if not rec.sse_after < prev:
                    problems.append(f"iteration {rec.iteration}: accepted S not decreasing")
                prev = rec.sse_after
            if not cfg.lambda_min <= rec.lam <= cfg.lambda_max:
                problems.append(f"iteration {rec.iteration}: lambda {rec.lam} out of bounds")
        return problems


def sse(r):
    """Sum of squared residuals S(beta)."""
    r = np.asarray(r, dtype=np.float64)
    return float(r @ r)


def solve_lm_step(J, r, lam, mode="diagonal"):
    """Solve ``(lam*D + J'J) delta = J'r``.

    D is the identity or ``diag(J'J)``; zero diagonal entries are replaced by 1
    in the latter so dead parameters do not make the system singular.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    A = gram(J)
    g = mul_transpose_vec(J, r)
    if mode == "identity":
        d = np.ones(A.shape[0])
    else:
        d = np.diag(A).copy()
        d[d == 0.0] = 1.0
    A[np.diag_indices_from(A)] += lam * d
    return solve_spd(A, g)


def damping_update(accepted, lam, cfg):
    if accepted:
        lam = max(lam / cfg.lambda_decrease, cfg.lambda_min)
    else:
        lam = min(lam * cfg.lambda_increase, cfg.lambda_max)
    return min(max(lam, cfg.lambda_min), cfg.lambda_max)


def lm_train(provider, beta0, cfg=LmConfig(), callback=None):
    """Minimise the provider's sum of squares starting from ``beta0``.

    Every proposal, accepted or rejected, lands in the returned history.
    A proposal is accepted iff it strictly lowers S. Rejected proposals reuse
    the current Jacobian. ``callback(iteration, beta)`` is invoked after each
    accepted step.
    """
    beta = as_vector(beta0, "beta0").copy()
    lam = cfg.lambda0
    history = TrainHistory()

    r, J = provider.residual_jacobian(beta)
    r = np.asarray(r, dtype=np.float64)
    J = np.asarray(J, dtype=np.float64)
    S = sse(r)
    if not math.isfinite(S):
        raise NonFiniteObjective("initial sum of squares is not finite", history)
    g = J.T @ r
    gnorm = float(np.max(np.abs(g))) if g.size else 0.0

    for it in range(cfg.max_iterations):
        if S <= cfg.sse_tol:
            history.termination = Termination.SSE_REACHED
            return beta, history
        if gnorm <= cfg.gradient_tol:
            history.termination = Termination.GRADIENT_CONVERGED
            return beta, history

        try:
            delta = solve_lm_step(as_matrix(J, "J"), r, lam, cfg.mode)
        except IndefiniteSystem:
            delta = None

        if delta is None:
            S_new = math.inf
            accepted = False
        else:
            trial = beta + delta
            r_new = np.asarray(provider.residuals(trial), dtype=np.float64)
            S_new = sse(r_new)
            if not math.isfinite(S_new):
                history.records.append(IterationRecord(it, S, S_new, lam, False, gnorm))
                raise NonFiniteObjective(
                    f"sum of squares is {S_new} at iteration {it}", history
                )
            accepted = S_new < S

        history.records.append(IterationRecord(it, S, S_new, lam, accepted, gnorm))

        if accepted:
            beta = trial
            r, J = provider.residual_jacobian(beta)
            r = np.asarray(r, dtype=np.float64)
            J = np.asarray(J, dtype=np.float64)
            S = S_new
            g = J.T @ r
            gnorm = float(np.max(np.abs(g))) if g.size else 0.0
            if callback is not None:
                callback(it, beta.copy())
        elif lam >= cfg.lambda_max:
            history.termination = Termination.LAMBDA_OVERFLOW
            return beta, history

        lam = damping_update(accepted, lam, cfg)

        # a tiny rejected step only reflects heavy damping, not convergence
        if accepted and np.linalg.norm(delta) / (1.0 + np.linalg.norm(beta)) <= cfg.step_tol:
            history.termination = Termination.STEP_CONVERGED
            return beta, history

    if S <= cfg.sse_tol:
        history.termination = Termination.SSE_REACHED
    elif gnorm <= cfg.gradient_tol:
        history.termination = Termination.GRADIENT_CONVERGED
    else:
        history.termination = Termination.MAX_ITERATIONS
    return beta, history


def predict_sse_curve(history):
    """(index, S) over accepted proposals only."""
    return [(i, rec.sse_after) for i, rec in enumerate(history.accepted())]


HISTORY_HEADER = ["iteration", "sse_before", "sse_after", "lambda", "accepted", "grad_inf_norm"]


def write_history_csv(history, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        for rec in history.records:
            writer.writerow([
                rec.iteration,
                fmt_float(rec.sse_before),
                fmt_float(rec.sse_after),
                fmt_float(rec.lam),
                int(rec.accepted),
                fmt_float(rec.grad_inf_norm),
            ])
