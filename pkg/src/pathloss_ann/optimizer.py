"""Full-batch minimizers over a flat parameter vector.

``minimize_lbfgs`` is limited-memory BFGS (two-loop recursion) with a
strong-Wolfe line search; ``minimize_gd`` is fixed-step gradient descent.
``train`` wires either one to a network's loss and gradients.

An objective is a callable ``f(params) -> (loss, gradient)`` taking and
returning ``array('d')`` vectors.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import mlp
from .numeric import Matrix
from .numeric import vector as vec

Objective = Callable[[array], "tuple[float, array]"]

TOLERANCE = "tolerance"
MAX_ITERATIONS = "max_iterations"
LINE_SEARCH_FAILURE = "line_search_failure"

_CURVATURE_EPS = 1e-10


class NumericalError(ValueError, ArithmeticError):
    """The objective produced a non-finite loss or gradient."""


@dataclass(frozen=True)
class OptimizerConfig:
    memory: int = 10
    max_iterations: int = 1000
    tolerance: float = 1e-5
    learning_rate: float = 0.001  # gradient descent only; L-BFGS ignores it
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_search_steps: int = 20

    def __post_init__(self):
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise ValueError(
                f"need 0 < wolfe_c1 < wolfe_c2 < 1, got {self.wolfe_c1}, {self.wolfe_c2}"
            )
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.memory < 1:
            raise ValueError(f"memory must be >= 1, got {self.memory}")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if self.max_line_search_steps < 1:
            raise ValueError("max_line_search_steps must be >= 1")
        if not self.learning_rate >= 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")

    def to_dict(self) -> dict:
        return {
            "memory": self.memory,
            "max_iterations": self.max_iterations,
            "tolerance": self.tolerance,
            "learning_rate": self.learning_rate,
            "wolfe_c1": self.wolfe_c1,
            "wolfe_c2": self.wolfe_c2,
            "max_line_search_steps": self.max_line_search_steps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> OptimizerConfig:
        known = cls().to_dict()
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown optimizer settings: {sorted(unknown)}")
        return cls(**{k: type(known[k])(v) for k, v in d.items()})


@dataclass
class OptimizeResult:
    params: array
    loss: float
    iterations: int
    reason: str
    loss_history: list[float] = field(default_factory=list)
    evaluations: int = 0

    def summary(self) -> dict:
        return {
            "loss": self.loss,
            "iterations": self.iterations,
            "reason": self.reason,
            "evaluations": self.evaluations,
        }


@dataclass(frozen=True)
class StepInfo:
    """One accepted L-BFGS step, passed to the optional callback."""

    iteration: int
    step: float
    loss_before: float
    slope_before: float  # gradient . direction at the start point
    loss_after: float
    slope_after: float  # gradient . direction at the accepted point


def _evaluate(objective: Objective, x: array) -> tuple[float, array]:
    f, g = objective(x)
    if not isinstance(g, array):
        g = vec.as_vector(g)
    return float(f), g


def _check_start(f: float, g: array, n: int) -> None:
    if len(g) != n:
        raise ValueError(f"objective gradient has length {len(g)}, parameters {n}")
    if not math.isfinite(f) or not vec.all_finite(g):
        raise NumericalError("objective is not finite at the starting point")


def _stalled(f_new: float, f_old: float, tol: float) -> bool:
    return abs(f_new - f_old) < tol * max(1.0, abs(f_new))


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic through (a, fa, da) and (b, fb, db), or None."""
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    rad = d1 * d1 - da * db
    if rad < 0:
        return None
    d2 = math.copysign(math.sqrt(rad), b - a)
    denom = db - da + 2.0 * d2
    if denom == 0:
        return None
    t = b - (b - a) * (db + d2 - d1) / denom
    return t if math.isfinite(t) else None


def _strong_wolfe(phi, f0, d0, step, c1, c2, budget):
    """Find a step satisfying the strong Wolfe conditions.

    ``phi(t)`` returns ``(f, slope, payload)`` for the point ``x + t * d``.
    Returns ``(t, f, slope, payload)`` or ``None`` if ``budget`` evaluations
    do not suffice.
    """
    used = 0
    t_prev, f_prev, d_prev = 0.0, f0, d0
    t = step
    first = True
    while used < budget:
        f, d, payload = phi(t)
        used += 1
        if not (math.isfinite(f) and math.isfinite(d)):
            # overshot into a non-finite region; shrink toward the last good point
            t = t_prev + 0.5 * (t - t_prev)
            continue
        if f > f0 + c1 * t * d0 or (not first and f >= f_prev):
            return _zoom(phi, f0, d0, c1, c2, t_prev, f_prev, d_prev, t, f, d, budget - used)
        if abs(d) <= -c2 * d0:
            return t, f, d, payload
        if d >= 0:
            return _zoom(phi, f0, d0, c1, c2, t, f, d, t_prev, f_prev, d_prev, budget - used)
        # extrapolate: cubic guess clamped to [t + 1.1 (t - t_prev), 10 t]
        lo, hi = t + 1.1 * (t - t_prev), 10.0 * t
        guess = _cubic_min(t_prev, f_prev, d_prev, t, f, d)
        t_next = 2.0 * t if guess is None else min(max(guess, lo), hi)
        t_prev, f_prev, d_prev = t, f, d
        t = t_next
        first = False
    return None


def _zoom(phi, f0, d0, c1, c2, lo, f_lo, d_lo, hi, f_hi, d_hi, budget):
    for _ in range(max(budget, 0)):
        width = hi - lo
        if abs(width) <= 1e-16 * max(1.0, abs(lo)):
            break
        guess = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
        left, right = min(lo, hi), max(lo, hi)
        margin = 0.1 * abs(width)
        if guess is None or not (left + margin <= guess <= right - margin):
            guess = lo + 0.5 * width
        t = guess
        f, d, payload = phi(t)
        if not (math.isfinite(f) and math.isfinite(d)):
            # an infinite end makes the cubic guess undefined, so the next trial bisects
            hi, f_hi, d_hi = t, math.inf, math.inf
            continue
        if f > f0 + c1 * t * d0 or f >= f_lo:
            hi, f_hi, d_hi = t, f, d
        else:
            if abs(d) <= -c2 * d0:
                return t, f, d, payload
            if d * (hi - lo) >= 0:
                hi, f_hi, d_hi = lo, f_lo, d_lo
            lo, f_lo, d_lo = t, f, d
    return None


class _Line:
    """Restriction of the objective to a ray, counting evaluations."""

    def __init__(self, objective: Objective):
        self.objective = objective
        self.evaluations = 0

    def along(self, x: array, d: array):
        def phi(t):
            xt = vec.axpy(t, d, x)
            ft, gt = _evaluate(self.objective, xt)
            self.evaluations += 1
            if len(gt) != len(xt) or not vec.all_finite(gt):
                return math.nan, math.nan, None
            return ft, vec.dot(gt, d), (xt, gt)

        return phi


def _two_loop(g: array, pairs: list) -> array:
    """Apply the L-BFGS inverse-Hessian estimate to ``g``."""
    q = g
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * vec.dot(s, q)
        alphas.append(a)
        q = vec.axpy(-a, y, q)
    s, y, _ = pairs[-1]
    gamma = vec.dot(s, y) / vec.dot(y, y)
    r = vec.scale(q, gamma)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * vec.dot(y, r)
        r = vec.axpy(a - b, s, r)
    return r


def minimize_lbfgs(
    objective: Objective,
    start,
    config: OptimizerConfig = OptimizerConfig(),
    callback: Optional[Callable[[StepInfo], None]] = None,
) -> OptimizeResult:
    x = vec.as_vector(start)
    f, g = _evaluate(objective, x)
    _check_start(f, g, len(x))
    line = _Line(objective)
    history = [f]
    pairs: list = []
    tol = config.tolerance

    if vec.norm_inf(g) < tol:
        return OptimizeResult(x, f, 0, TOLERANCE, history, 1)

    k = 0
    reason = MAX_ITERATIONS
    while k < config.max_iterations:
        if pairs:
            d = vec.scale(_two_loop(g, pairs), -1.0)
            step0 = 1.0
        else:
            d = vec.scale(g, -1.0)
            step0 = 1.0 / vec.norm2(g)
        slope0 = vec.dot(g, d)
        if not slope0 < 0:
            pairs.clear()
            d = vec.scale(g, -1.0)
            step0 = 1.0 / vec.norm2(g)
            slope0 = vec.dot(g, d)

        found = _strong_wolfe(
            line.along(x, d), f, slope0, step0,
            config.wolfe_c1, config.wolfe_c2, config.max_line_search_steps,
        )
        if found is None and pairs:
            # quasi-Newton direction failed; retry once along steepest descent
            pairs.clear()
            d = vec.scale(g, -1.0)
            slope0 = vec.dot(g, d)
            step0 = 1.0 / vec.norm2(g)
            found = _strong_wolfe(
                line.along(x, d), f, slope0, step0,
                config.wolfe_c1, config.wolfe_c2, config.max_line_search_steps,
            )
        if found is None:
            reason = LINE_SEARCH_FAILURE
            break

        t, f_new, slope_new, (x_new, g_new) = found
        k += 1
        if callback is not None:
            callback(StepInfo(k, t, f, slope0, f_new, slope_new))

        s = vec.sub(x_new, x)
        y = vec.sub(g_new, g)
        sy = vec.dot(s, y)
        if sy > _CURVATURE_EPS * vec.norm2(s) * vec.norm2(y):
            pairs.append((s, y, 1.0 / sy))
            if len(pairs) > config.memory:
                pairs.pop(0)

        f_old = f
        x, f, g = x_new, f_new, g_new
        history.append(f)
        if vec.norm_inf(g) < tol or _stalled(f, f_old, tol):
            reason = TOLERANCE
            break

    return OptimizeResult(x, f, k, reason, history, 1 + line.evaluations)


def minimize_gd(
    objective: Objective,
    start,
    config: OptimizerConfig = OptimizerConfig(),
) -> OptimizeResult:
    """Fixed-step descent ``x <- x - learning_rate * grad``.

    The loss-change stopping rule only applies to steps that moved the
    parameters, so a zero learning rate runs to ``max_iterations``.
    """
    x = vec.as_vector(start)
    f, g = _evaluate(objective, x)
    _check_start(f, g, len(x))
    evaluations = 1
    history = [f]
    lr = config.learning_rate
    tol = config.tolerance

    if vec.norm_inf(g) < tol:
        return OptimizeResult(x, f, 0, TOLERANCE, history, evaluations)

    k = 0
    reason = MAX_ITERATIONS
    while k < config.max_iterations:
        x_new = vec.axpy(-lr, g, x)
        f_new, g_new = _evaluate(objective, x_new)
        evaluations += 1
        if not math.isfinite(f_new) or not vec.all_finite(g_new):
            raise NumericalError(f"non-finite loss or gradient at gradient-descent iteration {k + 1}")
        k += 1
        moved = x_new != x
        f_old = f
        x, f, g = x_new, f_new, g_new
        history.append(f)
        if vec.norm_inf(g) < tol or (moved and _stalled(f, f_old, tol)):
            reason = TOLERANCE
            break

    return OptimizeResult(x, f, k, reason, history, evaluations)


def network_objective(config: mlp.NetworkConfig, x: Matrix, y: Matrix) -> Objective:
    """Loss and flattened gradient of a network with architecture ``config`` on (x, y)."""

    def objective(params):
        net = mlp.unflatten(config, params)
        pred, trace = mlp.forward(net, x)
        value = mlp.loss(net, pred, y)
        grads = mlp.backward(net, trace, x, y)
        return value, mlp.flatten_matrices(grads)

    return objective


def train(
    net: mlp.Network,
    x: Matrix,
    y: Matrix,
    opt: OptimizerConfig = OptimizerConfig(),
    method: str = "lbfgs",
    center_output: bool = True,
) -> tuple[mlp.Network, OptimizeResult]:
    """Fit ``net`` to targets ``y`` (N x 1) from features ``x`` (N x D).

    With ``center_output`` the optimizer starts from the least-squares output
    bias (see :func:`mlp.center_output_bias`); the other weights are used as
    given.
    """
    if x.rows != y.rows:
        raise ValueError(f"train: {x.rows} feature rows but {y.rows} targets")
    if y.cols != 1:
        raise ValueError(f"train: targets must be N x 1, got {y.shape}")
    if center_output:
        net = mlp.center_output_bias(net, x, y)
    objective = network_objective(net.config, x, y)
    start = mlp.flatten(net)
    if method == "lbfgs":
        result = minimize_lbfgs(objective, start, opt)
    elif method == "gd":
        result = minimize_gd(objective, start, opt)
    else:
        raise ValueError(f"unknown training method {method!r}; expected lbfgs or gd")
    if not math.isfinite(result.loss):
        raise NumericalError("training ended with a non-finite loss")
    return mlp.unflatten(net.config, result.params), result
