"""Budget-matched baseline optimizers: projected gradient descent with
forward-difference gradients, global-best PSO, and plain random search.

All three work on the same unit-cube objective interface as the BO loop and
charge every objective call (difference probes included) against the same
evaluation budget, so comparisons are evaluation-for-evaluation fair.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bayesopt import OptimizationResult, _best_of_trace
from .identify import ParameterBox


@dataclass(frozen=True)
class GdConfig:
    """Fixed-step normalized-gradient descent settings (unit coordinates)."""

    budget: int
    seed: int
    alpha: float = 0.05    # step length per iteration
    epsilon: float = 1e-3  # forward-difference probe distance

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("alpha must be > 0")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be > 0")


@dataclass(frozen=True)
class PsoConfig:
    """Global-best PSO with standard constriction-style coefficients."""

    budget: int
    seed: int
    swarm_size: int = 10
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    v_max: float = 0.5     # velocity clamp, unit coordinates

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.budget < self.swarm_size:
            raise ValueError(
                f"budget {self.budget} below swarm size {self.swarm_size}")


def _make_recorder(objective, box: ParameterBox):
    trace = []

    def evaluate(unit_point):
        loss = float(objective(unit_point))
        trace.append((len(trace), box.denormalize(unit_point), loss))
        return loss

    return trace, evaluate


def gradient_descent(objective, box: ParameterBox,
                     config: GdConfig) -> OptimizationResult:
    """Projected descent from a uniform random start.

    Each iteration spends n forward-difference probes (flipped backward at
    the box's upper edge) plus one evaluation of the stepped point; a
    zero-gradient iterate holds position without re-evaluating.  Probes are
    charged greedily, so the budget is consumed exactly.
    """
    n = box.n
    if config.budget < n + 2:
        raise ValueError(
            f"budget {config.budget} below one full iteration ({n + 2})")
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    trace, evaluate = _make_recorder(objective, box)

    theta = rng.uniform(size=n)
    f_theta = evaluate(theta)

    while len(trace) < config.budget:
        grad = np.zeros(n)
        aborted = False
        for i in range(n):
            if len(trace) >= config.budget:
                aborted = True
                break
            if theta[i] + config.epsilon <= 1.0:
                probe, sign = theta.copy(), 1.0
                probe[i] += config.epsilon
            else:  # flip backward at the upper edge
                probe, sign = theta.copy(), -1.0
                probe[i] -= config.epsilon
            grad[i] = sign * (evaluate(probe) - f_theta) / config.epsilon
        if aborted:
            break
        norm = float(np.linalg.norm(grad))
        if norm > 0.0:
            theta = np.clip(theta - config.alpha * grad / norm, 0.0, 1.0)
            if len(trace) >= config.budget:
                break
            f_theta = evaluate(theta)
        # norm == 0: hold position; probes above were still charged

    best_theta, best_loss = _best_of_trace(trace)
    return OptimizationResult(
        method="gd", best_theta=best_theta, best_loss=best_loss,
        trace=tuple(trace), evaluations_used=len(trace),
        wall_time_s=time.perf_counter() - t0,
        notes={"alpha": config.alpha, "epsilon": config.epsilon},
    )


def pso(objective, box: ParameterBox, config: PsoConfig) -> OptimizationResult:
    """Synchronous global-best PSO with clamped velocities and positions.

    The final generation may be partial so the evaluation cap is respected
    exactly; velocities start at zero.
    """
    n = box.n
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    trace, evaluate = _make_recorder(objective, box)

    m = config.swarm_size
    pos = rng.uniform(size=(m, n))
    vel = np.zeros((m, n))
    pbest = pos.copy()
    pbest_f = np.full(m, np.inf)

    for i in range(m):
        if len(trace) >= config.budget:
            break
        pbest_f[i] = evaluate(pos[i])
    gbest_i = int(np.argmin(pbest_f))
    gbest = pbest[gbest_i].copy()

    while len(trace) < config.budget:
        r1 = rng.uniform(size=(m, n))
        r2 = rng.uniform(size=(m, n))
        vel = (config.inertia * vel
               + config.cognitive * r1 * (pbest - pos)
               + config.social * r2 * (gbest - pos))
        np.clip(vel, -config.v_max, config.v_max, out=vel)
        pos = np.clip(pos + vel, 0.0, 1.0)
        for i in range(m):
            if len(trace) >= config.budget:
                break
            f = evaluate(pos[i])
            if f < pbest_f[i]:
                pbest_f[i] = f
                pbest[i] = pos[i].copy()
        gbest_i = int(np.argmin(pbest_f))
        gbest = pbest[gbest_i].copy()

    best_theta, best_loss = _best_of_trace(trace)
    return OptimizationResult(
        method="pso", best_theta=best_theta, best_loss=best_loss,
        trace=tuple(trace), evaluations_used=len(trace),
        wall_time_s=time.perf_counter() - t0,
        notes={"swarm_size": m},
    )


def random_search(objective, box: ParameterBox, budget: int,
                  seed) -> OptimizationResult:
    """Uniform random sampling at the same budget (mechanism-check control)."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    trace, evaluate = _make_recorder(objective, box)
    for _ in range(budget):
        evaluate(rng.uniform(size=box.n))
    best_theta, best_loss = _best_of_trace(trace)
    return OptimizationResult(
        method="random", best_theta=best_theta, best_loss=best_loss,
        trace=tuple(trace), evaluations_used=len(trace),
        wall_time_s=time.perf_counter() - t0,
    )
