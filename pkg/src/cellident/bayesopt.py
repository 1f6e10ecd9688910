"""Expected improvement and the Bayesian-optimization loop.

The loop is: evaluate a quasi-random initial design of s0 points, then until
the evaluation budget is spent, refit the GP surrogate on everything seen,
maximize expected improvement over the box, and evaluate the argmax.  All
randomness derives from one seed, so a given (seed, config) pair reproduces
its trace bit for bit.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from . import gp
from .errors import DuplicatePoint, NegativeVariance, SingularKernel
from .identify import ParameterBox
from .sampling import HaltonSampler

log = logging.getLogger(__name__)

_SQRT_2PI = np.sqrt(2.0 * np.pi)


def expected_improvement(mean, variance, best_so_far: float, xi: float = 0.0):
    """Closed-form EI for minimization: E[max(0, best - f(theta) - xi)].

    With sigma = sqrt(variance) and z = (best - mean - xi)/sigma this is
    (best - mean - xi)*Phi(z) + sigma*phi(z); at sigma = 0 it degenerates to
    max(0, best - mean - xi).  Result is >= 0 everywhere.
    """
    if xi < 0.0:
        raise ValueError(f"xi must be non-negative, got {xi}")
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    single = mean.ndim == 0
    mean = np.atleast_1d(mean)
    variance = np.atleast_1d(variance)
    if np.any(variance < -1e-12):
        raise NegativeVariance(
            f"variance {np.min(variance):g} below clamping tolerance")
    variance = np.maximum(variance, 0.0)
    sigma = np.sqrt(variance)
    diff = best_so_far - mean - xi

    out = np.maximum(diff, 0.0)            # sigma = 0 branch
    pos = sigma > 0.0
    if np.any(pos):
        z = diff[pos] / sigma[pos]
        # |z| can overflow z*z when sigma is denormal-small; exp(-inf) = 0 is
        # exactly the degenerate limit, so silence the intermediate warning
        with np.errstate(over="ignore"):
            pdf = np.exp(-0.5 * z * z) / _SQRT_2PI
        out[pos] = diff[pos] * ndtr(z) + sigma[pos] * pdf
    out = np.maximum(out, 0.0)             # guard tiny negative roundoff
    return float(out[0]) if single else out


@dataclass(frozen=True)
class AcquisitionConfig:
    """Proxy-optimizer settings for the inner EI maximization."""

    n_candidates: int = 2048   # quasi-random candidates per iteration
    refine_top: int = 5        # candidates kept for local refinement
    refine_steps: int = 20     # shrinking-step sweeps per kept candidate
    step_init: float = 0.05    # initial refinement step, unit coordinates
    step_final: float = 0.001  # final refinement step
    xi: float = 0.0            # improvement threshold

    def __post_init__(self):
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if self.xi < 0.0:
            raise ValueError("xi must be >= 0")
        if not 0.0 < self.step_final <= self.step_init:
            raise ValueError("need 0 < step_final <= step_init")


@dataclass(frozen=True)
class BoRunConfig:
    """Outer-loop settings: initial design size, budget, seed, search box."""

    box: ParameterBox
    budget: int
    seed: int
    s0: int = 10
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    standardize: bool = True   # internal value standardization in the GP

    def __post_init__(self):
        if self.s0 < 1:
            raise ValueError("s0 must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.s0 > self.budget:
            raise ValueError(
                f"s0 = {self.s0} exceeds budget = {self.budget}")


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of one optimizer run (shared by BO and the baselines)."""

    method: str
    best_theta: np.ndarray          # physical units
    best_loss: float
    trace: tuple                    # ((index, theta_physical, loss), ...)
    evaluations_used: int
    wall_time_s: float
    notes: dict = field(default_factory=dict)

    def cumulative_best(self) -> np.ndarray:
        return np.minimum.accumulate([loss for _, _, loss in self.trace])


def export_trace(result: OptimizationResult, box: ParameterBox, path) -> None:
    """Trace CSV: eval_index,<dim names>,loss_V2,cum_best_V2."""
    names = ",".join(box.names)
    cum = result.cumulative_best()
    with open(path, "w") as fh:
        fh.write(f"eval_index,{names},loss_V2,cum_best_V2\n")
        for (idx, theta, loss), best in zip(result.trace, cum):
            coords = ",".join(f"{v:.12g}" for v in np.atleast_1d(theta))
            fh.write(f"{idx},{coords},{loss:.12g},{best:.12g}\n")


def _best_of_trace(trace) -> tuple[np.ndarray, float]:
    idx = int(np.argmin([loss for _, _, loss in trace]))
    _, theta, loss = trace[idx]
    return theta, loss


def maximize_acquisition(state: gp.GPPosterior, box: ParameterBox,
                         config: AcquisitionConfig, rng: np.random.Generator,
                         sampler: HaltonSampler, best_so_far: float) -> np.ndarray:
    """Approximate argmax of EI over the unit cube.

    Scores a quasi-random candidate set, then refines the best few by
    coordinate-wise search with a geometrically shrinking step.  The winner
    is nudged by a uniform 1e-6 perturbation if it lands within 1e-9 of an
    observed point, so the next GP fit never sees duplicates.
    """
    n = box.n
    cand = sampler.draw(config.n_candidates)
    mean, var = state.posterior(cand)
    scores = expected_improvement(mean, var, best_so_far, config.xi)

    top = np.argsort(scores)[::-1][:min(config.refine_top, len(scores))]
    steps = np.geomspace(config.step_init, config.step_final, config.refine_steps)
    best_point = cand[top[0]].copy()
    best_score = float(scores[top[0]])

    eye = np.eye(n)
    for i in top:
        point = cand[i].copy()
        score = float(scores[i])
        for step in steps:
            probes = np.clip(
                np.vstack([point + step * eye, point - step * eye]), 0.0, 1.0)
            m, v = state.posterior(probes)
            s = expected_improvement(m, v, best_so_far, config.xi)
            j = int(np.argmax(s))
            if s[j] > score:
                score = float(s[j])
                point = probes[j]
        if score > best_score:
            best_score = score
            best_point = point

    # keep the proposal distinct from everything already observed
    for _ in range(16):
        dist = np.sqrt(np.sum((state.points - best_point) ** 2, axis=1))
        if np.min(dist) >= 1e-9:
            break
        best_point = np.clip(
            best_point + rng.uniform(-1e-6, 1e-6, size=n), 0.0, 1.0)
    return best_point


def run_bo(objective, config: BoRunConfig) -> OptimizationResult:
    """Budgeted Bayesian optimization of a unit-cube objective.

    ``objective`` maps a unit-cube point to a float loss.  The trace holds
    exactly ``budget`` entries; a singular surrogate falls back to one
    uniform random point for that iteration (logged, counted in notes).
    """
    t0 = time.perf_counter()
    box = config.box
    n = box.n
    ss = (config.seed if isinstance(config.seed, np.random.SeedSequence)
          else np.random.SeedSequence(config.seed))
    halton_seed, fallback_seed = ss.spawn(2)
    sampler = HaltonSampler(n, halton_seed)
    rng = np.random.default_rng(fallback_seed)

    trace = []
    points_unit = []

    def evaluate(unit_point):
        loss = float(objective(unit_point))
        theta = box.denormalize(unit_point)
        trace.append((len(trace), theta, loss))
        points_unit.append(np.asarray(unit_point, dtype=float))
        return loss

    losses = []
    n_init = min(config.s0, config.budget)
    for point in sampler.draw(n_init):
        losses.append(evaluate(point))

    fallbacks = 0
    while len(trace) < config.budget:
        best = float(np.min(losses))
        try:
            state = gp.fit(np.vstack(points_unit), np.asarray(losses),
                           standardize=config.standardize)
            nxt = maximize_acquisition(state, box, config.acquisition, rng,
                                       sampler, best)
        except (SingularKernel, DuplicatePoint) as exc:
            fallbacks += 1
            log.warning("surrogate fit failed (%s); falling back to a "
                        "uniform random point", exc)
            nxt = rng.uniform(size=n)
        losses.append(evaluate(nxt))

    best_theta, best_loss = _best_of_trace(trace)
    return OptimizationResult(
        method="bo", best_theta=best_theta, best_loss=best_loss,
        trace=tuple(trace), evaluations_used=len(trace),
        wall_time_s=time.perf_counter() - t0,
        notes={"s0": n_init, "surrogate_fallbacks": fallbacks},
    )
