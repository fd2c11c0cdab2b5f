"""Layer-maskable Adagrad with a windowed convergence rule."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .diff import GradientVector, value_and_gradient
from .simulator import EnergyTable, QaoaParams


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class LayerMask:
    """1-based indices of the layers whose (gamma, beta) are trainable."""

    free_layers: frozenset[int]
    p: int

    def __post_init__(self):
        free = frozenset(int(i) for i in self.free_layers)
        object.__setattr__(self, "free_layers", free)
        if not free:
            raise ValueError("layer mask must free at least one layer")
        bad = sorted(i for i in free if not 1 <= i <= self.p)
        if bad:
            raise ValueError(f"layer indices {bad} outside [1, {self.p}]")

    @classmethod
    def all(cls, p: int) -> LayerMask:
        return cls(frozenset(range(1, p + 1)), p)

    @property
    def k(self) -> int:
        return len(self.free_layers)

    def vector(self) -> np.ndarray:
        """Boolean mask over the flat ``[gammas, betas]`` layout."""
        layer = np.array([i + 1 in self.free_layers for i in range(self.p)])
        return np.concatenate([layer, layer])


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.1
    epsilon: float = 1e-8
    convergence_threshold: float = 1e-4
    convergence_window: int = 3
    max_iterations: int = 1000

    def __post_init__(self):
        for name in ("learning_rate", "epsilon", "convergence_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.convergence_window < 1 or self.max_iterations < 1:
            raise ValueError("convergence_window and max_iterations must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class OptTrace:
    costs: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def tau(self) -> int:
        return len(self.costs) - 1


def adagrad_step(params: QaoaParams, grad: GradientVector, accumulator, mask: LayerMask, cfg: OptimizerConfig):
    """One masked Adagrad update; returns ``(new_params, new_accumulator)``.

    Frozen entries of both the parameters and the accumulator are left untouched.
    """
    theta = params.to_vector()
    g = grad.to_vector()
    acc = np.array(accumulator, dtype=np.float64)
    if theta.shape != g.shape or theta.shape != acc.shape or mask.p != params.p:
        raise ValueError("parameter, gradient, accumulator and mask shapes disagree")
    free = mask.vector()
    acc[free] += g[free] ** 2
    theta[free] -= cfg.learning_rate * g[free] / (np.sqrt(acc[free]) + cfg.epsilon)
    return QaoaParams.from_vector(theta), acc


def check_convergence(costs, cfg: OptimizerConfig = OptimizerConfig()) -> bool:
    """True when each of the last ``window`` successive cost changes is below threshold."""
    w = cfg.convergence_window
    if len(costs) < w + 1:
        return False
    tail = costs[-(w + 1):]
    return all(abs(b - a) < cfg.convergence_threshold for a, b in zip(tail, tail[1:]))


def optimize(table: EnergyTable, init: QaoaParams, mask: LayerMask, cfg: OptimizerConfig = OptimizerConfig()):
    """Run masked Adagrad from ``init``; returns ``(final_params, OptTrace)``.

    ``costs[0]`` is the expectation at ``init`` and each later entry is the cost
    after one update, so ``tau`` counts updates.
    """
    if mask.p != init.p:
        raise ValueError(f"mask is for p={mask.p} but params have p={init.p}")
    params = init
    acc = np.zeros(2 * init.p)
    trace = OptTrace()
    grad, cost = value_and_gradient(table, params)
    trace.costs.append(cost)
    for it in range(cfg.max_iterations):
        _check_finite(cost, grad, it)
        params, acc = adagrad_step(params, grad, acc, mask, cfg)
        grad, cost = value_and_gradient(table, params)
        trace.costs.append(cost)
        if check_convergence(trace.costs, cfg):
            trace.converged = True
            break
    if not math.isfinite(cost):
        raise OptimizationError(f"non-finite cost after {trace.tau} updates")
    return params, trace


def _check_finite(cost: float, grad: GradientVector, it: int) -> None:
    if not math.isfinite(cost):
        raise OptimizationError(f"non-finite cost {cost} at iteration {it}")
    if not np.all(np.isfinite(grad.to_vector())):
        raise OptimizationError(f"non-finite gradient at iteration {it}: {grad.to_vector()}")
