"""Gradients of the QAOA cost expectation.

``analytic_gradient`` runs one forward pass and then walks the circuit backwards,
carrying the state and the co-state C|psi> through the inverse layers.
``finite_diff_gradient`` is a central-difference check kept independent of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulator import (
    EnergyTable,
    QaoaParams,
    apply_cost_layer,
    apply_mixer_generator,
    apply_mixer_layer,
    energy,
    run_ansatz,
)


@dataclass(frozen=True)
class GradientVector:
    d_gammas: np.ndarray
    d_betas: np.ndarray

    @property
    def p(self) -> int:
        return self.d_gammas.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.d_gammas, self.d_betas])

    def max_abs_diff(self, other: GradientVector) -> float:
        return float(np.max(np.abs(self.to_vector() - other.to_vector())))


def _im_vdot(a: np.ndarray, b: np.ndarray) -> float:
    # Im <a|b>
    return float(a.real @ b.imag - a.imag @ b.real)


def analytic_gradient(table: EnergyTable, params: QaoaParams) -> GradientVector:
    grad, _ = value_and_gradient(table, params)
    return grad


def value_and_gradient(table: EnergyTable, params: QaoaParams) -> tuple[GradientVector, float]:
    """Adjoint pass returning the gradient and the expectation at ``params``.

    With U = M(b) D(g), dU/dg = -i C U and dU/db = -i B U, so each derivative is
    2 Im <lam|G|phi> for the matching generator G, where phi is the state and
    lam the back-propagated C|psi> at that point in the circuit.
    """
    p = params.p
    phi = run_ansatz(table, params)
    lam = table.energies * phi
    value = float(np.real(np.vdot(phi, lam)))
    d_g = np.empty(p)
    d_b = np.empty(p)
    for i in range(p - 1, -1, -1):
        d_b[i] = 2.0 * _im_vdot(lam, apply_mixer_generator(phi))
        apply_mixer_layer(phi, -params.betas[i])
        apply_mixer_layer(lam, -params.betas[i])
        d_g[i] = 2.0 * _im_vdot(lam, table.energies * phi)
        apply_cost_layer(phi, table, -params.gammas[i])
        apply_cost_layer(lam, table, -params.gammas[i])
    return GradientVector(d_g, d_b), value


def finite_diff_gradient(table: EnergyTable, params: QaoaParams, h: float = 1e-5) -> GradientVector:
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"step h={h} outside [1e-7, 1e-3]")
    base = params.to_vector()
    out = np.empty(base.size)
    for k in range(base.size):
        up = base.copy()
        down = base.copy()
        up[k] += h
        down[k] -= h
        out[k] = (energy(table, QaoaParams.from_vector(up)) - energy(table, QaoaParams.from_vector(down))) / (2 * h)
    p = params.p
    return GradientVector(out[:p], out[p:])
