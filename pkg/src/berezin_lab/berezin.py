"""Berezin symbol, Berezin number and norm, and the numerical radius.

All suprema and infima are exact extrema over a :class:`SamplePlan`; ties go
to the first point in plan order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .rkhs import KernelSpace, Point, SamplePlan, kernel_table, normalized_kernel


@dataclass(frozen=True)
class BerezinEstimate:
    value: float
    witness: Any
    sample_size: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "witness": point_to_json(self.witness),
            "sample_size": self.sample_size,
        }


def point_to_json(p):
    if isinstance(p, tuple):
        return [point_to_json(q) for q in p]
    if isinstance(p, complex):
        return [p.real, p.imag]
    return p


def _operator(space: KernelSpace, a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (space.dim, space.dim):
        raise ValueError(f"operator shape {a.shape} does not match space dimension {space.dim}")
    return a


def berezin_symbol(space: KernelSpace, a, lam: Point) -> complex:
    a = _operator(space, a)
    k = normalized_kernel(space, lam)
    return complex(np.vdot(k, a @ k))


def symbols(space: KernelSpace, a, plan: SamplePlan) -> np.ndarray:
    """Berezin symbol at every plan point, in plan order."""
    a = _operator(space, a)
    k = kernel_table(space, plan)
    return np.einsum("pi,pi->p", np.conj(k), k @ a.T)


def berezin_set(space: KernelSpace, a, plan: SamplePlan) -> list[complex]:
    return [complex(z) for z in symbols(space, a, plan)]


def berezin_number(space: KernelSpace, a, plan: SamplePlan) -> BerezinEstimate:
    mags = np.abs(symbols(space, a, plan))
    i = int(np.argmax(mags))
    return BerezinEstimate(float(mags[i]), plan.points[i], len(plan))


def berezin_c(space: KernelSpace, a, plan: SamplePlan) -> BerezinEstimate:
    mags = np.abs(symbols(space, a, plan))
    i = int(np.argmin(mags))
    return BerezinEstimate(float(mags[i]), plan.points[i], len(plan))


def pair_values(space: KernelSpace, a, plan: SamplePlan) -> np.ndarray:
    """``G[l, m] = <A k_l, k_m>`` over all ordered pairs of plan points."""
    a = _operator(space, a)
    k = kernel_table(space, plan)
    g = (k @ a.T) @ np.conj(k).T
    # reuse the symbol values so that ber <= berezin_norm holds bit for bit
    np.fill_diagonal(g, symbols(space, a, plan))
    return g


def berezin_norm(space: KernelSpace, a, plan: SamplePlan) -> BerezinEstimate:
    """Max of ``|<A k_lam, k_mu>|``; witness is the pair ``(lam, mu)``."""
    if not plan.pair_mode:
        raise ValueError("berezin_norm needs a plan with pair_mode enabled")
    mags = np.abs(pair_values(space, a, plan))
    flat = int(np.argmax(mags))
    i, j = divmod(flat, len(plan))
    witness = (plan.points[i], plan.points[j])
    return BerezinEstimate(float(mags[i, j]), witness, len(plan) ** 2)


def ber(space: KernelSpace, a, plan: SamplePlan) -> float:
    return berezin_number(space, a, plan).value


def numerical_radius(a, n_theta: int = 720) -> float:
    """Max over a theta-grid of the top eigenvalue of Re(e^{i theta} A).

    This never exceeds w(A) and is at least ``cos(pi / n_theta) * w(A)``.
    """
    if n_theta < 4:
        raise ValueError("n_theta must be >= 4")
    a = np.asarray(a, dtype=np.complex128)
    phases = np.exp(1j * 2.0 * math.pi * np.arange(n_theta) / n_theta)
    rot = phases[:, None, None] * a[None, :, :]
    herm = (rot + np.conj(np.swapaxes(rot, 1, 2))) / 2
    try:
        top = np.linalg.eigvalsh(herm)[:, -1]
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigenvalue failure: {exc}") from exc
    return float(max(np.max(top), 0.0))
