"""Concrete reproducing kernel Hilbert space models.

Three models are provided, all finite dimensional:

* ``standard`` -- C^n with point set {0, ..., n-1}; k_j is the basis vector e_j.
* ``hardy`` -- span{z^m : m < N} with orthonormal basis z^m; k_lam has
  coordinates conj(lam)^m.
* ``bergman`` -- span{z^m : m < N} with orthonormal basis sqrt(m+1) z^m; k_lam
  has coordinates sqrt(m+1) conj(lam)^m.

Kernel vectors are expressed in the orthonormal basis, so the Hilbert-space
inner product is the plain complex dot product ``sum(x * conj(y))``.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

KINDS = ("standard", "hardy", "bergman")
ANALYTIC_KINDS = ("hardy", "bergman")
DEFAULT_ANALYTIC_DIM = 16
DEFAULT_RMAX = 0.99

Point = Union[int, complex]


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpace:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}; expected one of {KINDS}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")

    @property
    def analytic(self) -> bool:
        return self.kind in ANALYTIC_KINDS

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}


def make_space(kind: str, dim: int) -> KernelSpace:
    return KernelSpace(kind, int(dim) if isinstance(dim, (int, np.integer)) else dim)


def _check_point(space: KernelSpace, lam: Point) -> Point:
    if space.analytic:
        z = complex(lam)
        if not (cmath.isfinite(z) and abs(z) < 1.0):
            raise DomainError(f"point {lam!r} is outside the open unit disc")
        return z
    if isinstance(lam, (bool, np.bool_)) or not isinstance(lam, (int, np.integer)):
        raise DomainError(f"standard space points are integer indices, got {lam!r}")
    if not 0 <= lam < space.dim:
        raise DomainError(f"index {lam} outside 0..{space.dim - 1}")
    return int(lam)


def kernel_vector(space: KernelSpace, lam: Point) -> np.ndarray:
    lam = _check_point(space, lam)
    n = space.dim
    if space.kind == "standard":
        k = np.zeros(n, dtype=np.complex128)
        k[lam] = 1.0
        return k
    k = np.ones(n, dtype=np.complex128)
    k[1:] = np.cumprod(np.full(n - 1, np.conj(lam), dtype=np.complex128))
    if space.kind == "bergman":
        k *= np.sqrt(np.arange(1, n + 1))
    return k


def normalized_kernel(space: KernelSpace, lam: Point) -> np.ndarray:
    k = kernel_vector(space, lam)
    return k / np.linalg.norm(k)


def evaluate_basis(space: KernelSpace, m: int, lam: Point) -> complex:
    """Value at ``lam`` of the m-th orthonormal basis function."""
    lam = _check_point(space, lam)
    if space.kind == "standard":
        return complex(m == lam)
    value = lam**m if m else 1.0
    if space.kind == "bergman":
        value *= math.sqrt(m + 1)
    return complex(value)


@dataclass(frozen=True)
class SamplePlan:
    """Finite set of domain points standing in for the whole domain."""

    points: tuple
    pair_mode: bool = True

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValueError("sample plan must be nonempty")
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        pts = []
        for p in self.points:
            if isinstance(p, complex):
                pts.append([p.real, p.imag])
            else:
                pts.append(p)
        return {"points": pts, "pair_mode": self.pair_mode}

    @classmethod
    def from_dict(cls, d: dict) -> SamplePlan:
        pts = []
        for p in d["points"]:
            if isinstance(p, list):
                pts.append(complex(p[0], p[1]))
            else:
                pts.append(int(p))
        return cls(tuple(pts), bool(d.get("pair_mode", True)))


def default_sample(
    space: KernelSpace,
    n_r: int = 20,
    n_theta: int = 64,
    r_max: float = DEFAULT_RMAX,
) -> SamplePlan:
    """All indices for the standard space; a polar grid plus 0 on the disc.

    Radii are ``r_max * j / n_r`` for j = 1..n_r and angles ``2 pi k / n_theta``,
    so doubling ``n_r`` or ``n_theta`` yields a superset of points.
    """
    if n_r < 1 or n_theta < 1:
        raise ValueError("n_r and n_theta must be >= 1")
    if not 0.0 < r_max < 1.0:
        raise ValueError(f"r_max must lie in (0, 1), got {r_max}")
    if space.kind == "standard":
        return SamplePlan(tuple(range(space.dim)))
    pts: list[Point] = [0j]
    for j in range(1, n_r + 1):
        rho = r_max * j / n_r
        for k in range(n_theta):
            theta = 2.0 * math.pi * k / n_theta
            pts.append(_polar(rho, theta))
    return SamplePlan(tuple(pts))


def _polar(rho: float, theta: float) -> complex:
    # snap the four axis directions so grid points like 0.45i are exact
    c, s = math.cos(theta), math.sin(theta)
    for v in (-1.0, 0.0, 1.0):
        if abs(c - v) < 1e-15:
            c = v
        if abs(s - v) < 1e-15:
            s = v
    return complex(rho * c, rho * s)


@functools.lru_cache(maxsize=64)
def kernel_table(space: KernelSpace, plan: SamplePlan) -> np.ndarray:
    """Normalized kernels for every plan point, one per row (read-only)."""
    table = np.array([normalized_kernel(space, p) for p in plan.points])
    table.setflags(write=False)
    return table
