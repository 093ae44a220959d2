"""Dense complex matrices and Hermitian functional calculus.

Every operator is a square ``complex128`` numpy array. Matrices returned by
this module are fresh arrays; nothing here mutates its inputs.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

HERMITIAN_RTOL = 1e-10
JACOBI_MAX_SWEEPS = 50
JACOBI_OFF_RTOL = 1e-12


class NotHermitianError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


def as_matrix(data) -> np.ndarray:
    """Validate ``data`` as a square, finite complex matrix and return a copy."""
    m = np.array(data, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m, dtype=np.complex128)).T.copy()


def matmul(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    n = np.asarray(n, dtype=np.complex128)
    if m.shape != n.shape:
        raise ValueError(f"dimension mismatch: {m.shape} vs {n.shape}")
    return m @ n


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, "fro"))


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(m, dtype=np.complex128), 2))


def is_hermitian(h: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    return frobenius(h - np.conj(h).T) <= rtol * frobenius(h)


def re_part(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    return (a + np.conj(a).T) / 2


def im_part(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    return (a - np.conj(a).T) / 2j


@dataclass(frozen=True)
class HermitianEigen:
    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ np.conj(self.vectors).T


def _check_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not is_hermitian(h):
        raise NotHermitianError(
            f"matrix is not Hermitian: |H - H*|_F = {frobenius(h - np.conj(h).T):.3e}"
        )
    # symmetrize away round-off so downstream solvers see exact Hermitian input
    return (h + np.conj(h).T) / 2


def jacobi_eigen(h: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS) -> HermitianEigen:
    """Cyclic complex Jacobi eigensolver.

    Each (p, q) step first rotates the phase of column q so the pivot becomes
    real, then applies the classical real Jacobi rotation. Converges when the
    off-diagonal Frobenius mass drops below ``1e-12 * |H|_F``.
    """
    a = _check_hermitian(h).copy()
    n = a.shape[0]
    v = identity(n)
    scale = frobenius(a)
    target = (JACOBI_OFF_RTOL * scale) ** 2

    offdiag = ~np.eye(n, dtype=bool)

    def off2() -> float:
        return float(np.sum(np.abs(a[offdiag]) ** 2))

    sweeps = 0
    while off2() > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                u = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = np.conj(u).T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ u
    values = np.diag(a).real.copy()
    order = np.argsort(values, kind="stable")
    return HermitianEigen(values[order], v[:, order])


def hermitian_eigen(h: np.ndarray, method: str = "lapack") -> HermitianEigen:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    ``method="jacobi"`` runs the in-package cyclic Jacobi solver; the default
    delegates to LAPACK (``numpy.linalg.eigh``).
    """
    if method == "jacobi":
        return jacobi_eigen(h)
    if method != "lapack":
        raise ValueError(f"unknown eigen method {method!r}")
    hs = _check_hermitian(h)
    try:
        values, vectors = np.linalg.eigh(hs)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    return HermitianEigen(values, vectors)


def power_fn(p: float) -> Callable[[np.ndarray], np.ndarray]:
    """t -> t**p on a clipped spectrum, with 0**0 == 1."""

    def f(t: np.ndarray) -> np.ndarray:
        return np.power(t, p)

    return f


def func_of_hermitian(
    h: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    method: str = "lapack",
    clip: bool = False,
) -> np.ndarray:
    """Apply ``f`` to the spectrum of ``h``.

    With ``clip`` the eigenvalues are clipped below at 0 first, so ``f`` only
    needs to be defined on ``[0, inf)``; use it for positive semidefinite input.
    """
    eig = hermitian_eigen(h, method=method)
    return spectral_apply(eig, f, clip)


def spectral_apply(
    eig: HermitianEigen, f: Callable[[np.ndarray], np.ndarray], clip: bool = True
) -> np.ndarray:
    t = np.clip(eig.values, 0.0, None) if clip else eig.values
    with np.errstate(all="ignore"):
        ft = np.asarray(f(t), dtype=np.float64)
    if ft.shape != t.shape or not np.all(np.isfinite(ft)):
        raise ValueError(f"function undefined on spectrum {t}")
    return (eig.vectors * ft) @ np.conj(eig.vectors).T


@functools.lru_cache(maxsize=4096)
def _cached_eigen(key: bytes, n: int) -> HermitianEigen:
    h = np.frombuffer(key, dtype=np.complex128).reshape(n, n)
    eig = hermitian_eigen(h)
    eig.values.setflags(write=False)
    eig.vectors.setflags(write=False)
    return eig


def eigen_of(h: np.ndarray) -> HermitianEigen:
    """Memoised LAPACK :func:`hermitian_eigen`; results are read-only."""
    h = np.ascontiguousarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    return _cached_eigen(h.tobytes(), h.shape[0])


def psd_power(h: np.ndarray, p: float, method: str = "lapack") -> np.ndarray:
    if method == "lapack":
        return spectral_apply(eigen_of(h), power_fn(p))
    return func_of_hermitian(h, power_fn(p), method=method, clip=True)


def modulus_power(a: np.ndarray, r: float, method: str = "lapack") -> np.ndarray:
    """|A|**r = (A*A)**(r/2)."""
    if not math.isfinite(r):
        raise ValueError("exponent must be finite")
    a = np.asarray(a, dtype=np.complex128)
    return psd_power(np.conj(a).T @ a, r / 2.0, method=method)


# -- JSON interchange --------------------------------------------------------


def matrix_to_dict(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "n": int(m.shape[0]),
        "rows": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def matrix_from_dict(d: dict) -> np.ndarray:
    try:
        n = int(d["n"])
        rows = d["rows"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError("matrix JSON needs integer 'n' and 'rows'") from exc
    if len(rows) != n or any(len(row) != n for row in rows):
        raise ValueError(f"matrix JSON is not {n}x{n}")
    try:
        entries = [[complex(float(re), float(im)) for re, im in row] for row in rows]
    except (TypeError, ValueError) as exc:
        raise ValueError("matrix entries must be [re, im] pairs") from exc
    return as_matrix(entries)


def save_matrix(m: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(json.dumps(matrix_to_dict(m)) + "\n")


def load_matrix(path: str | Path) -> np.ndarray:
    return matrix_from_dict(json.loads(Path(path).read_text()))
