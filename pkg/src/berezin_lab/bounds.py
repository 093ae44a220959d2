"""Berezin number and Berezin norm inequalities, one verifier per statement.

Every verifier evaluates both sides on the same space and sample plan and
returns a :class:`BoundReport`. Because each inequality holds point by point
before the supremum is taken, it also holds exactly on any finite plan, so a
negative slack beyond round-off is a genuine violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .berezin import (
    BerezinEstimate,
    berezin_c,
    berezin_norm,
    berezin_number,
    point_to_json,
    symbols,
)
from .rkhs import KernelSpace, SamplePlan

SQRT2 = math.sqrt(2.0)
REL_TOL = 1e-9

ALPHA_BOUNDS = ("theo1", "theo3", "theo4")
MINIMIZED_ID = {"theo1": "cor11", "theo3": "cor2", "theo4": "cor3"}


class BoundParameterError(ValueError):
    pass


def default_tol(rhs: float) -> float:
    return REL_TOL * max(1.0, abs(rhs))


@dataclass
class BoundReport:
    bound_id: str
    params: dict
    lhs: float
    rhs: float
    tol: float
    witnesses: dict = field(default_factory=dict)
    mid: float | None = None

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        if self.mid is not None:
            return self.lhs <= self.mid + self.tol and self.mid <= self.rhs + self.tol
        return self.slack >= -self.tol

    def to_dict(self) -> dict:
        d = {
            "bound_id": self.bound_id,
            "params": dict(self.params),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "holds": self.holds,
            "tol": self.tol,
            "witnesses": {k: point_to_json(v) for k, v in self.witnesses.items()},
        }
        if self.mid is not None:
            d["mid"] = self.mid
        return d


def _report(bound_id, params, lhs, rhs, witnesses, tol=None, mid=None) -> BoundReport:
    lhs, rhs = float(lhs), float(rhs)
    return BoundReport(
        bound_id,
        params,
        lhs,
        rhs,
        default_tol(rhs) if tol is None else tol,
        witnesses,
        None if mid is None else float(mid),
    )


def _check_r(r: float, minimum: float = 1.0) -> float:
    if not (math.isfinite(r) and r >= minimum):
        raise BoundParameterError(f"r must be >= {minimum}, got {r}")
    return float(r)


def _check_unit(name: str, x: float) -> float:
    if not (math.isfinite(x) and 0.0 <= x <= 1.0):
        raise BoundParameterError(f"{name} must lie in [0, 1], got {x}")
    return float(x)


class Moduli:
    """Powers of |A| and |A*| from one eigen-decomposition each."""

    def __init__(self, a):
        self.a = np.asarray(a, dtype=np.complex128)
        self.adj = linalg.adjoint(self.a)
        self._eig: dict[str, linalg.HermitianEigen] = {}

    def _decomp(self, which: str) -> linalg.HermitianEigen:
        if which not in self._eig:
            gram = self.adj @ self.a if which == "abs" else self.a @ self.adj
            self._eig[which] = linalg.eigen_of(gram)
        return self._eig[which]

    def abs_pow(self, p: float) -> np.ndarray:
        """|A|**p."""
        return linalg.spectral_apply(self._decomp("abs"), linalg.power_fn(p / 2.0))

    def adj_pow(self, p: float) -> np.ndarray:
        """|A*|**p."""
        return linalg.spectral_apply(self._decomp("adj"), linalg.power_fn(p / 2.0))


# -- alpha families ------------------------------------------------------------


@dataclass
class AlphaFamily:
    """rhs(alpha) for a bound whose right side is affine in alpha inside ber.

    ``rhs(alpha) = offset * alpha + max_p |base_p + alpha * slope_p|`` where the
    arrays hold Berezin symbols over the plan. Convex in alpha.
    """

    lhs: float
    lhs_witness: object
    base: np.ndarray
    slope: np.ndarray
    offset: float

    def __call__(self, alpha: float) -> float:
        return float(self.offset * alpha + np.max(np.abs(self.base + alpha * self.slope)))


def _alpha_operands(bound_id, a, r, swap, space, plan):
    """(lhs estimate, P0, P1, offset) with rhs(alpha) = offset*alpha + ber(P0 + alpha*(P1-P0))."""
    m = Moduli(a)
    lhs = berezin_number(space, m.a, plan)
    p, q = m.abs_pow(2 * r), m.adj_pow(2 * r)
    if swap:
        p, q = q, p
    if bound_id == "theo1":
        return lhs, q, p, 0.0
    if bound_id == "theo3":
        sq = berezin_number(space, m.a @ m.a, plan).value
        # alpha/4 * p + (1 - 3 alpha/4) * q
        return lhs, q, 0.25 * p + 0.25 * q, 0.5 * sq**r
    if bound_id == "theo4":
        mean = (m.abs_pow(1.0) + m.adj_pow(1.0)) / 2
        return lhs, q, linalg.psd_power(mean, 2 * r), 0.0
    raise BoundParameterError(f"bound {bound_id!r} has no alpha parameter")


def alpha_family(bound_id, a, r, space, plan, swap=False) -> AlphaFamily:
    r = _check_r(r)
    lhs, p0, p1, offset = _alpha_operands(bound_id, a, r, swap, space, plan)
    s0 = symbols(space, p0, plan)
    s1 = symbols(space, p1, plan)
    return AlphaFamily(lhs.value ** (2 * r), lhs.witness, s0, s1 - s0, offset)


# -- Berezin number bounds --------------------------------------------------


def bound_alpha_mixed_powers(a, r, alpha, space, plan, tol=None) -> BoundReport:
    """ber(A)^{2r} <= ber(alpha |A|^{2r} + (1 - alpha) |A*|^{2r})."""
    r = _check_r(r)
    alpha = _check_unit("alpha", alpha)
    m = Moduli(a)
    lhs = berezin_number(space, m.a, plan)
    rhs = berezin_number(space, alpha * m.abs_pow(2 * r) + (1 - alpha) * m.adj_pow(2 * r), plan)
    return _report(
        "theo1",
        {"r": r, "alpha": alpha},
        lhs.value ** (2 * r),
        rhs.value,
        {"lhs": lhs.witness, "rhs": rhs.witness},
        tol,
    )


def bound_with_square(a, r, alpha, space, plan, swap=False, tol=None) -> BoundReport:
    """ber(A)^{2r} <= alpha/2 ber(A^2)^r + ber(alpha/4 |A|^{2r} + (1 - 3 alpha/4) |A*|^{2r}).

    ``swap`` exchanges |A| and |A*|. At alpha = 1 the report is labelled
    ``theo3special``.
    """
    r = _check_r(r)
    alpha = _check_unit("alpha", alpha)
    m = Moduli(a)
    lhs = berezin_number(space, m.a, plan)
    sq = berezin_number(space, m.a @ m.a, plan)
    p, q = m.abs_pow(2 * r), m.adj_pow(2 * r)
    if swap:
        p, q = q, p
    mix = berezin_number(space, (alpha / 4) * p + (1 - 0.75 * alpha) * q, plan)
    return _report(
        "theo3special" if alpha == 1.0 else "theo3",
        {"r": r, "alpha": alpha, "swap": bool(swap)},
        lhs.value ** (2 * r),
        (alpha / 2) * sq.value**r + mix.value,
        {"lhs": lhs.witness, "square": sq.witness, "rhs": mix.witness},
        tol,
    )


def bound_arithmetic_mean_power(a, r, alpha, space, plan, swap=False, tol=None) -> BoundReport:
    """ber(A)^{2r} <= ber(alpha ((|A| + |A*|)/2)^{2r} + (1 - alpha) |A*|^{2r}).

    With ``swap`` the second term uses |A|^{2r}.
    """
    r = _check_r(r)
    alpha = _check_unit("alpha", alpha)
    m = Moduli(a)
    lhs = berezin_number(space, m.a, plan)
    mean = linalg.psd_power((m.abs_pow(1.0) + m.adj_pow(1.0)) / 2, 2 * r)
    tail = m.abs_pow(2 * r) if swap else m.adj_pow(2 * r)
    rhs = berezin_number(space, alpha * mean + (1 - alpha) * tail, plan)
    return _report(
        "theo4",
        {"r": r, "alpha": alpha, "swap": bool(swap)},
        lhs.value ** (2 * r),
        rhs.value,
        {"lhs": lhs.witness, "rhs": rhs.witness},
        tol,
    )


def bound_buzano_split(a, r, space, plan, tol=None) -> BoundReport:
    """ber(A)^{2r} <= 1/4 ber(|A|^{2r} + |A*|^{2r}) + 1/2 ber(|A|^r |A*|^r)."""
    r = _check_r(r)
    m = Moduli(a)
    lhs = berezin_number(space, m.a, plan)
    s = berezin_number(space, m.abs_pow(2 * r) + m.adj_pow(2 * r), plan)
    prod = berezin_number(space, m.abs_pow(r) @ m.adj_pow(r), plan)
    return _report(
        "theo5",
        {"r": r},
        lhs.value ** (2 * r),
        0.25 * s.value + 0.5 * prod.value,
        {"lhs": lhs.witness, "sum": s.witness, "product": prod.witness},
        tol,
    )


def _same_shape(ops: Sequence[np.ndarray]) -> list[np.ndarray]:
    ops = [np.asarray(o, dtype=np.complex128) for o in ops]
    if not ops:
        raise BoundParameterError("operator list must be nonempty")
    shape = ops[0].shape
    for o in ops:
        if o.shape != shape:
            raise ValueError(f"dimension mismatch: {o.shape} vs {shape}")
    return ops


def bound_sum_buzano(a_list, r, space, plan, tol=None) -> BoundReport:
    """Sum version of :func:`bound_buzano_split` for n operators."""
    r = _check_r(r)
    ops = _same_shape(a_list)
    n = len(ops)
    lhs = berezin_number(space, sum(ops), plan)
    total = np.zeros_like(ops[0])
    prod_sum = 0.0
    for o in ops:
        m = Moduli(o)
        total = total + m.abs_pow(2 * r) + m.adj_pow(2 * r)
        prod_sum += berezin_number(space, m.abs_pow(r) @ m.adj_pow(r), plan).value
    s = berezin_number(space, total, plan)
    coeff = n ** (2 * r - 1)
    return _report(
        "theo5gen",
        {"r": r, "n": n},
        lhs.value ** (2 * r),
        coeff / 4 * s.value + coeff / 2 * prod_sum,
        {"lhs": lhs.witness, "sum": s.witness},
        tol,
    )


def _triple_sum_operator(a_list, x_list, b_list, r, nu, alpha_f) -> np.ndarray:
    inner = None
    for a, x, b in zip(a_list, x_list, b_list):
        mx = Moduli(x)
        left = linalg.adjoint(b) @ mx.abs_pow(2 * alpha_f) @ b
        right = linalg.adjoint(a) @ mx.adj_pow(2 * (1 - alpha_f)) @ a
        term = nu * linalg.psd_power(left, r / (2 * nu)) + 1j * (1 - nu) * linalg.psd_power(
            right, r / (2 * (1 - nu))
        )
        inner = term if inner is None else inner + term
    return inner


def bound_weighted_triple_sum(
    a_list, x_list, b_list, r, nu, alpha_f, space, plan, tol=None
) -> BoundReport:
    """ber(sum A_i* X_i B_i)^r <= sqrt2 n^{r-1} ber(sum nu [B*f^2(|X|)B]^{r/2nu} + i(1-nu)[...]).

    f(t) = t^alpha_f and g(t) = t^(1 - alpha_f); needs r >= 2 max(nu, 1 - nu).
    """
    a_list = _same_shape(a_list)
    x_list = _same_shape(x_list)
    b_list = _same_shape(b_list)
    if not len(a_list) == len(x_list) == len(b_list):
        raise BoundParameterError("A, X, B lists must have equal length")
    _same_shape([a_list[0], x_list[0], b_list[0]])
    if not (0.0 < nu < 1.0):
        raise BoundParameterError(f"nu must lie strictly inside (0, 1), got {nu}")
    alpha_f = _check_unit("alpha_f", alpha_f)
    if not (math.isfinite(r) and r >= 2 * max(nu, 1 - nu)):
        raise BoundParameterError(f"r must be >= 2 max(nu, 1 - nu) = {2 * max(nu, 1 - nu)}, got {r}")
    n = len(a_list)
    target = sum(linalg.adjoint(a) @ x @ b for a, x, b in zip(a_list, x_list, b_list))
    lhs = berezin_number(space, target, plan)
    rhs = berezin_number(space, _triple_sum_operator(a_list, x_list, b_list, r, nu, alpha_f), plan)
    return _report(
        "theo6",
        {"r": float(r), "nu": float(nu), "alphaf": alpha_f, "n": n},
        lhs.value**r,
        SQRT2 * n ** (r - 1) * rhs.value,
        {"lhs": lhs.witness, "rhs": rhs.witness},
        tol,
    )


def bound_triple_single(a, x, b, alpha, space, plan, tol=None) -> BoundReport:
    """ber(A*XB) <= (1/sqrt2) ber(B*|X|^{2 alpha}B + i A*|X*|^{2(1 - alpha)}A)."""
    alpha = _check_unit("alpha", alpha)
    a, x, b = _same_shape([a, x, b])
    mx = Moduli(x)
    lhs = berezin_number(space, linalg.adjoint(a) @ x @ b, plan)
    inner = linalg.adjoint(b) @ mx.abs_pow(2 * alpha) @ b + 1j * (
        linalg.adjoint(a) @ mx.adj_pow(2 * (1 - alpha)) @ a
    )
    rhs = berezin_number(space, inner, plan)
    return _report(
        "theo6cor20",
        {"alpha": alpha},
        lhs.value,
        rhs.value / SQRT2,
        {"lhs": lhs.witness, "rhs": rhs.witness},
        tol,
    )


def bound_cartesian_sqrt2(a, space, plan, b=None, r=None, tol=None) -> BoundReport:
    """Single: ber(A) <= ber(|A| + i|A*|)/sqrt2.  Pair: ber(A*B)^r <= ber(|B|^{2r} + i|A|^{2r})/sqrt2."""
    ma = Moduli(a)
    if b is None:
        lhs = berezin_number(space, ma.a, plan)
        rhs = berezin_number(space, ma.abs_pow(1.0) + 1j * ma.adj_pow(1.0), plan)
        return _report(
            "theo6cor4",
            {"variant": "single"},
            lhs.value,
            rhs.value / SQRT2,
            {"lhs": lhs.witness, "rhs": rhs.witness},
            tol,
        )
    r = _check_r(1.0 if r is None else r)
    _, bm = _same_shape([ma.a, b])
    mb = Moduli(bm)
    lhs = berezin_number(space, ma.adj @ mb.a, plan)
    rhs = berezin_number(space, mb.abs_pow(2 * r) + 1j * ma.abs_pow(2 * r), plan)
    return _report(
        "theo6cor4",
        {"variant": "pair", "r": r},
        lhs.value**r,
        rhs.value / SQRT2,
        {"lhs": lhs.witness, "rhs": rhs.witness},
        tol,
    )


# -- lower bound and Berezin norm bounds ------------------------------------


def lower_bound_cartesian(a, space, plan, tol=None) -> BoundReport:
    """ber^2(Re A) + ber^2(Im A) + c^2(Re A) + c^2(Im A) <= 2 ber^2(A) <= 2 |A|_ber^2."""
    a = np.asarray(a, dtype=np.complex128)
    re, im = linalg.re_part(a), linalg.im_part(a)
    ber_re, ber_im = berezin_number(space, re, plan), berezin_number(space, im, plan)
    c_re, c_im = berezin_c(space, re, plan), berezin_c(space, im, plan)
    ber_a = berezin_number(space, a, plan)
    norm_a = berezin_norm(space, a, plan)
    lhs = ber_re.value**2 + ber_im.value**2 + c_re.value**2 + c_im.value**2
    return _report(
        "theo7",
        {},
        lhs,
        2 * norm_a.value**2,
        {
            "ber_re": ber_re.witness,
            "ber_im": ber_im.witness,
            "c_re": c_re.witness,
            "c_im": c_im.witness,
            "mid": ber_a.witness,
            "rhs": norm_a.witness,
        },
        tol,
        mid=2 * ber_a.value**2,
    )


def berezin_norm_sum_bound(a, b, space, plan, tol=None) -> BoundReport:
    """|A+B|_ber^2 <= |A|_ber^2 + |B|_ber^2 + ber(A*A)^{1/2} ber(B*B)^{1/2} + ber(A*B)."""
    a, b = _same_shape([a, b])
    ad = linalg.adjoint(a)
    lhs = berezin_norm(space, a + b, plan)
    na, nb = berezin_norm(space, a, plan), berezin_norm(space, b, plan)
    aa = berezin_number(space, ad @ a, plan)
    bb = berezin_number(space, linalg.adjoint(b) @ b, plan)
    ab = berezin_number(space, ad @ b, plan)
    rhs = na.value**2 + nb.value**2 + math.sqrt(aa.value) * math.sqrt(bb.value) + ab.value
    return _report(
        "theo8",
        {},
        lhs.value**2,
        rhs,
        {"lhs": lhs.witness, "norm_a": na.witness, "norm_b": nb.witness, "cross": ab.witness},
        tol,
    )


def berezin_norm_sum_bound_v2(a, b, space, plan, adjoint_variant=False, tol=None) -> BoundReport:
    """|A+B|_ber^2 <= |A|_ber^2 + |B|_ber^2 + ber(A*A + B*B)/2 + ber(A*B).

    ``adjoint_variant`` uses ber(AA* + BB*)/2 + ber(AB*) instead.
    """
    a, b = _same_shape([a, b])
    ad, bd = linalg.adjoint(a), linalg.adjoint(b)
    lhs = berezin_norm(space, a + b, plan)
    na, nb = berezin_norm(space, a, plan), berezin_norm(space, b, plan)
    if adjoint_variant:
        gram, cross = a @ ad + b @ bd, a @ bd
    else:
        gram, cross = ad @ a + bd @ b, ad @ b
    g = berezin_number(space, gram, plan)
    c = berezin_number(space, cross, plan)
    return _report(
        "theo9",
        {"adjoint_variant": bool(adjoint_variant)},
        lhs.value**2,
        na.value**2 + nb.value**2 + 0.5 * g.value + c.value,
        {"lhs": lhs.witness, "gram": g.witness, "cross": c.witness},
        tol,
    )


# -- comparisons with the earlier bound ber^2(A) <= ber(|A|^2 + |A*|^2)/2 ----------


def baseline_half_sum(a, space, plan) -> BerezinEstimate:
    """ber(A*A + AA*)/2 as an estimate (value halved)."""
    a = np.asarray(a, dtype=np.complex128)
    ad = linalg.adjoint(a)
    est = berezin_number(space, ad @ a + a @ ad, plan)
    return BerezinEstimate(est.value / 2, est.witness, est.sample_size)


def remark_alpha_improvement(a, space, plan, tol=1e-12, grid_size=101) -> BoundReport:
    """min_alpha rhs of the mixed-power bound at r = 1 against ber(A*A + AA*)/2."""
    alpha, rep = minimize_bound_over_alpha("theo1", a, 1.0, space, plan, grid_size=grid_size)
    base = baseline_half_sum(a, space, plan)
    return _report(
        "cor11_remark",
        {"alpha": alpha},
        rep.rhs,
        base.value,
        {"lhs": rep.witnesses.get("rhs"), "rhs": base.witness},
        tol,
    )


def remark_cartesian_improvement(a, space, plan, tol=None) -> BoundReport:
    """ber(|A| + i|A*|)^2 <= ber(|A|^2 + |A*|^2)."""
    m = Moduli(a)
    lhs = berezin_number(space, m.abs_pow(1.0) + 1j * m.adj_pow(1.0), plan)
    rhs = berezin_number(space, m.abs_pow(2.0) + m.adj_pow(2.0), plan)
    return _report(
        "theo6cor4_remark",
        {},
        lhs.value**2,
        rhs.value,
        {"lhs": lhs.witness, "rhs": rhs.witness},
        tol,
    )


# -- minimisation over alpha -------------------------------------------------------

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], lo: float, hi: float, width: float = 1e-6):
    """Minimise a unimodal ``f`` on [lo, hi]; returns (x, f(x)) once the bracket is < width."""
    a, b = min(lo, hi), max(lo, hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = (a + b) / 2
    best = min(((fc, c), (fd, d), (f(x), x)))
    return best[1], best[0]


_ALPHA_OPS = {
    "theo1": lambda a, r, alpha, space, plan, swap: bound_alpha_mixed_powers(a, r, alpha, space, plan),
    "theo3": lambda a, r, alpha, space, plan, swap: bound_with_square(a, r, alpha, space, plan, swap),
    "theo4": lambda a, r, alpha, space, plan, swap: bound_arithmetic_mean_power(
        a, r, alpha, space, plan, swap
    ),
}


def evaluate_alpha_bound(bound_id, a, r, alpha, space, plan, swap=False) -> BoundReport:
    try:
        op = _ALPHA_OPS[bound_id]
    except KeyError:
        raise BoundParameterError(f"bound {bound_id!r} has no alpha parameter") from None
    return op(a, r, alpha, space, plan, swap)


def minimize_bound_over_alpha(
    bound_id, a, r, space, plan, grid_size=101, swap=False, width=1e-6
) -> tuple[float, BoundReport]:
    """Smallest right-hand side over alpha in [0, 1].

    A uniform grid locates the best cell, then golden-section search refines
    within the neighbouring cells. The refined point replaces the grid point
    only if strictly better, so flat objectives return the smallest alpha.
    """
    if bound_id not in ALPHA_BOUNDS:
        raise BoundParameterError(f"bound {bound_id!r} has no alpha parameter")
    if grid_size < 2:
        raise BoundParameterError("grid_size must be >= 2")
    fam = alpha_family(bound_id, a, r, space, plan, swap)
    grid = [i / (grid_size - 1) for i in range(grid_size)]
    values = [fam(t) for t in grid]
    i = int(np.argmin(values))
    best_alpha, best = grid[i], values[i]
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_size - 1)]
    x, fx = golden_section(fam, lo, hi, width)
    if fx < best:
        best_alpha = x
    rep = evaluate_alpha_bound(bound_id, a, r, best_alpha, space, plan, swap)
    rep.bound_id = MINIMIZED_ID[bound_id]
    rep.params = {**rep.params, "alpha": best_alpha, "minimized": True}
    return best_alpha, rep
