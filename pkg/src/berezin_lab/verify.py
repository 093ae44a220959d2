"""Vector-level lemma oracles, seeded operator generation and the batch harness."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import bounds, linalg
from .berezin import berezin_c, berezin_number
from .rkhs import KernelSpace, SamplePlan, default_sample, make_space

LEMMA_TOL = 1e-10
OPERATOR_CLASSES = ("general", "nilpotent", "normal", "selfadjoint", "unitary")


class LemmaCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def _lemma(lhs: float, rhs: float, tol: float = LEMMA_TOL) -> LemmaCheck:
    lhs, rhs = float(lhs), float(rhs)
    return LemmaCheck(lhs, rhs, lhs <= rhs + tol * max(1.0, abs(rhs)))


def _vec(x, n: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or (n is not None and x.shape[0] != n):
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    return x


def _inner(x: np.ndarray, y: np.ndarray) -> complex:
    """<x, y>, linear in x."""
    return complex(np.vdot(y, x))


def check_lemma_mixed_cs(a, x) -> LemmaCheck:
    """|<Ax, x>| <= <|A|x, x>^{1/2} <|A*|x, x>^{1/2}."""
    a = linalg.as_matrix(a)
    x = _vec(x, a.shape[0])
    m = bounds.Moduli(a)
    p = max(_inner(m.abs_pow(1.0) @ x, x).real, 0.0)
    q = max(_inner(m.adj_pow(1.0) @ x, x).real, 0.0)
    return _lemma(abs(_inner(a @ x, x)), math.sqrt(p) * math.sqrt(q))


def check_lemma_mccarthy(a, x, r: float) -> LemmaCheck:
    """<Ax, x>^r <= <A^r x, x> for positive A, unit x, r >= 1."""
    a = linalg.as_matrix(a)
    x = _vec(x, a.shape[0])
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise ValueError("x must be a unit vector")
    eig = linalg.hermitian_eigen(a)
    if eig.values[0] < -1e-12 * max(1.0, abs(eig.values[-1])):
        raise ValueError("operator is not positive semidefinite")
    ar = linalg.spectral_apply(eig, linalg.power_fn(r))
    base = max(_inner(a @ x, x).real, 0.0)
    return _lemma(base**r, _inner(ar @ x, x).real)


def check_lemma_kittaneh(a, x, y, alpha_f: float) -> LemmaCheck:
    """|<Ax, y>| <= |f(|A|)x| |g(|A*|)y| with f(t) = t^alpha_f, g(t) = t^(1 - alpha_f)."""
    a = linalg.as_matrix(a)
    n = a.shape[0]
    x, y = _vec(x, n), _vec(y, n)
    if not 0.0 <= alpha_f <= 1.0:
        raise ValueError(f"alpha_f must lie in [0, 1], got {alpha_f}")
    m = bounds.Moduli(a)
    fx = m.abs_pow(alpha_f) @ x
    gy = m.adj_pow(1.0 - alpha_f) @ y
    return _lemma(abs(_inner(a @ x, y)), np.linalg.norm(fx) * np.linalg.norm(gy))


def check_lemma_buzano(x, y, e) -> LemmaCheck:
    """|<x, e><e, y>| <= (|x||y| + |<x, y>|)/2 for unit e."""
    x, y, e = _vec(x), _vec(y), _vec(e)
    if not x.shape == y.shape == e.shape:
        raise ValueError("vectors must have equal length")
    if abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise ValueError("e must be a unit vector")
    lhs = abs(_inner(x, e) * _inner(e, y))
    rhs = 0.5 * (np.linalg.norm(x) * np.linalg.norm(y) + abs(_inner(x, y)))
    return _lemma(lhs, rhs)


def check_power_sum(a: Sequence[float], r: float) -> LemmaCheck:
    """(sum a_i)^r <= n^{r-1} sum a_i^r."""
    vals = [float(v) for v in a]
    if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise ValueError("entries must be positive and finite")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    n = len(vals)
    return _lemma(math.fsum(vals) ** r, n ** (r - 1) * math.fsum(v**r for v in vals))


# -- random operators ----------------------------------------------------------------


@dataclass(frozen=True)
class OperatorSpec:
    op_class: str
    dim: int
    seed: int
    normalize: bool = True

    def __post_init__(self):
        if self.op_class not in OPERATOR_CLASSES:
            raise ValueError(f"unknown operator class {self.op_class!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def to_dict(self) -> dict:
        return {"class": self.op_class, "dim": self.dim, "seed": self.seed, "normalize": self.normalize}

    @classmethod
    def from_dict(cls, d: dict) -> OperatorSpec:
        return cls(d["class"], int(d["dim"]), int(d["seed"]), bool(d.get("normalize", True)))


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator; ``stream`` selects an independent child sequence."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=stream)))


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(_gaussian(rng, (n, n)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_operator(spec: OperatorSpec, stream: int = 0) -> np.ndarray:
    """Deterministic random matrix of the requested class.

    Real and imaginary parts of the raw entries are independent standard
    normals from PCG64 seeded by ``spec.seed``. ``stream`` draws an
    independent companion from the same spec.
    """
    rng = rng_for(spec.seed, stream)
    n = spec.dim
    if spec.op_class == "general":
        a = _gaussian(rng, (n, n))
    elif spec.op_class == "nilpotent":
        a = np.triu(_gaussian(rng, (n, n)), k=1)
    elif spec.op_class == "selfadjoint":
        g = _gaussian(rng, (n, n))
        a = (g + np.conj(g).T) / 2
    elif spec.op_class == "normal":
        u = _haar_unitary(rng, n)
        a = (u * _gaussian(rng, n)) @ np.conj(u).T
    else:
        a = _haar_unitary(rng, n)
    if spec.normalize and spec.op_class != "unitary":
        norm = linalg.frobenius(a)
        if norm > 0:
            a = a / norm
    return a


def rank_one_nilpotent(seed: int, dim: int) -> np.ndarray:
    """Random A = u v* with v orthogonal to u, so A^2 = 0 in any dimension."""
    rng = rng_for(seed, 7)
    u = _gaussian(rng, dim)
    v = _gaussian(rng, dim)
    v = v - (np.vdot(u, v) / np.vdot(u, u)) * u
    a = np.outer(u, np.conj(v))
    return a / linalg.frobenius(a)


# -- the batch harness ------------------------------------------------------------------


@dataclass(frozen=True)
class ParamGrid:
    r_values: tuple = (1.0, 1.5, 2.0)
    alpha_values: tuple = tuple(i / 10 for i in range(11))
    nu_values: tuple = (0.25, 0.5, 0.75)
    alphaf_values: tuple = (0.0, 0.5, 1.0)
    bounds: tuple | None = None
    minimize: bool = True

    def is_empty(self) -> bool:
        return not (self.r_values or self.alpha_values or self.nu_values or self.alphaf_values)

    def wants(self, bound_id: str) -> bool:
        return self.bounds is None or bound_id in self.bounds


EMPTY_GRID = ParamGrid((), (), (), (), None, False)


@dataclass
class Case:
    """One operator under test plus the companions multi-operator bounds need."""

    label: str
    a: np.ndarray
    b: np.ndarray
    spec: OperatorSpec | None = None


def case_from_spec(spec: OperatorSpec) -> Case:
    a = random_operator(spec)
    b = random_operator(OperatorSpec("general", spec.dim, spec.seed, spec.normalize), stream=1)
    return Case(f"{spec.op_class}-n{spec.dim}-s{spec.seed}", a, b, spec)


def case_from_matrix(a: np.ndarray, label: str = "operator", b: np.ndarray | None = None) -> Case:
    a = linalg.as_matrix(a)
    return Case(label, a, linalg.adjoint(a) if b is None else linalg.as_matrix(b))


def evaluate_case(case: Case, space: KernelSpace, plan: SamplePlan, grid: ParamGrid):
    """Yield (bound_id, params, report-or-exception) for every configuration of the grid."""
    if grid.is_empty():
        return
    a, b = case.a, case.b
    eye = linalg.identity(a.shape[0])
    bd = linalg.adjoint(b)

    def run(bound_id, params, fn, *args, **kw):
        if not grid.wants(bound_id):
            return None
        try:
            return bound_id, params, fn(*args, **kw)
        except (ValueError, ArithmeticError) as exc:
            return bound_id, params, exc

    jobs = []
    for r in grid.r_values:
        for alpha in grid.alpha_values:
            jobs.append(run("theo1", {"r": r, "alpha": alpha}, bounds.bound_alpha_mixed_powers, a, r, alpha, space, plan))
            for swap in (False, True):
                p = {"r": r, "alpha": alpha, "swap": swap}
                jobs.append(run("theo3", p, bounds.bound_with_square, a, r, alpha, space, plan, swap))
                jobs.append(run("theo4", p, bounds.bound_arithmetic_mean_power, a, r, alpha, space, plan, swap))
        jobs.append(run("theo5", {"r": r}, bounds.bound_buzano_split, a, r, space, plan))
        jobs.append(run("theo5gen", {"r": r, "n": 2}, bounds.bound_sum_buzano, [a, b], r, space, plan))
        jobs.append(run("theo6cor4", {"variant": "pair", "r": r}, bounds.bound_cartesian_sqrt2, a, space, plan, b=b, r=r))
        for nu in grid.nu_values:
            if r < 2 * max(nu, 1 - nu):
                continue
            for af in grid.alphaf_values:
                p = {"r": r, "nu": nu, "alphaf": af, "n": 1}
                jobs.append(run("theo6", p, bounds.bound_weighted_triple_sum, [eye], [a], [eye], r, nu, af, space, plan))
                p = {"r": r, "nu": nu, "alphaf": af, "n": 2}
                jobs.append(run("theo6", p, bounds.bound_weighted_triple_sum, [a, b], [b, a], [bd, eye], r, nu, af, space, plan))
        if grid.minimize:
            for bid in bounds.ALPHA_BOUNDS:
                for swap in (False, True) if bid != "theo1" else (False,):
                    if not grid.wants(bounds.MINIMIZED_ID[bid]):
                        continue
                    p = {"r": r, "swap": swap}
                    try:
                        _, rep = bounds.minimize_bound_over_alpha(bid, a, r, space, plan, swap=swap)
                        jobs.append((bounds.MINIMIZED_ID[bid], p, rep))
                    except (ValueError, ArithmeticError) as exc:
                        jobs.append((bounds.MINIMIZED_ID[bid], p, exc))
    for af in grid.alphaf_values:
        jobs.append(run("theo6cor20", {"alpha": af}, bounds.bound_triple_single, b, a, b, af, space, plan))
    jobs.append(run("theo6cor4", {"variant": "single"}, bounds.bound_cartesian_sqrt2, a, space, plan))
    jobs.append(run("theo7", {}, bounds.lower_bound_cartesian, a, space, plan))
    jobs.append(run("theo8", {}, bounds.berezin_norm_sum_bound, a, b, space, plan))
    for variant in (False, True):
        jobs.append(run("theo9", {"adjoint_variant": variant}, bounds.berezin_norm_sum_bound_v2, a, b, space, plan, variant))
    for job in jobs:
        if job is not None:
            yield job


@dataclass
class BoundStats:
    passed: int = 0
    failed: int = 0
    errors: int = 0
    min_slack: float = math.inf
    min_slack_case: str | None = None
    min_slack_params: dict | None = None
    min_slack_witnesses: dict | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failed": self.failed,
            "errors": self.errors,
            "min_slack": None if math.isinf(self.min_slack) else self.min_slack,
            "case": self.min_slack_case,
            "params": self.min_slack_params,
            "witnesses": self.min_slack_witnesses,
        }


@dataclass
class SuiteReport:
    per_bound: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    total: int = 0
    passed: int = 0
    failed: int = 0
    wall_time: float = 0.0

    @property
    def min_slack(self) -> float:
        vals = [s.min_slack for s in self.per_bound.values()]
        return min(vals) if vals else math.inf

    def to_dict(self, include_rows: bool = False) -> dict:
        d = {
            "total": self.total,
            "passed": self.passed,
            "failed": self.failed,
            "min_slack": None if math.isinf(self.min_slack) else self.min_slack,
            "per_bound": {k: v.to_dict() for k, v in sorted(self.per_bound.items())},
            "failures": self.failures,
            "wall_time": self.wall_time,
        }
        if include_rows:
            d["rows"] = self.rows
        return d


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("BEREZIN_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _as_case(item) -> Case:
    if isinstance(item, Case):
        return item
    if isinstance(item, OperatorSpec):
        return case_from_spec(item)
    return case_from_matrix(item)


def run_suite(
    spaces: Sequence[KernelSpace] | None,
    plans: Sequence[SamplePlan] | None,
    specs: Iterable,
    param_grid: ParamGrid,
    keep_rows: bool = False,
) -> SuiteReport:
    """Evaluate every bound on every case, space and plan in ``param_grid``.

    ``specs`` holds OperatorSpec, Case or raw matrices. With ``spaces=None``
    each case runs on the standard space of its own dimension. Violations and
    per-instance errors are recorded, never raised.
    """
    start = time.perf_counter()
    cases = [_as_case(s) for s in specs]
    tasks = []
    for case in cases:
        n = case.a.shape[0]
        if spaces is None:
            sp = make_space("standard", n)
            pairs = [(sp, default_sample(sp))]
        else:
            pairs = []
            for i, sp in enumerate(spaces):
                plan = plans[i] if plans is not None else default_sample(sp)
                pairs.append((sp, plan))
        for sp, plan in pairs:
            tasks.append((case, sp, plan))

    def work(task):
        case, sp, plan = task
        if sp.dim != case.a.shape[0]:
            return case, sp, plan, [("dimension", {}, ValueError("operator/space dimension mismatch"))]
        return case, sp, plan, list(evaluate_case(case, sp, plan, param_grid))

    threads = thread_count()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    report = SuiteReport()
    for case, sp, plan, outcomes in results:
        for bound_id, params, outcome in outcomes:
            if not isinstance(outcome, Exception):
                bound_id = outcome.bound_id
            stats = report.per_bound.setdefault(bound_id, BoundStats())
            report.total += 1
            replay = {
                "case": case.label,
                "spec": case.spec.to_dict() if case.spec else None,
                "operator": linalg.matrix_to_dict(case.a) if case.spec is None else None,
                "bound_id": bound_id,
                "params": params,
                "space": sp.to_dict(),
                "plan": plan.to_dict() if sp.analytic else None,
            }
            if isinstance(outcome, Exception):
                stats.failed += 1
                stats.errors += 1
                report.failed += 1
                report.failures.append({**replay, "error": f"{type(outcome).__name__}: {outcome}"})
                continue
            if outcome.holds:
                stats.passed += 1
                report.passed += 1
            else:
                stats.failed += 1
                report.failed += 1
                report.failures.append({**replay, "report": outcome.to_dict()})
            if outcome.slack < stats.min_slack:
                stats.min_slack = outcome.slack
                stats.min_slack_case = case.label
                stats.min_slack_params = outcome.params
                stats.min_slack_witnesses = outcome.to_dict()["witnesses"]
            if keep_rows:
                report.rows.append((case.label, outcome))
    report.wall_time = time.perf_counter() - start
    return report


def plan_monotone(space: KernelSpace, a, small: SamplePlan, large: SamplePlan) -> bool:
    """ber never decreases and c never increases when the plan grows."""
    if not set(small.points) <= set(large.points):
        raise ValueError("plans are not nested")
    return (
        berezin_number(space, a, small).value <= berezin_number(space, a, large).value
        and berezin_c(space, a, small).value >= berezin_c(space, a, large).value
    )


# -- lemma batches ------------------------------------------------------------------------

LEMMAS = ("mixed_cs", "mccarthy", "kittaneh", "buzano", "power_sum")


def _unit(rng, n):
    x = _gaussian(rng, n)
    return x / np.linalg.norm(x)


def lemma_instance(name: str, seed: int, index: int) -> LemmaCheck:
    """Instance ``index`` of lemma ``name`` drawn from a per-lemma PCG64 stream."""
    rng = rng_for(seed, LEMMAS.index(name) + 100, index)
    n = int(rng.integers(1, 9))
    if name == "mixed_cs":
        return check_lemma_mixed_cs(_gaussian(rng, (n, n)), _gaussian(rng, n))
    if name == "mccarthy":
        psd = bounds.Moduli(_gaussian(rng, (n, n))).abs_pow(1.0)
        return check_lemma_mccarthy(psd, _unit(rng, n), 1.0 + 3.0 * rng.random())
    if name == "kittaneh":
        return check_lemma_kittaneh(_gaussian(rng, (n, n)), _gaussian(rng, n), _gaussian(rng, n), rng.random())
    if name == "buzano":
        return check_lemma_buzano(_gaussian(rng, n), _gaussian(rng, n), _unit(rng, n))
    if name == "power_sum":
        return check_power_sum(rng.exponential(size=n) + 1e-3, 1.0 + 3.0 * rng.random())
    raise ValueError(f"unknown lemma {name!r}")


@dataclass
class LemmaStats:
    lemma: str
    trials: int = 0
    passed: int = 0
    failed: int = 0
    min_slack: float = math.inf

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "trials": self.trials,
            "passed": self.passed,
            "failed": self.failed,
            "min_slack": None if math.isinf(self.min_slack) else self.min_slack,
        }


def run_lemmas(trials: int, seed: int, lemmas: Sequence[str] = LEMMAS) -> list[LemmaStats]:
    out = []
    for name in lemmas:
        st = LemmaStats(name)
        for i in range(trials):
            chk = lemma_instance(name, seed, i)
            st.trials += 1
            if chk.holds:
                st.passed += 1
            else:
                st.failed += 1
            st.min_slack = min(st.min_slack, chk.rhs - chk.lhs)
        out.append(st)
    return out
