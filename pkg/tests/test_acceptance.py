"""End-to-end acceptance criteria; each test logs one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from berezin_lab import bounds
from berezin_lab.berezin import berezin_c, berezin_norm, berezin_number, berezin_symbol, numerical_radius
from berezin_lab.linalg import operator_norm
from berezin_lab.rkhs import default_sample, make_space
from berezin_lab.verify import (
    LEMMAS,
    OperatorSpec,
    ParamGrid,
    case_from_matrix,
    random_operator,
    rank_one_nilpotent,
    run_lemmas,
    run_suite,
)

pytestmark = pytest.mark.acceptance

CLASSES = ("general", "nilpotent", "normal", "selfadjoint")
DIMS = (2, 4, 8, 16)
SPECS = [OperatorSpec(CLASSES[i % 4], DIMS[(i // 4) % 4], 1000 + i) for i in range(500)]


@pytest.fixture(scope="module")
def operators():
    return [random_operator(s) for s in SPECS]


def standard(a):
    sp = make_space("standard", a.shape[0])
    return sp, default_sample(sp)


def test_universal_soundness(acceptance_log, monkeypatch):
    monkeypatch.delenv("BEREZIN_LAB_THREADS", raising=False)
    rep = run_suite(None, None, SPECS, ParamGrid())
    worst = min(
        (o["report"]["slack"] + bounds.default_tol(o["report"]["rhs"]) for o in rep.failures if "report" in o),
        default=0.0,
    )
    ok = rep.total > 0 and rep.passed == rep.total and rep.wall_time < 60
    acceptance_log(
        "1 universal soundness",
        ok,
        f"{rep.passed}/{rep.total} hold, min slack {rep.min_slack:.3g}, {rep.wall_time:.1f}s single-threaded",
    )
    assert rep.passed == rep.total, (worst, rep.failures[:3])
    assert rep.wall_time < 60


def test_equality_regressions(acceptance_log):
    failures = []

    def expect_equal(label, x, y):
        if abs(x - y) > 1e-12:
            failures.append(f"{label}: {x!r} vs {y!r}")

    for kind, n in (("standard", 2), ("standard", 5), ("hardy", 6), ("bergman", 6)):
        sp = make_space(kind, n)
        pl = default_sample(sp, 4, 16)
        eye = np.eye(n, dtype=complex)
        for r in (1.0, 1.5, 2.0):
            for alpha in (0.0, 0.25, 0.5, 1.0):
                rep = bounds.bound_alpha_mixed_powers(eye, r, alpha, sp, pl)
                expect_equal(f"theo1 {kind} r={r} a={alpha}", rep.lhs, rep.rhs)
            rep = bounds.bound_buzano_split(eye, r, sp, pl)
            expect_equal(f"theo5 {kind} r={r}", rep.lhs, rep.rhs)
        rep = bounds.bound_with_square(eye, 1, 1, sp, pl)
        expect_equal(f"theo3 {kind}", rep.lhs, rep.rhs)
        for af in (0.0, 0.5, 1.0):
            rep = bounds.bound_weighted_triple_sum([eye], [eye], [eye], 1, 0.5, af, sp, pl)
            expect_equal(f"theo6 {kind} af={af}", rep.lhs, rep.rhs)
            rep = bounds.bound_triple_single(eye, eye, eye, af, sp, pl)
            expect_equal(f"theo6cor20 {kind} a={af}", rep.lhs, rep.rhs)
        rep = bounds.bound_cartesian_sqrt2(eye, sp, pl)
        expect_equal(f"theo6cor4 single {kind}", rep.lhs, rep.rhs)
        rep = bounds.bound_cartesian_sqrt2(eye, sp, pl, b=eye, r=1)
        expect_equal(f"theo6cor4 pair {kind}", rep.lhs, rep.rhs)
        rep = bounds.lower_bound_cartesian(eye, sp, pl)
        expect_equal(f"theo7 lhs=mid {kind}", rep.lhs, rep.mid)
        expect_equal(f"theo7 mid=rhs {kind}", rep.mid, rep.rhs)
        rep = bounds.berezin_norm_sum_bound(eye, eye, sp, pl)
        expect_equal(f"theo8 {kind}", rep.lhs, rep.rhs)
        for variant in (False, True):
            rep = bounds.berezin_norm_sum_bound_v2(eye, eye, sp, pl, variant)
            expect_equal(f"theo9 {kind} adj={variant}", rep.lhs, rep.rhs)

    sp = make_space("standard", 2)
    rep = bounds.lower_bound_cartesian(np.diag([1j, 1]), sp, default_sample(sp))
    expect_equal("theo7 diag(i,1) lhs", rep.lhs, 2.0)
    expect_equal("theo7 diag(i,1) mid", rep.mid, 2.0)

    acceptance_log("2 equality regressions", not failures, f"{len(failures)} mismatches")
    assert not failures, failures


def test_improvement_remarks(acceptance_log, operators):
    bad = []
    for spec, a in zip(SPECS, operators):
        sp, pl = standard(a)
        r1 = bounds.remark_alpha_improvement(a, sp, pl)
        if not r1.lhs <= r1.rhs + 1e-12:
            bad.append(("alpha", spec, r1.slack))
        r2 = bounds.remark_cartesian_improvement(a, sp, pl)
        if not r2.lhs <= r2.rhs + 1e-9:
            bad.append(("cartesian", spec, r2.slack))
    acceptance_log("3 improvement remarks", not bad, f"{2 * len(SPECS) - len(bad)}/{2 * len(SPECS)} hold")
    assert not bad, bad[:5]


def test_nilpotent_sharpening(acceptance_log):
    worst = 0.0
    for i in range(100):
        a = rank_one_nilpotent(i, 2 + i % 15)
        assert np.allclose(a @ a, 0, atol=1e-14)
        sp, pl = standard(a)
        for r in (1, 2):
            gram, cogram = a.conj().T @ a, a @ a.conj().T
            inner = np.linalg.matrix_power(gram, r) + np.linalg.matrix_power(cogram, r)
            expect = 0.25 * berezin_number(sp, inner, pl).value
            got = bounds.bound_with_square(a, r, 1.0, sp, pl).rhs
            worst = max(worst, abs(got - expect))
    ok = worst <= 1e-12
    acceptance_log("4 nilpotent sharpening", ok, f"max deviation {worst:.3g}")
    assert ok


def test_lemma_oracles(acceptance_log):
    stats = run_lemmas(10_000, 7)
    failed = sum(s.failed for s in stats)
    ok = failed == 0 and [s.lemma for s in stats] == list(LEMMAS) and all(s.trials == 10_000 for s in stats)
    acceptance_log("5 lemma oracles", ok, f"{sum(s.passed for s in stats)} passed, {failed} failed")
    assert ok


def shift_symbol(lam: complex, n: int) -> complex:
    s = abs(lam) ** 2
    return lam * math.fsum(s**m for m in range(n - 1)) / math.fsum(s**m for m in range(n))


def test_hardy_shift(acceptance_log):
    n = 16
    sp = make_space("hardy", n)
    s = np.eye(n, k=-1, dtype=complex)
    rng = np.random.default_rng(20)
    lams = [complex(z) for z in np.sqrt(rng.random(100)) * 0.99 * np.exp(2j * np.pi * rng.random(100))]
    err = max(abs(berezin_symbol(sp, s, lam) - shift_symbol(lam, n)) for lam in lams)
    coarse = berezin_number(sp, s, default_sample(sp, 20, 64, 0.99)).value
    fine = berezin_number(sp, s, default_sample(sp, 40, 128, 0.99)).value
    ok = err <= 1e-10 and coarse <= 1 and fine <= 1 and coarse <= fine
    acceptance_log("6 hardy shift", ok, f"symbol error {err:.2g}, ber {coarse:.6f} -> {fine:.6f}")
    assert err <= 1e-10
    assert coarse <= fine <= 1


def test_containments(acceptance_log, operators):
    bad = []
    instances = [(spec, a, *standard(a)) for spec, a in zip(SPECS, operators)]
    for kind in ("hardy", "bergman"):
        sp = make_space(kind, 16)
        pl = default_sample(sp)
        instances += [(spec, a, sp, pl) for spec, a in zip(SPECS, operators) if spec.dim == 16][:20]
        hardy_shift = np.eye(16, k=-1, dtype=complex)
        instances.append((f"shift-{kind}", hardy_shift, sp, pl))
    for label, a, sp, pl in instances:
        c = berezin_c(sp, a, pl).value
        w = berezin_number(sp, a, pl).value
        nb = berezin_norm(sp, a, pl).value
        if not (c <= w <= nb <= operator_norm(a) + 1e-9):
            bad.append((label, sp.kind, "chain", c, w, nb))
        n_theta = 720
        if not math.cos(math.pi / n_theta) * w <= numerical_radius(a, n_theta) + 1e-9:
            bad.append((label, sp.kind, "radius", w))
    acceptance_log("7 containments", not bad, f"{len(instances) - len(bad)}/{len(instances)} instances")
    assert not bad, bad[:5]


def test_alpha_minimizer_matches_fine_grid(acceptance_log):
    worst = 0.0
    where = None
    for seed in range(50):
        a = random_operator(OperatorSpec("general", DIMS[seed % 4], 5000 + seed))
        sp, pl = standard(a)
        for bid in bounds.ALPHA_BOUNDS:
            fam = bounds.alpha_family(bid, a, 1.0, sp, pl)
            grid_min = min(fam(i / 1000) for i in range(1001))
            _, rep = bounds.minimize_bound_over_alpha(bid, a, 1.0, sp, pl)
            gap = abs(rep.rhs - grid_min)
            if gap > worst:
                worst, where = gap, (bid, seed, rep.rhs - grid_min)
    ok = worst <= 1e-6
    acceptance_log("8 alpha minimizer vs 1001-grid", ok, f"max |golden - grid| {worst:.3g} at {where}")
    assert ok, f"golden-section and 1001-point grid differ by {worst} ({where})"
