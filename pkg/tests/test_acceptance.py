"""Acceptance gate: every criterion at its stated tolerance, one line each.

Criteria 1-7, 9, 10 run through the same seeded suites the `verify` command
executes; criterion 8 runs the desk-scale mixing-time study (p = 500, R = 20,
T = 20000 across four initialization cells) and checks the qualitative
ordering. Run with `pytest -s tests/test_acceptance.py` to see the lines;
the study keeps total runtime around 5-10 minutes on two cores.
"""

import time

import pytest

from zetagap.experiment import ExperimentConfig, aggregate_rows, run_study
from zetagap.verify import suite_lemmas, suite_mixtures, suite_model, suite_sampler

SEED = 0


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def lemmas():
    return _timed(suite_lemmas, seed=SEED)


@pytest.fixture(scope="module")
def mixtures():
    return _timed(suite_mixtures, seed=SEED)


@pytest.fixture(scope="module")
def model():
    return _timed(suite_model, seed=SEED)


@pytest.fixture(scope="module")
def sampler():
    return _timed(suite_sampler, seed=SEED)


def _check(report, name):
    match = [c for c in report.checks if c.name == name]
    assert match, f"check {name} missing from suite {report.suite}"
    return match[0]


def _announce(number, ok, text):
    print(f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {text}")
    assert ok, text


def test_criterion_1_cheeger_sandwich(lemmas):
    report, elapsed = lemmas
    check = _check(report, "cheeger-sandwich")
    _announce(
        1,
        check.passed and elapsed < 40.0,
        f"200 random chains, worst sandwich slack {check.margin:+.3e}, "
        f"suite wall {elapsed:.1f}s",
    )


def test_criterion_2_tv_mixing_bound(lemmas):
    report, elapsed = lemmas
    check = _check(report, "tv-mixing-bound")
    _announce(
        2,
        check.passed and check.margin >= -1e-9 and elapsed < 40.0,
        f"50 instances, n <= 200, worst margin {check.margin:+.3e}",
    )


def test_criterion_3_gap_bracket_order(lemmas):
    report, _ = lemmas
    check = _check(report, "zeta-gap-order")
    _announce(
        3,
        check.passed and check.margin >= -1e-10,
        f"spectral gap <= lower <= upper, worst ordering slack {check.margin:+.3e}",
    )


def test_criterion_4_mixture_bounds(mixtures):
    report, elapsed = mixtures
    worked = _check(report, "two-component-worked-example")
    mr = _check(report, "madras-randall-vs-gap")
    zb = _check(report, "zeta-bound-vs-upper")
    _announce(
        4,
        worked.passed and mr.passed and zb.passed and elapsed < 60.0,
        f"exact 0.25 vs bound 0.0625; 100 random mixtures hold both bounds "
        f"(slacks {mr.margin:+.3e}, {zb.margin:+.3e}); wall {elapsed:.1f}s",
    )


def test_criterion_5_posterior_identities(model):
    report, _ = model
    ratio = _check(report, "posterior-ratio-closed-form")
    det = _check(report, "determinant-update-identity")
    wood = _check(report, "inverse-update-identity")
    _announce(
        5,
        ratio.passed and det.passed and wood.passed,
        f"closed-form rel err within 1e-8 (margin {ratio.margin:+.3e}); "
        f"determinant/inverse updates within 1e-9",
    )


def test_criterion_6_sampler_stationarity(sampler):
    report, elapsed = sampler
    check = _check(report, "stationary-indicator-marginal")
    _announce(
        6,
        check.passed and elapsed < 170.0,
        f"{check.detail}; sampler suite wall {elapsed:.1f}s",
    )


def test_criterion_7_theta_sampler_moments(sampler):
    report, _ = sampler
    direct = _check(report, "theta-moments-direct")
    wood = _check(report, "theta-moments-woodbury")
    _announce(
        7,
        direct.passed and wood.passed,
        f"10^5 draws within 4 MC standard errors (worst z margins "
        f"{direct.margin:+.2f}, {wood.margin:+.2f})",
    )


def test_criterion_9_design_diagnostics(model):
    report, _ = model
    orth = _check(report, "orthogonal-design-analytics")
    brute = _check(report, "diagnostics-bruteforce")
    _announce(
        9,
        orth.passed and brute.passed,
        "orthogonal-design analytics within 1e-10; enumeration matches brute "
        "force at p = 20, s = 2",
    )


def test_criterion_10_laziness(sampler):
    report, _ = sampler
    check = _check(report, "lazy-fraction")
    _announce(10, check.passed, check.detail)


def test_criterion_8_mixing_time_study():
    base = dict(p=500, n=50, s_star=10, T=20_000, R=20, base_seed=SEED)
    cells = [
        ExperimentConfig(fp_fraction=0.01, **base),
        ExperimentConfig(fp_fraction=0.05, **base),
        ExperimentConfig(fp_fraction=0.10, **base),
        ExperimentConfig(fp_count=0, fn_count=2, **base),
    ]
    study, elapsed = _timed(run_study, cells, workers=2)
    agg = {(a["fp"], a["fn"]): a for a in aggregate_rows(study.result_rows())}
    fp1, fp5, fp10, fn2 = agg[(5, 0)], agg[(25, 0)], agg[(50, 0)], agg[(0, 2)]
    ok = (
        fp1["mean"] < 500.0
        and fp5["mean"] < 2000.0
        and fp10["mean"] > fp5["mean"]
        and fp10["truncated"] >= 1
        and fn2["truncated"] == 20
        and elapsed < 1800.0
    )
    _announce(
        8,
        ok,
        f"means FP1%={fp1['mean']:.1f} < 500, FP5%={fp5['mean']:.1f} < 2000, "
        f"FP10%={fp10['mean']:.1f} (truncated {fp10['truncated']}/20), "
        f"FN=2 truncated {fn2['truncated']}/20; wall {elapsed:.0f}s",
    )


def test_difficulty_ordering_at_p200():
    # companion invariant to criterion 8 at the second desk-scale size
    base = dict(p=200, n=20, s_star=10, T=20_000, R=20, base_seed=SEED)
    cells = [
        ExperimentConfig(fp_fraction=0.01, **base),
        ExperimentConfig(fp_fraction=0.05, **base),
        ExperimentConfig(fp_fraction=0.10, **base),
        ExperimentConfig(fp_count=0, fn_count=2, **base),
    ]
    study = run_study(cells, workers=2)
    agg = {(a["fp"], a["fn"]): a for a in aggregate_rows(study.result_rows())}
    assert agg[(2, 0)]["mean"] < agg[(10, 0)]["mean"] < agg[(20, 0)]["mean"]
    assert agg[(0, 2)]["truncated"] == 20
