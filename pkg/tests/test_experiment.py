import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetagap.errors import ParseError, ValidationError
from zetagap.experiment import (
    ExperimentConfig,
    aggregate_rows,
    build_initial_indicator,
    empirical_mixing_time,
    first_exact_match,
    format_report_table,
    generate_instance,
    largest_gram_eigenvalue,
    parse_cells,
    read_results_csv,
    run_cell,
    run_replicate,
    run_study,
    sen_prec,
    write_report,
    write_results_csv,
)
from zetagap.rng import derive_rng
from zetagap.spike_slab import GroundTruth


def quick_config(**kwargs):
    base = dict(p=20, n=10, s_star=2, T=300, R=3, base_seed=7, fp_count=1)
    base.update(kwargs)
    return ExperimentConfig(**base)


class TestConfig:
    def test_default_n_is_tenth_of_p(self):
        assert ExperimentConfig(p=500).n == 50

    def test_prior_odds_rule(self):
        config = ExperimentConfig(p=500)
        assert config.q / (1 - config.q) == pytest.approx(500.0**-2, rel=1e-12)

    def test_amplitude_rule(self):
        config = ExperimentConfig(p=500)
        assert config.resolved_amplitude == pytest.approx(
            4 * math.sqrt(math.log(500) / 50), rel=1e-12
        )
        assert config.resolved_amplitude == pytest.approx(1.41, abs=2e-3)

    def test_fp_fraction_resolution(self):
        assert ExperimentConfig(p=500, fp_fraction=0.01).resolved_fp == 5
        assert ExperimentConfig(p=500, fp_fraction=0.10).resolved_fp == 50

    def test_bounds_validated(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(p=20, s_star=2, fp_count=19)
        with pytest.raises(ValidationError):
            ExperimentConfig(p=20, s_star=2, fn_count=3)
        with pytest.raises(ValidationError):
            ExperimentConfig(p=20, fp_count=1, fp_fraction=0.1)


class TestInstanceGeneration:
    def test_support_and_magnitudes(self):
        config = quick_config()
        model, truth = generate_instance(config, seed=(1, 2))
        a = config.resolved_amplitude
        assert truth.s_star == config.s_star
        assert np.all(truth.delta_star[: config.s_star] == 1)
        mags = np.abs(truth.theta_star[truth.delta_star == 1])
        assert np.all((mags > a) & (mags < a + 1))
        assert truth.delta_tilde_star.tolist() == truth.delta_star.tolist()

    def test_fixed_seed_reproduces(self):
        config = quick_config()
        m1, t1 = generate_instance(config, seed=3)
        m2, t2 = generate_instance(config, seed=3)
        assert np.array_equal(m1.X, m2.X)
        assert np.array_equal(t1.theta_star, t2.theta_star)
        assert m1.gamma == m2.gamma

    def test_gamma_rule_uses_largest_eigenvalue(self):
        config = quick_config()
        model, _ = generate_instance(config, seed=4)
        lam = np.linalg.eigvalsh(model.X.T @ model.X).max()
        assert model.gamma == pytest.approx(0.1 * config.sigma2 / lam, rel=1e-9)

    def test_power_iteration_matches_dense_oracle(self):
        rng = derive_rng(90)
        X = rng.standard_normal((12, 30))
        lam = largest_gram_eigenvalue(X, rng)
        assert lam == pytest.approx(np.linalg.eigvalsh(X.T @ X).max(), rel=1e-9)


class TestInitialIndicator:
    def make_truth(self, p=10, s=3):
        theta = np.zeros(p)
        theta[:s] = 2.0
        return GroundTruth.from_theta(theta, n=30, p=p, sigma=1.0)

    def test_exact_truth_when_no_perturbation(self):
        truth = self.make_truth()
        delta = build_initial_indicator(truth, 0, 0, seed=1)
        assert np.array_equal(delta, truth.delta_star)

    def test_false_positives_superset(self):
        truth = self.make_truth()
        delta = build_initial_indicator(truth, 5, 0, seed=2)
        assert int(delta.sum()) == truth.s_star + 5
        assert np.all(delta >= truth.delta_star)

    def test_false_negatives_drop_true_coordinates(self):
        truth = self.make_truth()
        delta = build_initial_indicator(truth, 0, 2, seed=3)
        assert int((truth.delta_star & ~delta & 1).sum()) == 2
        assert np.all(delta <= truth.delta_star)

    def test_bounds(self):
        truth = self.make_truth()
        with pytest.raises(ValidationError):
            build_initial_indicator(truth, 8, 0, seed=4)


class TestSenPrec:
    def test_exact_match(self):
        star = np.array([1, 1, 0, 0], dtype=np.uint8)
        assert sen_prec(star, star) == (1.0, 1.0)

    def test_all_ones(self):
        star = np.array([1, 1, 0, 0], dtype=np.uint8)
        sen, prec = sen_prec(np.ones(4, dtype=np.uint8), star)
        assert (sen, prec) == (1.0, 0.5)

    def test_empty_model_convention(self):
        star = np.array([1, 0], dtype=np.uint8)
        assert sen_prec(np.zeros(2, dtype=np.uint8), star) == (0.0, 0.0)


class TestMixingTime:
    def test_constructed_first_hit(self):
        target = np.array([1, 0, 1], dtype=np.uint8)
        deltas = np.zeros((30, 3), dtype=np.uint8)
        deltas[17:] = target  # first match at index 17
        assert first_exact_match(deltas, target, 25) == (17, False)

    def test_never_matching_truncates(self):
        target = np.array([1, 0], dtype=np.uint8)
        deltas = np.zeros((10, 2), dtype=np.uint8)
        assert first_exact_match(deltas, target, 9) == (9, True)

    def test_trajectory_wrapper(self):
        from zetagap.gibbs import run

        config = quick_config(fp_count=0)
        model, truth = generate_instance(config, seed=5)
        traj = run(model, truth.delta_star, 5, seed=6)
        assert empirical_mixing_time(traj, truth, 5) == (0, False)


class TestReplicates:
    def test_exact_start_mixes_at_zero(self):
        config = quick_config(fp_count=0, T=1, R=1)
        rec = run_replicate(config, 0)
        assert rec.mixing_time == 0 and not rec.truncated

    def test_small_fp_recovers(self):
        config = quick_config()
        rec = run_replicate(config, 0)
        assert not rec.truncated
        assert 0 < rec.mixing_time <= config.T

    def test_determinism_and_worker_independence(self):
        config = quick_config()
        a = run_cell(config, workers=1)
        b = run_cell(config, workers=3)
        assert [r.mixing_time for r in a] == [r.mixing_time for r in b]
        assert [r.seed for r in a] == [r.seed for r in b]

    def test_traces_when_requested(self):
        config = quick_config(record_traces=True, T=50, R=1)
        rec = run_replicate(config, 0)
        assert rec.sen_trace is not None and len(rec.sen_trace) == 51
        assert all(0.0 <= v <= 1.0 for v in rec.sen_trace + rec.prec_trace)

    def test_fixed_instance_shares_design(self):
        config = quick_config(fixed_instance=True, R=2)
        fp, fn = config.cell
        from zetagap.rng import PURPOSE_INSTANCE

        m0, _ = generate_instance(config, (config.base_seed, fp, fn, 0, PURPOSE_INSTANCE))
        recs = run_cell(config)
        assert recs[0].lambda_max == recs[1].lambda_max
        assert recs[0].gamma == pytest.approx(m0.gamma)


class TestStudyIO:
    def make_rows(self, tmp_path):
        study = run_study([quick_config(), quick_config(fp_count=0, fn_count=1)])
        rows = study.result_rows()
        csv_path = tmp_path / "results.csv"
        write_results_csv(rows, csv_path)
        return study, rows, csv_path

    def test_csv_round_trip(self, tmp_path):
        _, rows, csv_path = self.make_rows(tmp_path)
        back = read_results_csv(csv_path)
        assert len(back) == len(rows) == 6
        assert back[0]["mixing_time"] == rows[0]["mixing_time"]
        assert {r["fn"] for r in back} == {0, 1}

    def test_aggregate_is_pure_function_of_csv(self, tmp_path):
        _, rows, csv_path = self.make_rows(tmp_path)
        agg1 = aggregate_rows(rows)
        agg2 = aggregate_rows(read_results_csv(csv_path))
        assert agg1 == agg2
        for cell in agg1:
            assert cell["replicates"] == 3

    def test_report_files_and_idempotence(self, tmp_path):
        _, rows, csv_path = self.make_rows(tmp_path)
        out = tmp_path / "report"
        written1 = write_report(rows, out)
        table1 = (out / "mixing_table.txt").read_text()
        written2 = write_report(rows, out)
        assert written1 == written2
        assert (out / "mixing_table.txt").read_text() == table1
        sample_files = [p for p in written1 if "samples" in p.name]
        assert len(sample_files) == 2
        assert all(len(p.read_text().split()) == 3 for p in sample_files)

    def test_table_marks_truncation(self):
        rows = [
            {"p": 20, "fp": 1, "fn": 0, "replicate": 0, "seed": "s", "mixing_time": 300,
             "truncated": 1, "wall_s": 0.1, "n": 10, "s_star": 2},
            {"p": 20, "fp": 1, "fn": 0, "replicate": 1, "seed": "s", "mixing_time": 5,
             "truncated": 0, "wall_s": 0.1, "n": 10, "s_star": 2},
        ]
        table = format_report_table(rows)
        assert ">" in table and "FP=5%" in table

    def test_manifest_pairs(self, tmp_path):
        study, _, _ = self.make_rows(tmp_path)
        pairs = study.manifest_pairs()
        assert pairs["cell.0.fp"] == 1
        assert pairs["cell.1.fn"] == 1
        assert "cell.0.replicate.0.lambda_max" in pairs


class TestCellParsing:
    def test_percent_count_and_fn(self):
        base = ExperimentConfig(p=200, s_star=10)
        cells = parse_cells("fp:1%, fp:7, fn:2", base)
        assert [c.cell for c in cells] == [(2, 0), (7, 0), (0, 2)]

    def test_bad_spec_rejected(self):
        base = ExperimentConfig(p=200)
        with pytest.raises(ParseError):
            parse_cells("bogus:3", base)
        with pytest.raises(ParseError):
            parse_cells("", base)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(0, 1), min_size=2, max_size=12),
    st.lists(st.integers(0, 1), min_size=2, max_size=12),
)
def test_sen_prec_bounds_and_exactness(delta_bits, star_bits):
    p = min(len(delta_bits), len(star_bits))
    delta = np.array(delta_bits[:p], dtype=np.uint8)
    star = np.array(star_bits[:p], dtype=np.uint8)
    if star.sum() == 0:
        star[0] = 1
    sen, prec = sen_prec(delta, star)
    assert 0.0 <= sen <= 1.0 and 0.0 <= prec <= 1.0
    assert (sen == 1.0 and prec == 1.0) == bool(np.array_equal(delta, star))
