"""Tests for the Monte Carlo harness: generation, determinism, aggregation."""

import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from dyadrobust.errors import DataError, RankDeficiencyError
from dyadrobust.regression import fit_ols
from dyadrobust.simulation import (
    SE_METHODS,
    SimulationConfig,
    SimulationReport,
    _draw,
    generate_dyadic_sample,
    replicate_rng,
    run_misspecification_study,
    run_monte_carlo,
    unit_effects,
    write_long_csv,
    write_reports_json,
)
from dyadrobust.variance import vcov_dyadic_decomposed, vcov_dyadic_direct


def test_sample_row_counts():
    ds = generate_dyadic_sample(SimulationConfig(n_units=20, replicates=1), 0)
    assert ds.n_rows == 190
    assert ds.n_dyads == 190
    ds = generate_dyadic_sample(
        SimulationConfig(n_units=150, t_per_dyad=2, replicates=1), 0
    )
    assert ds.n_rows == 22350
    assert ds.n_dyads == 11175


def test_sample_is_complete_lexicographic_cross_section():
    cfg = SimulationConfig(n_units=6, t_per_dyad=2, replicates=1)
    ds = generate_dyadic_sample(cfg, 3)
    iu, ju = np.triu_indices(6, k=1)
    assert_array_equal(ds.unit_i, np.repeat(iu, 2))
    assert_array_equal(ds.unit_j, np.repeat(ju, 2))
    assert_array_equal(ds.t, np.tile(np.arange(2), 15))
    assert ds.x_names == ("const", "abs_diff")
    assert_array_equal(ds.x[:, 0], np.ones(30))


def test_noiseless_point_mass_shocks_recover_beta_exactly():
    cfg = SimulationConfig(
        n_units=10, beta0=0.3, beta1=1.7, shock_distribution="point_mass",
        replicates=1,
    )
    ds = generate_dyadic_sample(cfg, 0)
    assert_allclose(ds.y, 0.3 + 1.7 * ds.x[:, 1], rtol=1e-15)
    fit = fit_ols(ds)
    assert_allclose(fit.beta, [0.3, 1.7], rtol=1e-10)
    assert np.max(np.abs(fit.residuals)) < 1e-10


def test_noiseless_quadratic_dgp_structure():
    # with point-mass shocks and beta2 on, the outcome is an exact
    # quadratic in the unit attribute differences
    cfg = SimulationConfig(
        n_units=8, beta2=0.25, shock_distribution="point_mass", replicates=1,
    )
    ds = generate_dyadic_sample(cfg, 5)
    x_units, alpha = unit_effects(cfg, 5)
    assert_array_equal(alpha, np.zeros(8))
    diff = x_units[ds.unit_i] - x_units[ds.unit_j]
    assert_array_equal(ds.y, 0.0 + 1.0 * np.abs(diff) + 0.25 * diff**2)


def test_shared_unit_draws_are_bit_identical():
    cfg = SimulationConfig(n_units=12, t_per_dyad=2, replicates=1, rng_seed=99)
    ds = generate_dyadic_sample(cfg, 4)
    x_units, alpha = unit_effects(cfg, 4)
    # regressor column reconstructs exactly from the stored unit draws
    assert_array_equal(ds.x[:, 1], np.abs(x_units[ds.unit_i] - x_units[ds.unit_j]))
    # full outcome reconstructs from unit draws plus the idiosyncratic
    # draws that follow them in the documented stream order
    rng = replicate_rng(cfg, 4)
    xu2 = _draw(cfg.x_distribution, rng, cfg.n_units)
    a2 = _draw(cfg.shock_distribution, rng, cfg.n_units)
    nu = _draw(cfg.shock_distribution, rng, cfg.n_rows)
    assert_array_equal(xu2, x_units)
    assert_array_equal(a2, alpha)
    expected_y = (
        cfg.beta1 * np.abs(x_units[ds.unit_i] - x_units[ds.unit_j])
        + alpha[ds.unit_i] + alpha[ds.unit_j] + nu
    )
    assert_array_equal(ds.y, expected_y)


def test_replicate_streams_are_independent_and_stable():
    cfg = SimulationConfig(n_units=5, replicates=3, rng_seed=11)
    a = replicate_rng(cfg, 0).standard_normal(4)
    b = replicate_rng(cfg, 1).standard_normal(4)
    assert not np.allclose(a, b)
    assert_array_equal(a, replicate_rng(cfg, 0).standard_normal(4))


def test_distributions_have_designed_moments():
    rng = np.random.default_rng(1)
    u = _draw("uniform", rng, 200000)
    assert abs(u.mean()) < 0.02
    assert abs(u.var() - 1.0) < 0.02
    assert np.max(np.abs(u)) <= np.sqrt(3.0)
    b = _draw("bimodal", rng, 200000)
    # equal mixture of two unit-variance normals at +-2: var = 1 + 4
    assert abs(b.mean()) < 0.03
    assert abs(b.var() - 5.0) < 0.1
    with pytest.raises(DataError):
        _draw("triangular", rng, 10)


def test_run_monte_carlo_shapes_and_determinism():
    cfg = SimulationConfig(n_units=10, t_per_dyad=2, replicates=6, rng_seed=5)
    rep1 = run_monte_carlo(cfg)
    rep2 = run_monte_carlo(cfg)
    assert rep1.estimates.shape == (6, 2)
    assert rep1.coef_names == ("const", "abs_diff")
    assert set(rep1.ses) == set(SE_METHODS)
    assert_array_equal(rep1.estimates, rep2.estimates)
    for method in SE_METHODS:
        assert rep1.ses[method].shape == (6, 2)
        assert_array_equal(rep1.ses[method], rep2.ses[method])
    assert np.all(rep1.empirical_sd() > 0)


def test_direct_and_decomposed_agree_within_replicates_at_scale():
    cfg = SimulationConfig(n_units=50, t_per_dyad=2, replicates=1, rng_seed=8)
    ds = generate_dyadic_sample(cfg, 0)
    fit = fit_ols(ds)
    a = vcov_dyadic_direct(fit, ds)
    b = vcov_dyadic_decomposed(fit, ds)
    gap = np.linalg.norm(a.matrix - b.matrix) / np.linalg.norm(a.matrix)
    assert gap < 1e-9
    assert_allclose(a.se, b.se, rtol=1e-9)


def test_misspecification_with_zero_beta2_reduces_to_monte_carlo():
    cfg = SimulationConfig(n_units=8, replicates=4, rng_seed=2)
    a = run_monte_carlo(cfg)
    b = run_misspecification_study(cfg)
    assert_array_equal(a.estimates, b.estimates)
    for method in SE_METHODS:
        assert_array_equal(a.ses[method], b.ses[method])


def test_misspecification_shifts_the_slope_target():
    cfg = SimulationConfig(n_units=30, beta2=0.25, replicates=20, rng_seed=3)
    rep = run_misspecification_study(cfg)
    # the linear projection of a convex function of |diff| has slope > beta1
    assert rep.estimates[:, 1].mean() > 1.2


def test_failed_replicate_reports_its_index():
    # degenerate X makes (1, |X_i - X_j|) rank deficient in replicate 0
    cfg = SimulationConfig(n_units=5, replicates=2, x_distribution="point_mass")
    with pytest.raises(RankDeficiencyError, match="replicate 0"):
        run_monte_carlo(cfg)


def test_report_summary_and_nan_policy():
    cfg = SimulationConfig(n_units=4, replicates=4, rng_seed=13)
    rng = np.random.default_rng(13)
    estimates = rng.standard_normal((4, 2))
    ses = {m: rng.uniform(0.1, 1.0, (4, 2)) for m in SE_METHODS}
    ses["dyadic"][1, 1] = np.nan  # one undefined slope SE
    report = SimulationReport(
        config=cfg, coef_names=("const", "abs_diff"), estimates=estimates, ses=ses,
    )
    expected = np.mean(np.delete(ses["dyadic"][:, 1], 1))
    assert_allclose(report.mean_se("dyadic")[1], expected, rtol=1e-14)
    assert_array_equal(report.n_undefined("dyadic"), [0, 1])
    summary = report.summary()
    assert summary["replicates"] == 4
    slope = summary["coefficients"][1]
    assert slope["name"] == "abs_diff"
    assert slope["se_methods"]["dyadic"]["n_undefined"] == 1
    assert np.isfinite(slope["se_methods"]["dyadic"]["median"])


def test_report_shape_invariant():
    cfg = SimulationConfig(n_units=4, replicates=3)
    with pytest.raises(DataError):
        SimulationReport(
            config=cfg,
            coef_names=("const", "abs_diff"),
            estimates=np.zeros((2, 2)),
            ses={m: np.zeros((2, 2)) for m in SE_METHODS},
        )


def test_config_validation():
    with pytest.raises(DataError):
        SimulationConfig(n_units=2)
    with pytest.raises(DataError):
        SimulationConfig(n_units=5, replicates=0)
    with pytest.raises(DataError):
        SimulationConfig(n_units=5, t_per_dyad=0)
    with pytest.raises(DataError):
        SimulationConfig(n_units=5, shock_distribution="cauchy")
    with pytest.raises(DataError):
        SimulationConfig(n_units=5, x_distribution="")
    with pytest.raises(DataError):
        SimulationConfig(n_units=5, beta1=np.nan)
    with pytest.raises(DataError):
        SimulationConfig(n_units=5, rng_seed=-1)


def test_exports_round_trip(tmp_path):
    cfg = SimulationConfig(n_units=6, replicates=3, rng_seed=21)
    report = run_monte_carlo(cfg)
    json_path = tmp_path / "report.json"
    csv_path = tmp_path / "ses.csv"
    write_reports_json([report], json_path)
    write_long_csv([report], csv_path)

    payload = json.loads(json_path.read_text())
    assert len(payload["reports"]) == 1
    loaded = payload["reports"][0]
    assert loaded["config"]["n_units"] == 6
    assert_allclose(np.array(loaded["estimates"]), report.estimates, rtol=1e-15)
    assert loaded["summary"]["coefficients"][1]["name"] == "abs_diff"

    with open(csv_path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["n_units", "replicate", "coefficient", "method", "se"]
    assert len(rows) == 1 + 3 * 2 * len(SE_METHODS)
    # repr round-trip: values parse back exactly
    r = rows[1]
    method, se = r[3], float(r[4])
    assert se == report.ses[method][0, 0]
