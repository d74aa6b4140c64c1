"""
Fitting dyadic regressions and comparing standard errors
========================================================

Fits the same dyadic sample under every covariance estimator the package
provides and shows why the choice matters: estimators that ignore the
shared-member dependence report standard errors several times too small.
"""

import numpy as np

from dyadrobust import (
    DyadDataset,
    SimulationConfig,
    fit_logistic,
    fit_ols,
    generate_dyadic_sample,
    psd_check,
    vcov_cluster,
    vcov_dyadic_decomposed,
    vcov_dyadic_direct,
    vcov_hc0,
    vcov_hc2,
)

print("Dyadic regression standard errors")
print("=" * 40)

###############################################################################
# A simulated network with unit-level shocks
# ------------------------------------------
# Every dyad's error contains the effects of both members, so any two
# dyads sharing a unit are correlated by construction.

config = SimulationConfig(n_units=50, t_per_dyad=1, rng_seed=3)
ds = generate_dyadic_sample(config, 0)
fit = fit_ols(ds)
print(f"rows={ds.n_rows} dyads={ds.n_dyads} units={ds.n_units}")
coef_text = ", ".join(f"{n}={b:.4f}" for n, b in zip(ds.x_names, fit.beta))
print(f"coefficients: {coef_text}")

###############################################################################
# The estimator ladder
# --------------------
# HC0/HC2 treat rows as independent, by-dyad clustering only repairs
# within-dyad correlation, and the dyadic estimators account for every
# shared-member pair.  The direct and decomposed forms are algebraically
# identical; only their cost differs.

estimates = {
    "hc0": vcov_hc0(fit, ds),
    "hc2": vcov_hc2(fit, ds),
    "cluster(dyad)": vcov_cluster(fit, ds, ds.dyad_code, label="dyad"),
    "dyadic direct": vcov_dyadic_direct(fit, ds),
    "dyadic decomposed": vcov_dyadic_decomposed(fit, ds),
}

slope = ds.x_names.index("abs_diff")
print(f"\n{'estimator':<20} {'se(slope)':>12}")
for name, est in estimates.items():
    print(f"{name:<20} {est.se[slope]:>12.5f}")

gap = np.linalg.norm(
    estimates["dyadic direct"].matrix - estimates["dyadic decomposed"].matrix
) / np.linalg.norm(estimates["dyadic direct"].matrix)
print(f"\ndirect vs decomposed relative gap: {gap:.2e}")

ratio = estimates["dyadic direct"].se[slope] / estimates["hc0"].se[slope]
print(f"dyadic se is {ratio:.1f}x the hc0 se on this sample")

###############################################################################
# Definiteness diagnostics
# ------------------------
# The dyadic meat is not guaranteed positive semidefinite in tiny or
# sparse networks.  psd_check reports the smallest eigenvalue; here the
# network is large enough that the estimate is comfortably psd.

diag = psd_check(estimates["dyadic decomposed"])
print(
    f"\npsd_ok={diag.psd_ok} min_eigenvalue={diag.min_eigenvalue:.3e} "
    f"negative_diagonals={diag.negative_diagonals}"
)

###############################################################################
# The same ladder for a logistic fit
# ----------------------------------
# Scores replace residuals times regressors, the bread becomes the
# observed information, and the same dyadic meat applies.

rng = np.random.default_rng(7)
eta = ds.x @ np.array([-0.25, 0.8])
y_bin = (rng.uniform(size=ds.n_rows) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
ds_bin = DyadDataset(
    n_units=ds.n_units, unit_i=ds.unit_i, unit_j=ds.unit_j, y=y_bin, x=ds.x,
)
fit_bin = fit_logistic(ds_bin)
print(f"\nlogistic converged in {fit_bin.n_iter} iterations")
print(f"{'estimator':<20} {'se(slope)':>12}")
for name, vcov in (("hc0", vcov_hc0), ("dyadic", vcov_dyadic_decomposed)):
    print(f"{name:<20} {vcov(fit_bin, ds_bin).se[slope]:>12.5f}")
