"""Sandwich variance estimators for dyadic regression.

Every estimator here has the form ``bread^-1 * meat * bread^-1`` and differs
only in which pairs of per-row scores ``u_r = w_r * e_r * x_r`` enter the
meat:

* :func:`vcov_hc0` pairs each row with itself;
* :func:`vcov_cluster` pairs rows within disjoint groups;
* the dyadic estimators pair rows of the same dyad *and* rows of any two
  dyads that share a member unit, which is the interwoven clustering that
  disjoint groupings cannot express.

The dyadic meat is computed two ways.  The direct form enumerates the
contributing row pairs explicitly; it is transparent but costs
O(N^3) pairs on a complete cross-section.  The decomposed form rewrites the
same sum as a combination of one-way cluster meats,

    sum_i meat_C[i] - meat_D - (N - 2) * meat_0,

where meat_C[i] clusters the rows of every dyad containing unit i (all
other rows singleton), meat_D clusters by dyad, and meat_0 is the HC0 meat.
Summing the unit clusters double-counts the dyad blocks and counts the
independent contributions N times, which the two subtractions remove.  The
two forms agree to floating-point reassociation error, and the test-suite
holds them to 1e-9 in relative Frobenius norm.

Scores carry the family-specific pieces (weights, logistic residuals
``y - p``), so the same machinery serves OLS, WLS, and logistic fits; only
the bread matrix changes (X'X, X'WX, X'WMX).

References
----------
White (1980); MacKinnon & White (1985) for the HC family; Cameron, Gelbach
& Miller (2011) for the multi-way decomposition idea.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dyads import DyadDataset
from .errors import DataError, LeverageError
from .regression import RegressionFit

__all__ = [
    "VcovEstimate",
    "PsdDiagnostic",
    "score_matrix",
    "sandwich",
    "vcov_hc0",
    "vcov_hc2",
    "vcov_cluster",
    "dyadic_row_pairs",
    "meat_dyadic_direct",
    "meat_dyadic_decomposed",
    "vcov_dyadic_direct",
    "vcov_dyadic_decomposed",
    "psd_check",
    "truncate_to_psd",
]

#: relative eigenvalue threshold below which an estimate is flagged indefinite
PSD_RTOL = 1e-10


@dataclass(frozen=True)
class VcovEstimate:
    """A k-by-k coefficient covariance estimate with provenance.

    ``se`` holds the square roots of the diagonal, with NaN wherever a
    diagonal entry is negative (possible for the dyadic estimators in small
    samples; see :func:`psd_check`).
    """

    matrix: np.ndarray
    method: str
    psd_ok: bool
    se: np.ndarray


@dataclass(frozen=True)
class PsdDiagnostic:
    min_eigenvalue: float
    psd_ok: bool
    negative_diagonals: tuple[int, ...]


def _finalize(meat: np.ndarray, fit: RegressionFit, method: str) -> VcovEstimate:
    matrix = sandwich(fit.bread, meat)
    eigs = np.linalg.eigvalsh(matrix)
    psd_ok = bool(eigs[0] >= -PSD_RTOL * eigs[-1])
    diag = np.diag(matrix)
    se = np.where(diag < 0, np.nan, np.sqrt(np.maximum(diag, 0.0)))
    return VcovEstimate(matrix=matrix, method=method, psd_ok=psd_ok, se=se)


def sandwich(bread: np.ndarray, meat: np.ndarray) -> np.ndarray:
    """Apply ``bread^-1 meat bread^-1`` via solves and symmetrize."""
    half = scipy.linalg.solve(bread, meat, assume_a="sym")
    full = scipy.linalg.solve(bread, half.T, assume_a="sym").T
    return 0.5 * (full + full.T)


def _check_pairing(fit: RegressionFit, dataset: DyadDataset):
    if fit.n_rows != dataset.n_rows or fit.k != dataset.k:
        raise DataError(
            "fit and dataset shapes disagree; the fit must come from this dataset"
        )


def score_matrix(fit: RegressionFit, dataset: DyadDataset) -> np.ndarray:
    """Per-row score contributions ``w_r * e_r * x_r``, shape (n, k).

    For logistic fits the residual is ``y - p``, so these are the estimating
    equation terms in every family.
    """
    _check_pairing(fit, dataset)
    return (fit.weights_used * fit.residuals)[:, None] * dataset.x


def vcov_hc0(fit: RegressionFit, dataset: DyadDataset) -> VcovEstimate:
    """Heteroskedasticity-robust sandwich treating all rows as independent."""
    u = score_matrix(fit, dataset)
    return _finalize(u.T @ u, fit, "hc0")


def vcov_hc2(fit: RegressionFit, dataset: DyadDataset) -> VcovEstimate:
    """HC2: the HC0 meat with each squared residual scaled by 1/(1 - leverage).

    Defined for linear fits only.  Leverages come from the (weighted) hat
    matrix, so for WLS ``h_r = w_r x_r' (X'WX)^-1 x_r``.
    """
    if fit.family != "linear":
        raise DataError("hc2 is defined for the linear family only")
    u = score_matrix(fit, dataset)
    x = dataset.x
    h = fit.weights_used * np.einsum(
        "ri,ir->r", x, scipy.linalg.solve(fit.bread, x.T, assume_a="sym")
    )
    if np.any(h >= 1.0 - 1e-12):
        bad = int(np.argmax(h))
        raise LeverageError(
            f"row {bad} has leverage {h[bad]:.15g}; the 1/(1-h) correction "
            "is undefined"
        )
    u_adj = u / np.sqrt(1.0 - h)[:, None]
    return _finalize(u_adj.T @ u_adj, fit, "hc2")


def _group_score_sums(u: np.ndarray, codes: np.ndarray, n_groups: int) -> np.ndarray:
    cols = [np.bincount(codes, weights=u[:, c], minlength=n_groups) for c in range(u.shape[1])]
    return np.stack(cols, axis=1)


def vcov_cluster(fit, dataset, groups, label: str | None = None) -> VcovEstimate:
    """One-way cluster-robust sandwich for an arbitrary disjoint grouping.

    Parameters
    ----------
    groups : array-like, length n_rows
        Cluster label per row; any hashable dtype.  ``dataset.dyad_code``
        gives the conventional by-dyad grouping for repeated observations.
    label : str, optional
        Recorded in the method tag as ``cluster(label)``.

    Notes
    -----
    No small-sample factor is applied, here or anywhere else in this module.
    With singleton clusters this reduces to :func:`vcov_hc0`.
    """
    u = score_matrix(fit, dataset)
    groups = np.asarray(groups)
    if groups.shape != (dataset.n_rows,):
        raise DataError("groups must assign one cluster label to every row")
    uniques, codes = np.unique(groups, return_inverse=True)
    g = _group_score_sums(u, codes, uniques.shape[0])
    method = f"cluster({label})" if label else "cluster"
    return _finalize(g.T @ g, fit, method)


def dyadic_row_pairs(dataset: DyadDataset) -> tuple[np.ndarray, np.ndarray]:
    """Ordered row pairs (r, r') whose scores enter the dyadic meat.

    A pair contributes when both rows observe the same dyad (including
    r = r') or when their dyads share a member unit.  The HC0 pair set
    {(r, r)} and the by-dyad cluster pair set are both subsets of this one.
    """
    codes = dataset.dyad_code
    order = np.argsort(codes, kind="stable")
    counts = np.bincount(codes, minlength=dataset.n_dyads)
    rows_by_dyad = np.split(order, np.cumsum(counts)[:-1])
    di, dj = dataset.dyad_units
    dyads_of_unit: list[list[int]] = [[] for _ in range(dataset.n_units)]
    for d in range(dataset.n_dyads):
        dyads_of_unit[di[d]].append(d)
        dyads_of_unit[dj[d]].append(d)

    left, right = [], []
    for d in range(dataset.n_dyads):
        rows_d = rows_by_dyad[d]
        left.append(np.repeat(rows_d, rows_d.shape[0]))
        right.append(np.tile(rows_d, rows_d.shape[0]))
        # any dyad sharing a member contains exactly one of d's two units,
        # so the concatenation lists each neighbour once and d itself twice
        for d2 in dyads_of_unit[di[d]] + dyads_of_unit[dj[d]]:
            if d2 == d:
                continue
            rows_d2 = rows_by_dyad[d2]
            left.append(np.repeat(rows_d, rows_d2.shape[0]))
            right.append(np.tile(rows_d2, rows_d.shape[0]))
    return np.concatenate(left), np.concatenate(right)


def meat_dyadic_direct(fit: RegressionFit, dataset: DyadDataset) -> np.ndarray:
    """Dyadic meat by explicit enumeration of contributing row pairs.

    The reference form: O(sum_d |adjacent(d)| * T^2) pairs, cubic in N on a
    complete cross-section.  Prefer :func:`meat_dyadic_decomposed` beyond a
    few thousand dyads.
    """
    u = score_matrix(fit, dataset)
    left, right = dyadic_row_pairs(dataset)
    meat = np.zeros((dataset.k, dataset.k))
    block = 1_000_000
    for start in range(0, left.shape[0], block):
        sl = slice(start, start + block)
        meat += u[left[sl]].T @ u[right[sl]]
    return meat


def meat_dyadic_decomposed(fit: RegressionFit, dataset: DyadDataset) -> np.ndarray:
    """Dyadic meat via the multi-way decomposition of one-way cluster meats.

    Assembles ``sum_i meat_C[i] - meat_D - (N - 2) * meat_0`` at the meat
    level, applying the shared bread once at the end.  N is the number of
    distinct units appearing in the dataset.  On a pure cross-section the
    by-dyad meat equals the HC0 meat, so the expression collapses to
    ``sum_i meat_C[i] - (N - 1) * meat_0`` automatically.
    """
    u = score_matrix(fit, dataset)
    n_units = dataset.n_units
    meat_0 = u.T @ u
    s = _group_score_sums(u, dataset.dyad_code, dataset.n_dyads)
    meat_d = s.T @ s
    # per-unit score sums over each unit's cluster (rows of dyads containing it)
    g = _group_score_sums(u, dataset.unit_i, n_units) + _group_score_sums(
        u, dataset.unit_j, n_units
    )
    # sum_i meat_C[i]: each unit cluster contributes its outer product, and the
    # rows outside it contribute HC0 terms; every row sits in exactly two unit
    # clusters, so those leftovers add up to (N - 2) copies of meat_0
    sum_cluster_meats = g.T @ g + (n_units - 2) * meat_0
    return sum_cluster_meats - meat_d - (n_units - 2) * meat_0


def vcov_dyadic_direct(fit: RegressionFit, dataset: DyadDataset) -> VcovEstimate:
    """Dyadic cluster-robust sandwich via the pair-enumeration meat."""
    return _finalize(meat_dyadic_direct(fit, dataset), fit, "dyadic_direct")


def vcov_dyadic_decomposed(fit: RegressionFit, dataset: DyadDataset) -> VcovEstimate:
    """Dyadic cluster-robust sandwich via the multi-way decomposition.

    Algebraically identical to :func:`vcov_dyadic_direct` and linear-time in
    the number of rows; this is the form to use at scale.
    """
    return _finalize(meat_dyadic_decomposed(fit, dataset), fit, "dyadic_decomposed")


def psd_check(estimate: VcovEstimate) -> PsdDiagnostic:
    """Report definiteness of a covariance estimate without repairing it.

    Differences of cluster meats can be indefinite in small samples; this
    surfaces the smallest eigenvalue and any negative diagonal entries.
    Repair is opt-in via :func:`truncate_to_psd`.
    """
    eigs = np.linalg.eigvalsh(estimate.matrix)
    diag = np.diag(estimate.matrix)
    return PsdDiagnostic(
        min_eigenvalue=float(eigs[0]),
        psd_ok=bool(eigs[0] >= -PSD_RTOL * eigs[-1]),
        negative_diagonals=tuple(int(i) for i in np.flatnonzero(diag < 0)),
    )


def truncate_to_psd(estimate: VcovEstimate) -> VcovEstimate:
    """Project an estimate onto the PSD cone by clipping negative eigenvalues.

    Returns a new estimate whose method tag records the truncation; the
    input is never modified.
    """
    eigs, vecs = np.linalg.eigh(estimate.matrix)
    matrix = (vecs * np.maximum(eigs, 0.0)) @ vecs.T
    matrix = 0.5 * (matrix + matrix.T)
    diag = np.diag(matrix)
    return VcovEstimate(
        matrix=matrix,
        method=estimate.method + "+psd_truncated",
        psd_ok=True,
        se=np.sqrt(np.maximum(diag, 0.0)),
    )
