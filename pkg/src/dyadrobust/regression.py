"""Linear, weighted, and logistic regression fits on dyadic datasets.

Each fit stores the pieces the sandwich estimators need: coefficients,
per-row residuals, the bread matrix (X'X, X'WX, or X'WMX with
M = diag(p(1-p))), and the weights actually used.  Linear systems go
through a rank-revealing pivoted QR, so a collinear design raises
:class:`~dyadrobust.errors.RankDeficiencyError` naming the offending
column instead of silently producing one of many solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import expit

from .dyads import DyadDataset
from .errors import ConvergenceError, DataError, RankDeficiencyError, SeparationError

__all__ = ["RegressionFit", "fit_ols", "fit_wls", "fit_logistic"]

#: gradient max-norm at which the logistic solver declares convergence
LOGISTIC_GRADIENT_TOL = 1e-8
#: |x'beta| beyond which a logistic fit is treated as separated
LINEAR_PREDICTOR_BOUND = 30.0
LOGISTIC_MAX_ITER = 100


@dataclass(frozen=True)
class RegressionFit:
    """Result of a regression fit.

    Attributes
    ----------
    family : str
        ``"linear"`` or ``"logistic"``.
    beta : ndarray, shape (k,)
        Coefficient estimates.
    residuals : ndarray, shape (n,)
        ``y - x'beta`` for linear fits, ``y - p`` for logistic fits.
    fitted : ndarray, shape (n,)
        Linear predictor ``x'beta`` or predicted probability ``p``.
    bread : ndarray, shape (k, k)
        X'X (linear), X'WX (weighted), or X'WMX (logistic); the matrix whose
        inverse flanks every sandwich built from this fit.
    weights_used : ndarray, shape (n,)
        Observation weights entering the fit (ones for plain OLS).
    n_iter : int
        Newton iterations used; 0 for closed-form linear fits.
    """

    family: str
    beta: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    bread: np.ndarray
    weights_used: np.ndarray
    n_iter: int = 0

    @property
    def k(self) -> int:
        return self.beta.shape[0]

    @property
    def n_rows(self) -> int:
        return self.residuals.shape[0]


def _pivoted_qr_solve(xw: np.ndarray, yw: np.ndarray, x_names):
    """Solve the least-squares system via pivoted QR, rejecting rank deficiency."""
    n, k = xw.shape
    q, r, piv = scipy.linalg.qr(xw, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(n, k) * np.finfo(np.float64).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < k:
        col = int(piv[rank])
        name = x_names[col] if x_names is not None else None
        raise RankDeficiencyError(col, name)
    z = scipy.linalg.solve_triangular(r, q.T @ yw)
    beta = np.empty(k)
    beta[piv] = z
    return beta


def fit_ols(dataset: DyadDataset) -> RegressionFit:
    """Ordinary least squares on a dyadic dataset.

    Any weights on the dataset are ignored; use :func:`fit_wls` for weighted
    fits.  The stored bread matrix is X'X.
    """
    beta = _pivoted_qr_solve(dataset.x, dataset.y, dataset.x_names)
    fitted = dataset.x @ beta
    return RegressionFit(
        family="linear",
        beta=beta,
        residuals=dataset.y - fitted,
        fitted=fitted,
        bread=dataset.x.T @ dataset.x,
        weights_used=np.ones(dataset.n_rows),
    )


def fit_wls(dataset: DyadDataset) -> RegressionFit:
    """Weighted least squares using the dataset's observation weights.

    With unit weights this reproduces :func:`fit_ols` exactly.  Residuals
    are stored unweighted (``y - x'beta``); the weights re-enter through the
    scores and the X'WX bread.
    """
    sw = np.sqrt(dataset.w)
    xw = dataset.x * sw[:, None]
    beta = _pivoted_qr_solve(xw, dataset.y * sw, dataset.x_names)
    fitted = dataset.x @ beta
    return RegressionFit(
        family="linear",
        beta=beta,
        residuals=dataset.y - fitted,
        fitted=fitted,
        bread=xw.T @ xw,
        weights_used=dataset.w.copy(),
    )


def _weighted_loglik(eta, y, w):
    # sum_r w_r * (y_r * eta_r - log(1 + exp(eta_r))), computed stably
    return float(np.sum(w * (y * eta - np.logaddexp(0.0, eta))))


def fit_logistic(dataset: DyadDataset) -> RegressionFit:
    """Logistic regression by Newton's method with step-halving.

    Solves the (weighted) score equation sum w*x*(y - p) = 0 to a gradient
    max-norm of ``LOGISTIC_GRADIENT_TOL``.  A linear predictor leaving
    ``[-30, 30]`` is treated as separation and raises
    :class:`~dyadrobust.errors.SeparationError`: the sandwich is meaningless
    at a boundary solution, so no estimate is returned.
    """
    y = dataset.y
    if not np.all((y == 0.0) | (y == 1.0)):
        bad = int(np.flatnonzero((y != 0.0) & (y != 1.0))[0])
        raise DataError(
            f"logistic outcome must be 0/1; row {bad} has y={y[bad]!r}"
        )
    x, w = dataset.x, dataset.w
    # rank screen on the weighted design before iterating
    _pivoted_qr_solve(x * np.sqrt(w)[:, None], y, dataset.x_names)

    beta = np.zeros(dataset.k)
    eta = x @ beta
    loglik = _weighted_loglik(eta, y, w)
    n_iter = 0
    converged = False
    for n_iter in range(1, LOGISTIC_MAX_ITER + 1):
        if np.max(np.abs(eta)) > LINEAR_PREDICTOR_BOUND:
            raise SeparationError(
                "separation detected: |x'beta| exceeded "
                f"{LINEAR_PREDICTOR_BOUND:g} during iteration"
            )
        p = expit(eta)
        grad = x.T @ (w * (y - p))
        if np.max(np.abs(grad)) <= LOGISTIC_GRADIENT_TOL:
            converged = True
            break
        m = w * p * (1.0 - p)
        hess = (x * m[:, None]).T @ x
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError as exc:
            raise SeparationError(
                "singular information matrix during logistic iteration"
            ) from exc
        # halve the step until the log-likelihood stops decreasing
        for _ in range(30):
            eta_new = x @ (beta + step)
            ll_new = _weighted_loglik(eta_new, y, w)
            if ll_new >= loglik:
                break
            step = 0.5 * step
        else:
            raise ConvergenceError(
                "logistic step-halving failed to improve the log-likelihood"
            )
        beta = beta + step
        eta = eta_new
        loglik = ll_new
    if not converged:
        raise ConvergenceError(
            f"logistic fit did not converge in {LOGISTIC_MAX_ITER} iterations"
        )

    p = expit(eta)
    m = w * p * (1.0 - p)
    return RegressionFit(
        family="logistic",
        beta=beta,
        residuals=y - p,
        fitted=p,
        bread=(x * m[:, None]).T @ x,
        weights_used=w.copy(),
        n_iter=n_iter,
    )
