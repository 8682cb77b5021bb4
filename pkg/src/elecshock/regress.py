"""Weighted least squares, Newey-West HAC covariance and FWL residualisation.

Every estimation in the package goes through :func:`fit_wls`. The solve is
QR based on the sqrt(w)-scaled design; the normal equations are never formed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .errors import RankDeficient, SingularBread

log = logging.getLogger(__name__)

INTERCEPT = "const"
COND_LIMIT = 1e10


@dataclass(frozen=True)
class DesignMatrix:
    """Regressor matrix with labelled columns and per-row weights.

    ``index`` holds one label per row (normally the date) and ``groups`` an
    optional per-row group id (the election cycle) used for audits.
    """

    index: np.ndarray
    labels: tuple
    values: np.ndarray
    weights: np.ndarray
    groups: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise ValueError("design values must be 2-D")
        n, k = values.shape
        labels = tuple(self.labels)
        if len(labels) != k:
            raise ValueError(f"{len(labels)} labels for {k} columns")
        if len(set(labels)) != k:
            raise ValueError("column labels must be unique")
        weights = np.array(self.weights, dtype=float, copy=True).reshape(-1)
        if weights.shape != (n,):
            raise ValueError("one weight per row required")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and non-negative")
        if n and not np.any(weights > 0):
            raise ValueError("at least one strictly positive weight required")
        if not np.all(np.isfinite(values)):
            raise ValueError("design contains missing or non-finite entries")
        index = np.array(self.index, copy=True)
        if len(index) != n:
            raise ValueError("one index entry per row required")
        for arr in (values, weights, index):
            arr.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "index", index)
        if self.groups is not None:
            groups = np.array(self.groups, copy=True)
            groups.setflags(write=False)
            object.__setattr__(self, "groups", groups)

    @property
    def shape(self):
        return self.values.shape

    @property
    def has_intercept(self) -> bool:
        return INTERCEPT in self.labels

    def column(self, label) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    def select(self, labels: Sequence[str]) -> "DesignMatrix":
        cols = [self.labels.index(c) for c in labels]
        return DesignMatrix(self.index, tuple(labels), self.values[:, cols], self.weights, self.groups)

    def take(self, rows) -> "DesignMatrix":
        groups = None if self.groups is None else self.groups[rows]
        return DesignMatrix(self.index[rows], self.labels, self.values[rows], self.weights[rows], groups)

    def with_weights(self, weights) -> "DesignMatrix":
        return DesignMatrix(self.index, self.labels, self.values, weights, self.groups)


@dataclass(frozen=True)
class FitResult:
    labels: tuple
    params: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    r2: float
    n_obs: int
    weights: np.ndarray
    condition: float
    index: np.ndarray = field(default=None)
    # (R, piv, colnorm) of the scaled design, reused by the HAC bread
    _factor: tuple = field(default=None, repr=False, compare=False)

    @property
    def coefficients(self) -> dict:
        return dict(zip(self.labels, self.params.tolist()))

    def __getitem__(self, label) -> float:
        return float(self.params[self.labels.index(label)])


@dataclass(frozen=True)
class HacCovariance:
    cov: np.ndarray
    lags: int
    labels: tuple
    kernel: str = "bartlett"

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))

    def se_of(self, label) -> float:
        return float(self.se[self.labels.index(label)])


def _scaled(X: DesignMatrix, y=None):
    active = X.weights > 0
    sw = np.sqrt(X.weights[active])
    A = X.values[active] * sw[:, None]
    b = None if y is None else np.asarray(y, dtype=float)[active] * sw
    return active, A, b


def _qr_checked(A: np.ndarray, labels, exc=RankDeficient, rhs=None):
    """Pivoted QR of the column-equilibrated matrix with a conditioning check.

    Returns ``(QtB, R, piv, colnorm, cond)`` where ``A[:, piv] / colnorm[piv]``
    equals ``Q @ R`` and ``QtB = Q' rhs`` (``None`` without ``rhs``; Q itself
    is never formed).
    """
    n, k = A.shape
    if n < k:
        raise exc(f"{n} weighted rows for {k} columns", labels)
    colnorm = np.linalg.norm(A, axis=0)
    dead = [labels[j] for j in np.flatnonzero(colnorm == 0.0)]
    if dead:
        raise exc(f"all-zero columns after weighting: {dead}", dead)
    if rhs is None:
        R, piv = linalg.qr(A / colnorm, mode="r", pivoting=True)
        R, QtB = R[:k], None
    else:
        B = np.asarray(rhs, dtype=float)
        Bt = B[None, :] if B.ndim == 1 else B.T
        BtQ, R, piv = linalg.qr_multiply(A / colnorm, Bt, mode="right", pivoting=True)
        QtB = BtQ[0] if B.ndim == 1 else BtQ.T
    diag = np.abs(np.diag(R))
    cond = np.inf if diag[-1] == 0 else float(np.linalg.cond(R))
    if not cond <= COND_LIMIT:
        small = [labels[piv[i]] for i in range(k) if diag[i] <= diag[0] * 1e-8]
        if not small:
            small = [labels[piv[-1]]]
        raise exc(f"condition diagnostic {cond:.3g} exceeds {COND_LIMIT:g}; "
                  f"dependent columns: {small}", small)
    return QtB, R, piv, colnorm, cond


def fit_wls(X: DesignMatrix, y) -> FitResult:
    """Minimise ``sum_t w_t (y_t - x_t'b)^2``.

    Rows with zero weight take no part in the solve but still receive
    fitted values and residuals.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (X.shape[0],):
        raise ValueError(f"response has {y.shape} entries for {X.shape[0]} rows")
    active, A, b = _scaled(X, y)
    if not np.all(np.isfinite(b)):
        raise ValueError("response has missing values on weighted rows")
    Qtb, R, piv, colnorm, cond = _qr_checked(A, X.labels, rhs=b)
    z = linalg.solve_triangular(R, Qtb)
    params = np.empty_like(z)
    params[piv] = z / colnorm[piv]
    fitted = X.values @ params
    resid = y - fitted
    w = X.weights
    ssr = float(np.sum(w * resid**2))
    if X.has_intercept:
        ybar = np.sum(w * y) / np.sum(w)
        sst = float(np.sum(w * (y - ybar) ** 2))
    else:
        sst = float(np.sum(w * y**2))
    r2 = 1.0 - ssr / sst if sst > 0 else float("nan")
    return FitResult(X.labels, params, resid, fitted, r2, int(active.sum()), w, cond, X.index,
                     (R, piv, colnorm))


def nw_bandwidth_raw(T: int) -> float:
    return 0.75 * float(T) ** (1.0 / 3.0)


def nw_bandwidth(T: int) -> int:
    """``floor(3/4 * T**(1/3))`` evaluated in exact integer arithmetic.

    ``L <= 0.75 T^(1/3)`` iff ``64 L^3 <= 27 T``, which sidesteps the
    floating cube root landing just under an exact integer (T = 4096).
    """
    T = int(T)
    if T < 1:
        raise ValueError("T must be >= 1")
    L = int(nw_bandwidth_raw(T))
    while 64 * (L + 1) ** 3 <= 27 * T:
        L += 1
    while L > 0 and 64 * L**3 > 27 * T:
        L -= 1
    log.debug("bandwidth T=%d raw=%.4f L=%d", T, nw_bandwidth_raw(T), L)
    return L


def bread(X: DesignMatrix, factor=None) -> np.ndarray:
    """``(X'WX)^{-1}`` from the QR factor of the scaled design."""
    if factor is None:
        _, A, _ = _scaled(X)
        _, R, piv, colnorm, _ = _qr_checked(A, X.labels, exc=SingularBread)
    else:
        R, piv, colnorm = factor
    k = R.shape[0]
    Rinv = linalg.solve_triangular(R, np.eye(k))
    inner = Rinv @ Rinv.T
    out = np.empty_like(inner)
    out[np.ix_(piv, piv)] = inner
    return out / np.outer(colnorm, colnorm)


def weighted_scores(fit: FitResult, X: DesignMatrix) -> np.ndarray:
    """Rows ``w_t e_t x_t`` for the positively weighted observations, in row order."""
    active = X.weights > 0
    return X.values[active] * (X.weights[active] * fit.residuals[active])[:, None]


def newey_west(fit: FitResult, X: DesignMatrix, L: int) -> HacCovariance:
    """Bartlett-kernel HAC sandwich ``B M B`` with ``B = (X'WX)^{-1}``.

    ``M = G_0 + sum_{l=1..L} (1 - l/(L+1)) (G_l + G_l')`` and
    ``G_l = sum_t s_t s_{t-l}'`` over the weighted scores. ``L = 0`` gives
    the HC0 estimator. No small-sample correction is applied.
    """
    if L < 0:
        raise ValueError("lag truncation must be non-negative")
    if L >= fit.n_obs:
        raise ValueError(f"lag truncation {L} must be below n_obs={fit.n_obs}")
    same = fit.weights is X.weights and fit.labels == X.labels
    B = bread(X, fit._factor if same else None)
    S = weighted_scores(fit, X)
    # S' K S with K the banded Bartlett matrix: one product instead of L + 1
    KS = S.copy()
    for lag in range(1, L + 1):
        k = 1.0 - lag / (L + 1.0)
        KS[lag:] += k * S[:-lag]
        KS[:-lag] += k * S[lag:]
    meat = S.T @ KS
    cov = B @ meat @ B
    cov = 0.5 * (cov + cov.T)
    return HacCovariance(cov, int(L), X.labels)


def hac_se(fit: FitResult, X: DesignMatrix, L: int, label) -> float:
    """HAC standard error of one coefficient, equal to ``newey_west(...).se_of(label)``.

    Only row ``j`` of the bread is needed: with ``a = S b_j`` the variance is
    ``sum a_t^2 + 2 sum_l (1 - l/(L+1)) sum_t a_t a_{t-l}``.
    """
    if L < 0:
        raise ValueError("lag truncation must be non-negative")
    if L >= fit.n_obs:
        raise ValueError(f"lag truncation {L} must be below n_obs={fit.n_obs}")
    j = X.labels.index(label)
    same = fit.weights is X.weights and fit.labels == X.labels
    b = bread(X, fit._factor if same else None)[j]
    a = weighted_scores(fit, X) @ b
    var = float(a @ a)
    for lag in range(1, L + 1):
        var += 2.0 * (1.0 - lag / (L + 1.0)) * float(a[lag:] @ a[:-lag])
    return float(np.sqrt(max(var, 0.0)))


def fwl_residualize(X: DesignMatrix, target_cols: Sequence[str]) -> DesignMatrix:
    """Residualise ``target_cols`` on the remaining columns under the same weights.

    Regressing a response on the returned columns (no intercept) reproduces
    the full-regression coefficients of the targets.
    """
    target_cols = list(target_cols)
    missing = [c for c in target_cols if c not in X.labels]
    if missing:
        raise KeyError(f"unknown columns {missing}")
    _, A, _ = _scaled(X)
    _qr_checked(A, X.labels)
    controls = [c for c in X.labels if c not in target_cols]
    T = X.select(target_cols).values
    if not controls:
        return DesignMatrix(X.index, tuple(target_cols), T, X.weights, X.groups)
    C = X.select(controls)
    _, Ac, _ = _scaled(C)
    active = X.weights > 0
    sw = np.sqrt(X.weights[active])
    QtT, R, piv, colnorm, _ = _qr_checked(Ac, C.labels, rhs=T[active] * sw[:, None])
    Z = linalg.solve_triangular(R, QtT)
    gamma = np.empty_like(Z)
    gamma[piv] = Z / colnorm[piv][:, None]
    resid = T - C.values @ gamma
    return DesignMatrix(X.index, tuple(target_cols), resid, X.weights, X.groups)
