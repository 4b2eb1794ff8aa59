"""Loss functions for the solvers: squared, logistic, and Huber.

Conventions: rows of X are samples. The squared and Huber losses model
y = X @ b + noise through the residual r = y - X @ b; the logistic loss
expects labels y in {-1, +1} and works with margins y * (X @ b).

Coordinate curvature bounds (second-derivative majorants along one
coordinate) are sum_i x_ij^2 for the squared and Huber losses and a quarter
of that for the logistic loss, floored at 1e-8 so proximal step sizes stay
finite on degenerate columns.
"""

import numpy as np
from scipy.special import expit

from .errors import ContractViolationError, InvalidParameterError

SQUARED = "squared"
LOGISTIC = "logistic"
HUBER = "huber"

_KINDS = (SQUARED, LOGISTIC, HUBER)

CURVATURE_FLOOR = 1e-8


def _validate_kind(kind):
    if kind not in _KINDS:
        raise InvalidParameterError("unknown loss %r; expected one of %s" % (kind, _KINDS))


def _validate_delta(delta):
    if not delta > 0.0:
        raise InvalidParameterError("huber delta must be positive, got %r" % delta)


def check_binary_labels(y):
    """Raise unless every label is -1 or +1."""
    y = np.asarray(y)
    if not np.all((y == 1.0) | (y == -1.0)):
        raise ContractViolationError("logistic labels must be -1 or +1")


def _validate_shapes(b, X, y):
    if X.ndim != 2:
        raise ContractViolationError("X must be 2-d, got shape %s" % (X.shape,))
    if y.shape != (X.shape[0],):
        raise ContractViolationError(
            "y has shape %s but X has %d rows" % (y.shape, X.shape[0])
        )
    if b.shape != (X.shape[1],):
        raise ContractViolationError(
            "b has shape %s but X has %d columns" % (b.shape, X.shape[1])
        )


def loss_value(kind, b, X, y, delta=1.0):
    """Total loss at coefficient vector b."""
    _validate_kind(kind)
    b = np.asarray(b, dtype=float)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _validate_shapes(b, X, y)
    if kind == SQUARED:
        r = y - X @ b
        return 0.5 * float(r @ r)
    if kind == LOGISTIC:
        check_binary_labels(y)
        margins = y * (X @ b)
        return float(np.logaddexp(0.0, -margins).sum())
    _validate_delta(delta)
    r = y - X @ b
    a = np.abs(r)
    return float(np.where(a <= delta, 0.5 * r * r, delta * a - 0.5 * delta * delta).sum())


def loss_grad(kind, b, X, y, delta=1.0):
    """Gradient of the total loss with respect to b."""
    _validate_kind(kind)
    b = np.asarray(b, dtype=float)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _validate_shapes(b, X, y)
    if kind == SQUARED:
        return X.T @ (X @ b - y)
    if kind == LOGISTIC:
        check_binary_labels(y)
        margins = y * (X @ b)
        weights = expit(-margins)
        return -(X.T @ (weights * y))
    _validate_delta(delta)
    r = y - X @ b
    return -(X.T @ np.clip(r, -delta, delta))


def coord_curvature_bound(kind, j, X, delta=1.0):
    """Majorant of the loss's second derivative along coordinate j."""
    _validate_kind(kind)
    if kind == HUBER:
        _validate_delta(delta)
    col_sq = float(X[:, j] @ X[:, j])
    bound = 0.25 * col_sq if kind == LOGISTIC else col_sq
    return max(bound, CURVATURE_FLOOR)


def curvature_bounds(kind, X, delta=1.0):
    """All coordinate curvature bounds at once."""
    _validate_kind(kind)
    if kind == HUBER:
        _validate_delta(delta)
    col_sq = np.einsum("ij,ij->j", X, X)
    bounds = 0.25 * col_sq if kind == LOGISTIC else col_sq
    return np.maximum(bounds, CURVATURE_FLOOR)


def partial_residual_inner(j, b, X, y):
    """Inner product of column j with the partial residual excluding j.

    Equals x_j @ (y - X @ b) + b_j when column j has unit length, which is
    the coordinate target fed to the thresholding operator.
    """
    col = X[:, j]
    norm = float(np.sqrt(col @ col))
    if abs(norm - 1.0) > 1e-6:
        raise ContractViolationError(
            "column %d must have unit length (got %.6g); standardize the design first" % (j, norm)
        )
    return float(col @ (y - X @ np.asarray(b, dtype=float))) + float(b[j])
