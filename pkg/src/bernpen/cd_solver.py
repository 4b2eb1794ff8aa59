"""Pathwise cyclic coordinate descent for penalized least squares.

The solver walks a two-dimensional grid: regularization levels eta
(stored ascending, processed from the largest down) crossed with penalty
scales alpha (stored descending, processed from the smallest up). Each cell
minimizes

    0.5*||y - X b||^2 + lam * sum_j P(b_j),   lam = eta / P_unit(alpha)

where P is the penalty shape (phi(alpha|b|), the MCP curve, or |b|) and
P_unit(alpha) its value at b = 1, so eta plays the same role across
families. Warm starts follow the grid: each eta level starts from the
smallest-alpha solution of the previous (larger) eta, and the solution is
carried across alpha cells within a level.

Under the default skip policy (``paper_faithful``) a cell is solved only
when the penalized subproblem stays convex, eta <= P_unit(alpha)/alpha^2;
cells beyond that gate are marked ``skipped_condition``. The
``compute_case2`` policy solves them with the exact jump-regime operator
instead, at the cost of losing the per-coordinate convexity guarantee.

Columns of X must be standardized (mean zero, unit length) and y centered;
coefficients are reported back on the original data scale when a
standardization transform is supplied.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ContractViolationError, InvalidParameterError
from .losses import SQUARED, loss_grad
from .penalty import BERNSTEIN, L1, MCP, PenaltySpec, eta_normalizer, penalty_value, phi_prime

CONVERGED = "converged"
SKIPPED = "skipped_condition"
MAX_SWEEPS = "max_sweeps"

PAPER_FAITHFUL = "paper_faithful"
COMPUTE_CASE2 = "compute_case2"
_SKIP_POLICIES = (PAPER_FAITHFUL, COMPUTE_CASE2)

_logger = logging.getLogger(__name__)

_FAMILY_CODES = {BERNSTEIN: _kernels.FAMILY_BERNSTEIN, MCP: _kernels.FAMILY_MCP, L1: _kernels.FAMILY_L1}

DEFAULT_ALPHAS = (8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 1e-3)


@dataclass(frozen=True)
class CDConfig:
    """Solver knobs.

    tol: largest per-sweep coefficient change that counts as converged.
    max_sweeps: sweep budget per cell.
    skip_policy: ``paper_faithful`` skips cells beyond the convexity gate;
        ``compute_case2`` solves them with the exact jump-regime operator.
    """

    tol: float = 1e-7
    max_sweeps: int = 10000
    skip_policy: str = PAPER_FAITHFUL

    def __post_init__(self):
        if not (math.isfinite(self.tol) and self.tol > 0.0):
            raise InvalidParameterError("tol must be positive, got %r" % self.tol)
        if self.max_sweeps < 1:
            raise InvalidParameterError("max_sweeps must be at least 1, got %r" % self.max_sweeps)
        if self.skip_policy not in _SKIP_POLICIES:
            raise InvalidParameterError(
                "skip_policy must be one of %s, got %r" % ("/".join(_SKIP_POLICIES), self.skip_policy)
            )


@dataclass(frozen=True)
class PathGrid:
    """Grid of regularization levels (etas, ascending) and scales (alphas, descending)."""

    etas: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        etas = np.asarray(self.etas, dtype=float)
        alphas = np.asarray(self.alphas, dtype=float)
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "alphas", alphas)
        if etas.ndim != 1 or etas.size == 0 or np.any(etas <= 0.0):
            raise InvalidParameterError("etas must be a nonempty 1-D array of positive values")
        if np.any(np.diff(etas) <= 0.0):
            raise InvalidParameterError("etas must be strictly increasing")
        if alphas.ndim != 1 or alphas.size == 0 or np.any(alphas <= 0.0):
            raise InvalidParameterError("alphas must be a nonempty 1-D array of positive values")
        if np.any(np.diff(alphas) >= 0.0):
            raise InvalidParameterError("alphas must be strictly decreasing")

    @classmethod
    def default(cls, X, y, n_etas=50, eta_min_ratio=1e-3, alphas=DEFAULT_ALPHAS):
        """Geometric eta grid below eta_max = max_j |x_j @ y| and the standard alphas."""
        eta_max = float(np.max(np.abs(X.T @ y)))
        if not eta_max > 0.0:
            raise InvalidParameterError("X.T @ y is identically zero; no usable eta grid")
        etas = np.geomspace(eta_min_ratio * eta_max, eta_max, int(n_etas))
        return cls(etas=etas, alphas=np.asarray(alphas, dtype=float))


def convexity_gate(spec, alpha, eta):
    """True when the (alpha, eta) cell keeps every scalar subproblem convex.

    The cell's lam = eta/P_unit(alpha) must satisfy lam*alpha^2*|P''(0)| <= 1,
    i.e. eta <= P_unit(alpha)/alpha^2 for the bernstein and MCP shapes
    (|P''(0)| = 1); l1 cells are always eligible.
    """
    if spec.family == L1:
        return True
    unit = eta_normalizer(PenaltySpec(spec.family, spec.rho, alpha))
    return eta <= unit / (alpha * alpha)


@dataclass
class CDState:
    """Residual-caching coordinate-descent state: b and r = y - X @ b."""

    X: np.ndarray
    y: np.ndarray
    b: np.ndarray
    r: np.ndarray

    @classmethod
    def start(cls, X, y, b=None):
        X = np.asfortranarray(X, dtype=float)
        y = np.ascontiguousarray(y, dtype=float)
        b = np.zeros(X.shape[1]) if b is None else np.array(b, dtype=float)
        return cls(X=X, y=y, b=b, r=y - X @ b)

    def refresh(self):
        """Recompute the residual from scratch, clearing accumulated drift."""
        self.r = self.y - self.X @ self.b

    def partial_inner(self, j):
        """Coordinate target x_j @ r + b_j (unit-length columns)."""
        return float(self.X[:, j] @ self.r) + float(self.b[j])


def cd_sweep(state, alpha, eta, spec):
    """One cyclic pass of exact coordinate minimizations at cell (alpha, eta).

    Returns the largest absolute coefficient change; state.b and state.r are
    updated in place.
    """
    cell_spec = PenaltySpec(spec.family, spec.rho, alpha)
    lam = eta / eta_normalizer(cell_spec)
    return float(
        _kernels.cd_sweep_kernel(
            state.X, state.r, state.b, lam, alpha, _FAMILY_CODES[spec.family],
            float(spec.rho if spec.rho is not None else 0.0),
        )
    )


@dataclass
class PathSolution:
    """Solutions over the whole grid, indexed [alpha_index, eta_index].

    coef holds original-scale coefficients (equal to coef_std when no
    transform was supplied); skipped cells carry NaN coefficients and
    objectives. nnz counts exact nonzeros of the standardized solution.
    """

    spec: PenaltySpec
    grid: PathGrid
    coef: np.ndarray
    coef_std: np.ndarray
    intercept: np.ndarray
    status: np.ndarray
    sweeps: np.ndarray
    objective: np.ndarray
    transform: Optional[object] = None

    @property
    def nnz(self):
        counts = np.zeros(self.status.shape, dtype=int)
        computed = self.status != SKIPPED
        counts[computed] = np.count_nonzero(self.coef_std[computed], axis=-1)
        return counts

    def cell(self, alpha_index, eta_index):
        """Dict view of one grid cell."""
        return {
            "alpha": float(self.grid.alphas[alpha_index]),
            "eta": float(self.grid.etas[eta_index]),
            "status": str(self.status[alpha_index, eta_index]),
            "sweeps": int(self.sweeps[alpha_index, eta_index]),
            "objective": float(self.objective[alpha_index, eta_index]),
            "coef": self.coef[alpha_index, eta_index],
            "intercept": float(self.intercept[alpha_index, eta_index]),
        }

    def _rows(self):
        nnz = self.nnz
        for k in range(self.grid.alphas.size):
            for l in range(self.grid.etas.size):
                skipped = self.status[k, l] == SKIPPED
                yield {
                    "alpha": format(self.grid.alphas[k], ".17g"),
                    "eta": format(self.grid.etas[l], ".17g"),
                    "status": str(self.status[k, l]),
                    "sweeps": int(self.sweeps[k, l]),
                    "objective": "" if skipped else format(self.objective[k, l], ".17g"),
                    "nnz": "" if skipped else int(nnz[k, l]),
                }, skipped, k, l

    def to_csv(self, path, coef_path=None):
        """Write per-cell diagnostics; optionally a companion coefficient matrix."""
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["alpha", "eta", "status", "sweeps", "objective", "nnz"])
            for row, _, _, _ in self._rows():
                writer.writerow([row[c] for c in ("alpha", "eta", "status", "sweeps", "objective", "nnz")])
        if coef_path is not None:
            p = self.coef.shape[-1]
            with open(coef_path, "w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["alpha", "eta", "intercept"] + ["b%d" % j for j in range(p)])
                for row, skipped, k, l in self._rows():
                    if skipped:
                        continue
                    writer.writerow(
                        [row["alpha"], row["eta"], format(self.intercept[k, l], ".17g")]
                        + [format(v, ".17g") for v in self.coef[k, l]]
                    )

    def to_json(self, path):
        cells = [row for row, _, _, _ in self._rows()]
        with open(path, "w") as handle:
            json.dump({"family": self.spec.family, "rho": self.spec.rho, "cells": cells}, handle, indent=1)


def check_standardized(X, y=None, tol=1e-6):
    """Raise unless columns have mean ~0 and unit length (and y mean ~0 if given)."""
    means = X.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", X, X))
    bad_mean = np.argmax(np.abs(means))
    if abs(means[bad_mean]) > tol:
        raise ContractViolationError(
            "column %d has mean %.3g; fit_path expects centered columns" % (bad_mean, means[bad_mean])
        )
    bad_norm = np.argmax(np.abs(norms - 1.0))
    if abs(norms[bad_norm] - 1.0) > tol:
        raise ContractViolationError(
            "column %d has length %.6g; fit_path expects unit-length columns" % (bad_norm, norms[bad_norm])
        )
    if y is not None and abs(float(np.mean(y))) > tol * max(1.0, float(np.max(np.abs(y))) if y.size else 1.0):
        raise ContractViolationError("y must be centered for the squared-loss path")


def fit_path(X, y, spec, grid=None, config=None, transform=None):
    """Solve every eligible grid cell with warm-started coordinate descent.

    spec fixes the penalty family and rho; the grid supplies the per-cell
    alpha (spec.alpha is not used). X must be standardized and y centered;
    pass the transform from ``data_metrics.standardize`` to get coefficients
    on the original scale.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise InvalidParameterError("X must be 2-D and y 1-D with matching sample counts")
    check_standardized(X, y)
    config = config or CDConfig()
    grid = grid or PathGrid.default(X, y)
    n, p = X.shape
    K, L = grid.alphas.size, grid.etas.size
    family_code = _FAMILY_CODES[spec.family]
    rho_code = float(spec.rho if spec.rho is not None else 0.0)

    Xf = np.asfortranarray(X)
    coef_std = np.full((K, L, p), np.nan)
    status = np.full((K, L), SKIPPED, dtype=object)
    sweeps = np.zeros((K, L), dtype=int)
    objective = np.full((K, L), np.nan)

    beyond_gate = 0
    warm = np.zeros(p)
    for l in range(L - 1, -1, -1):
        eta = float(grid.etas[l])
        b = warm.copy()
        r = y - Xf @ b
        for k in range(K - 1, -1, -1):
            alpha = float(grid.alphas[k])
            cell_spec = PenaltySpec(spec.family, spec.rho, alpha)
            if not convexity_gate(spec, alpha, eta):
                if config.skip_policy == PAPER_FAITHFUL:
                    continue
                beyond_gate += 1
            lam = eta / eta_normalizer(cell_spec)
            n_sweeps, ok = _kernels.cd_solve_cell(
                Xf, r, b, lam, alpha, family_code, rho_code, config.tol, config.max_sweeps
            )
            r = y - Xf @ b
            coef_std[k, l] = b
            status[k, l] = CONVERGED if ok else MAX_SWEEPS
            sweeps[k, l] = n_sweeps
            objective[k, l] = 0.5 * float(r @ r) + lam * float(np.sum(penalty_value(cell_spec, b)))
        if status[K - 1, l] != SKIPPED:
            warm = coef_std[K - 1, l].copy()
    if beyond_gate:
        _logger.warning(
            "solved %d cell(s) beyond the convexity gate; per-coordinate "
            "subproblems there are nonconvex and monotone descent is not guaranteed",
            beyond_gate,
        )

    if transform is not None:
        coef = coef_std / np.asarray(transform.col_scales, dtype=float)
        intercept = transform.y_mean - coef @ np.asarray(transform.col_means, dtype=float)
    else:
        coef = coef_std.copy()
        intercept = np.zeros((K, L))
    return PathSolution(
        spec=spec,
        grid=grid,
        coef=coef,
        coef_std=coef_std,
        intercept=intercept,
        status=status,
        sweeps=sweeps,
        objective=objective,
        transform=transform,
    )


def _penalty_slopes(spec, b_nonzero_abs):
    """d/d|b| of the penalty shape at the given |b| values, and at 0."""
    alpha = spec.alpha
    if spec.family == L1:
        return np.ones_like(b_nonzero_abs), 1.0
    if spec.family == MCP:
        return alpha * np.maximum(0.0, 1.0 - alpha * b_nonzero_abs), alpha
    return alpha * phi_prime(spec, alpha * b_nonzero_abs), alpha


def kkt_residual(b, X, y, lam, spec, loss=SQUARED, delta=1.0):
    """Largest violation of the stationarity conditions at b.

    Nonzero coordinates contribute |grad_j + lam * P'(|b_j|) * sgn(b_j)|;
    zero coordinates contribute max(0, |grad_j| - lam * P'(0+)).
    """
    b = np.asarray(b, dtype=float)
    grad = loss_grad(loss, b, X, y, delta)
    nonzero = b != 0.0
    slopes, slope0 = _penalty_slopes(spec, np.abs(b[nonzero]))
    worst = 0.0
    if np.any(nonzero):
        worst = float(np.max(np.abs(grad[nonzero] + lam * slopes * np.sign(b[nonzero]))))
    if np.any(~nonzero):
        zero_side = float(np.max(np.abs(grad[~nonzero]))) - lam * slope0
        worst = max(worst, max(0.0, zero_side))
    return worst


@dataclass(frozen=True)
class LocalMinReport:
    """Second-order / dual-feasibility diagnostics at a candidate solution.

    eigen_margin adds the penalty's most negative curvature lam*alpha^2*P''(0)
    to the smallest eigenvalue of the support Gram matrix (positive margin
    plus strict dual feasibility certify a strict local minimum).
    eigen_margin_scaled divides the curvature term by P_unit(alpha), the
    convention matching objectives written in eta units.
    """

    eigen_margin: float
    eigen_margin_scaled: float
    strict_dual_feasible: bool
    dual_slack: float
    support: np.ndarray


def check_local_min(b, X, y, lam, spec, zero_tol=1e-10, loss=SQUARED, delta=1.0):
    """Evaluate the strict-local-minimum certificate at b (squared loss)."""
    b = np.asarray(b, dtype=float)
    support = np.flatnonzero(np.abs(b) > zero_tol)
    grad = loss_grad(loss, b, X, y, delta)
    _, slope0 = _penalty_slopes(spec, np.abs(b[support]))
    zero_mask = np.ones(b.size, dtype=bool)
    zero_mask[support] = False
    if np.any(zero_mask):
        dual_slack = lam * slope0 - float(np.max(np.abs(grad[zero_mask])))
    else:
        dual_slack = math.inf
    if support.size == 0:
        return LocalMinReport(math.inf, math.inf, dual_slack > 0.0, dual_slack, support)
    gram = X[:, support].T @ X[:, support]
    eig_min = float(np.linalg.eigvalsh(gram)[0])
    curvature = 0.0 if spec.family == L1 else -lam * spec.alpha**2
    margin = eig_min + curvature
    margin_scaled = eig_min + curvature / eta_normalizer(spec)
    return LocalMinReport(margin, margin_scaled, dual_slack > 0.0, dual_slack, support)
