"""Exact scalar thresholding and proximal operators.

For the bernstein family the operator returns the global minimizer of

    J1(b) = 0.5*(z - b)^2 + lam*phi(alpha*|b|)

split into two regimes by the curvature product lam*alpha^2*|phi''(0)|:

* case I (product <= 1): J1 is convex; the estimate is 0 for
  |z| <= lam*alpha*phi'(0) and otherwise the unique root of
  b + lam*alpha*phi'(alpha*b) = |z| on (0, |z|), found by bisection.
* case II (product > 1): the gap b + lam*alpha*phi'(alpha*b) - |z| has an
  interior stationary point s_star solving 1 + lam*alpha^2*phi''(alpha*s) = 0;
  no nonzero stationary point exists for |z| <= s_star +
  lam*alpha*phi'(alpha*s_star) (the ``boundary`` reported here), and above
  it the candidate root on (s_star, |z|) is kept only when it beats b = 0 on
  the objective. The operator therefore jumps at the switch point; results
  carry the case tag so callers can warn.

Ties (boundary or equal objective) resolve to 0. Closed forms for the
log/lfr/kep members live in ``kappa_log``/``kappa_lfr``/``kappa_kep`` and are
kept separate from the bisection route so the two can be cross-checked.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import InvalidParameterError, NoRootError
from .penalty import BERNSTEIN, L1, MCP, PenaltySpec, lambda_from_eta, penalty_value

# slack for clamping a closed-form discriminant/arccos argument that is
# out of range by rounding only
_CLAMP_SLACK = 1e-12


@dataclass(frozen=True)
class ThresholdQuery:
    """Inputs of the scalar operator: target z, penalty spec, level lam.

    ``from_eta`` builds the path-scaled operator with lam = eta/phi(alpha).
    """

    z: float
    spec: PenaltySpec
    lam: float

    def __post_init__(self):
        if not math.isfinite(self.z):
            raise InvalidParameterError("z must be finite, got %r" % self.z)
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise InvalidParameterError("lam must be positive and finite, got %r" % self.lam)

    @classmethod
    def from_eta(cls, z, eta, spec):
        return cls(z=float(z), spec=spec, lam=lambda_from_eta(spec, eta))


@dataclass(frozen=True)
class ThresholdResult:
    """Operator output.

    estimate: the minimizer (0 on ties).
    case: "I" (convex subproblem) or "II" (jump regime).
    boundary: zero threshold; in case II the root-existence point
        s_star + lam*alpha*phi'(alpha*s_star), above which a nonzero
        stationary point exists (the estimate may still be 0 just above it
        when 0 wins the objective comparison).
    s_star: interior stationary point of the gap (case II only).
    kappa: the nonzero stationary root when one exists, even if 0 won.
    """

    estimate: float
    case: str
    boundary: float
    s_star: Optional[float] = None
    kappa: Optional[float] = None


def threshold(query):
    """Evaluate the exact scalar operator for a bernstein-family penalty."""
    spec = query.spec
    if spec.family != BERNSTEIN:
        raise InvalidParameterError(
            "threshold() covers the bernstein family; use mcp_threshold or soft_threshold"
        )
    z, lam, alpha, rho = query.z, query.lam, spec.alpha, spec.rho
    a = abs(z)
    sign = 1.0 if z > 0.0 else -1.0
    if lam * alpha * alpha <= 1.0:
        boundary = lam * alpha
        if a <= boundary:
            return ThresholdResult(0.0, "I", boundary)
        root = _kernels.bisect_root(a, lam, alpha, rho, 0.0, a)
        return ThresholdResult(sign * root, "I", boundary, kappa=root)
    s_star = _kernels.case2_sstar(lam, alpha, rho)
    boundary = s_star + lam * alpha * _kernels.phi_prime_scalar(rho, alpha * s_star)
    if a <= boundary:
        return ThresholdResult(0.0, "II", boundary, s_star=s_star)
    root = _kernels.bisect_root(a, lam, alpha, rho, s_star, a)
    j_root = 0.5 * (a - root) ** 2 + lam * _kernels.phi_scalar(rho, alpha * root)
    estimate = sign * root if j_root < 0.5 * a * a else 0.0
    return ThresholdResult(estimate, "II", boundary, s_star=s_star, kappa=root)


def threshold_value(z, lam, spec):
    """Estimate only, for any penalty family."""
    if spec.family == L1:
        return soft_threshold(z, lam)
    if spec.family == MCP:
        return mcp_threshold(z, lam, spec.alpha)
    return threshold(ThresholdQuery(z=float(z), spec=spec, lam=float(lam))).estimate


def threshold_from_eta(z, eta, spec):
    """Path-scaled operator S_alpha(z, eta), penalty eta*phi(alpha|b|)/phi(alpha)."""
    return threshold(ThresholdQuery.from_eta(z, eta, spec))


def soft_threshold(z, eta):
    """sgn(z) * max(|z| - eta, 0); accepts scalars or arrays."""
    if not (math.isfinite(eta) and eta >= 0.0):
        raise InvalidParameterError("eta must be nonnegative and finite, got %r" % eta)
    if np.ndim(z) == 0:
        return _kernels.soft_threshold_scalar(float(z), float(eta))
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - eta, 0.0)


def mcp_threshold(z, lam, alpha):
    """Exact minimizer of 0.5*(z-b)^2 + lam*M(alpha*|b|).

    For lam*alpha^2 < 1: soft threshold at lam*alpha rescaled by
    1/(1 - lam*alpha^2) until |z| = 1/alpha, identity beyond. For
    lam*alpha^2 >= 1: hard threshold at sqrt(lam). Objective ties go to 0.
    """
    if not (math.isfinite(lam) and lam > 0.0):
        raise InvalidParameterError("lam must be positive and finite, got %r" % lam)
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise InvalidParameterError("alpha must be positive and finite, got %r" % alpha)
    return _kernels.mcp_threshold_scalar(float(z), float(lam), float(alpha))


def prox(u, nu, lam, spec):
    """argmin_x (nu/2)*(x-u)^2 + lam*P(x): the operator at level lam/nu."""
    if not (math.isfinite(nu) and nu > 0.0):
        raise InvalidParameterError("nu must be positive and finite, got %r" % nu)
    return threshold_value(u, lam / nu, spec)


def _positive_root_or_error(kappa, name):
    if not (math.isfinite(kappa) and kappa > 0.0):
        raise NoRootError("%s: no positive stationary root at these parameters" % name)
    return kappa


def kappa_log(z, lam, alpha):
    """Closed-form root of b + lam*alpha/(1 + alpha*b) = |z| (log penalty).

    Solves alpha*b^2 + (1 - alpha|z|)*b + (lam*alpha - |z|) = 0; valid above
    the zero boundary, where the discriminant (1 + alpha|z|)^2 - 4*lam*alpha^2
    is nonnegative.
    """
    a = abs(float(z))
    disc = (1.0 + alpha * a) ** 2 - 4.0 * lam * alpha * alpha
    if disc < 0.0:
        if disc < -_CLAMP_SLACK * max(1.0, (1.0 + alpha * a) ** 2):
            raise NoRootError("kappa_log: negative discriminant, |z| below the root boundary")
        disc = 0.0
    kappa = (alpha * a - 1.0 + math.sqrt(disc)) / (2.0 * alpha)
    return _positive_root_or_error(kappa, "kappa_log")


def kappa_lfr(z, lam, alpha):
    """Closed-form root of b + 4*lam*alpha/(alpha*b + 2)^2 = |z| (lfr penalty).

    With w = alpha*b + 2 the equation is w^3 - c*w^2 + 4*lam*alpha^2 = 0,
    c = alpha|z| + 2; the relevant (largest) root is

        w = (2c/3)*cos(arccos(1 - 54*lam*alpha^2/c^3)/3) + c/3.
    """
    a = abs(float(z))
    c = alpha * a + 2.0
    arg = 1.0 - 54.0 * lam * alpha * alpha / c**3
    if arg < -1.0:
        if arg < -1.0 - _CLAMP_SLACK:
            raise NoRootError("kappa_lfr: no real root, |z| below the root boundary")
        arg = -1.0
    w = (2.0 * c / 3.0) * math.cos(math.acos(arg) / 3.0) + c / 3.0
    return _positive_root_or_error((w - 2.0) / alpha, "kappa_lfr")


def kappa_kep(z, lam, alpha):
    """Closed-form root of b + lam*alpha/sqrt(2*alpha*b + 1) = |z| (kep penalty).

    With w = sqrt(2*alpha*b + 1) the equation is w^3 - q*w + 2*lam*alpha^2 = 0,
    q = 2*alpha|z| + 1; the relevant root is

        w = 2*sqrt(q/3)*cos(arccos(-lam*alpha^2*(3/q)^{3/2})/3).
    """
    a = abs(float(z))
    q = 2.0 * alpha * a + 1.0
    arg = -lam * alpha * alpha * (3.0 / q) ** 1.5
    if arg < -1.0:
        if arg < -1.0 - _CLAMP_SLACK:
            raise NoRootError("kappa_kep: no real root, |z| below the root boundary")
        arg = -1.0
    w = 2.0 * math.sqrt(q / 3.0) * math.cos(math.acos(arg) / 3.0)
    return _positive_root_or_error((w * w - 1.0) / (2.0 * alpha), "kappa_kep")


def oracle_minimize(z, lam, spec, grid_radius=None, grid_points=20001):
    """Brute-force minimizer of J1: dense grid scan plus golden-section refinement.

    Independent of the operator logic; used as the test oracle. The scan
    covers [-grid_radius, grid_radius] (default |z| + 1, which always brackets
    the minimizer) with at least 10^4 points, then refines around the best
    cell to ~1e-12 and finally compares against b = 0 to guard the jump case.
    """
    if grid_points < 10000:
        raise InvalidParameterError("grid_points must be at least 10000, got %r" % grid_points)
    z = float(z)
    radius = float(grid_radius) if grid_radius is not None else abs(z) + 1.0
    if not radius > 0.0:
        raise InvalidParameterError("grid_radius must be positive, got %r" % grid_radius)

    def objective(b):
        return 0.5 * (z - b) ** 2 + lam * float(penalty_value(spec, b))

    grid = np.linspace(-radius, radius, int(grid_points))
    values = 0.5 * (z - grid) ** 2 + lam * penalty_value(spec, grid)
    best = int(np.argmin(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    x = _golden_section(objective, lo, hi)
    candidates = [x, 0.0, grid[best]]
    scored = [(objective(b), abs(b)) for b in candidates]
    best_val = min(s[0] for s in scored)
    # among near-ties prefer the smallest magnitude (operator ties go to 0)
    chosen = min(
        (b for (val, _), b in zip(scored, candidates) if val <= best_val + 1e-14 * max(1.0, best_val)),
        key=abs,
    )
    return float(chosen)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section(f, lo, hi, iters=120):
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
        if hi - lo <= 1e-14 * max(1.0, abs(lo) + abs(hi)):
            break
    return 0.5 * (lo + hi)
