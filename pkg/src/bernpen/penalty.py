"""Bernstein-function penalty family, MCP, and their Levy representations.

The family is indexed by rho <= 1:

    phi_rho(s) = log(1 + s)                                        rho = 0
    phi_rho(s) = (1/rho) * (1 - (1 + (1-rho)*s)^(-rho/(1-rho)))    rho < 1, rho != 0
    phi_rho(s) = 1 - exp(-s)                                       rho = 1

normalized so that phi(0) = 0, phi'(0) = 1 and phi''(0) = -1 hold exactly.
Named members: rho = 0 is the logarithmic penalty (log), rho = 1 the
exponential penalty (exp), rho = 1/2 the linear-fractional penalty (lfr,
phi(s) = 2s/(s+2)) and rho = -1 the square-root penalty (kep,
phi(s) = sqrt(2s+1) - 1).

The scaled penalty phi(alpha*|b|)/phi(alpha) interpolates between |b|
(alpha -> 0) and increasingly concave, hard-threshold-like shapes
(alpha -> infinity); its maximum concavity is alpha^2*|phi''(0)|/phi(alpha).

Every rho < 1 member has jump (Levy) density

    (1-rho)^(-1/(1-rho)) / Gamma(1/(1-rho)) * u^(rho/(1-rho) - 1) * exp(-u/(1-rho))

on u > 0, with neither drift nor killing term; at rho = 1 the measure
degenerates to a unit atom at u = 1, reported through ``levy_atom`` rather
than a density.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .errors import DomainError, InvalidParameterError

BERNSTEIN = "bernstein"
MCP = "mcp"
L1 = "l1"

_FAMILIES = (BERNSTEIN, MCP, L1)

# canonical rho values for the named family members
NAMED_RHO = {"log": 0.0, "exp": 1.0, "lfr": 0.5, "kep": -1.0}

RHO_ZERO_TOL = _kernels.RHO_ZERO_TOL
RHO_ONE_TOL = _kernels.RHO_ONE_TOL


@dataclass(frozen=True)
class PenaltySpec:
    """A penalty choice: family, shape parameter rho, and scale alpha.

    rho is meaningful only for the bernstein family. alpha must be positive
    for every family (it is unused by l1, whose scale folds into the
    regularization level).
    """

    family: str = BERNSTEIN
    rho: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InvalidParameterError(
                "unknown penalty family %r; expected one of %s" % (self.family, _FAMILIES)
            )
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise InvalidParameterError("alpha must be positive and finite, got %r" % self.alpha)
        if self.family == BERNSTEIN:
            if not math.isfinite(self.rho):
                raise InvalidParameterError("rho must be finite, got %r" % self.rho)
            if self.rho > 1.0:
                raise InvalidParameterError(
                    "rho must satisfy rho <= 1 (derivative complete monotonicity fails beyond), got %r"
                    % self.rho
                )

    @classmethod
    def bernstein(cls, rho, alpha=1.0):
        return cls(family=BERNSTEIN, rho=float(rho), alpha=float(alpha))

    @classmethod
    def mcp(cls, alpha=1.0):
        return cls(family=MCP, alpha=float(alpha))

    @classmethod
    def l1(cls):
        return cls(family=L1, alpha=1.0)

    @classmethod
    def from_name(cls, name, alpha=1.0):
        """Build a spec from a penalty name: log, exp, lfr, kep, mcp or l1."""
        key = name.strip().lower()
        if key in NAMED_RHO:
            return cls.bernstein(NAMED_RHO[key], alpha)
        if key == MCP:
            return cls.mcp(alpha)
        if key == L1:
            return cls.l1()
        raise InvalidParameterError(
            "unknown penalty name %r; expected log, exp, lfr, kep, mcp or l1" % name
        )


def _require_bernstein(spec):
    if spec.family != BERNSTEIN:
        raise InvalidParameterError("operation requires a bernstein-family spec, got %r" % spec.family)


def _check_nonneg(s, name="s"):
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("%s must be nonnegative" % name)
    return arr


def phi(spec, s):
    """Family value phi_rho(s) for s >= 0 (elementwise on arrays)."""
    _require_bernstein(spec)
    s = _check_nonneg(s)
    rho = spec.rho
    if abs(rho - 1.0) < RHO_ONE_TOL:
        return -np.expm1(-s)
    if abs(rho) < RHO_ZERO_TOL:
        return np.log1p(s)
    t = 1.0 - rho
    return -np.expm1(-(rho / t) * np.log1p(t * s)) / rho


def phi_prime(spec, s):
    """First derivative; completely monotone, phi'(0) = 1 exactly."""
    _require_bernstein(spec)
    s = _check_nonneg(s)
    rho = spec.rho
    if abs(rho - 1.0) < RHO_ONE_TOL:
        return np.exp(-s)
    if abs(rho) < RHO_ZERO_TOL:
        return 1.0 / (1.0 + s)
    t = 1.0 - rho
    return np.exp(-np.log1p(t * s) / t)


def phi_double_prime(spec, s):
    """Second derivative, evaluated analytically; phi''(0) = -1 exactly."""
    _require_bernstein(spec)
    s = _check_nonneg(s)
    rho = spec.rho
    if abs(rho - 1.0) < RHO_ONE_TOL:
        return -np.exp(-s)
    if abs(rho) < RHO_ZERO_TOL:
        return -1.0 / (1.0 + s) ** 2
    t = 1.0 - rho
    return -np.exp(-((2.0 - rho) / t) * np.log1p(t * s))


def scaled_penalty(spec, b):
    """phi(alpha*|b|)/phi(alpha): unit value at |b| = 1, slope alpha/phi(alpha) at 0."""
    _require_bernstein(spec)
    b = np.asarray(b, dtype=float)
    return phi(spec, spec.alpha * np.abs(b)) / phi(spec, spec.alpha)


def max_concavity(spec):
    """Largest curvature magnitude of the scaled penalty: alpha^2*|phi''(0)|/phi(alpha)."""
    _require_bernstein(spec)
    return spec.alpha**2 * abs(float(phi_double_prime(spec, 0.0))) / float(phi(spec, spec.alpha))


def mcp_value(b, alpha=1.0):
    """MCP curve M(alpha*|b|) with M(t) = t - t^2/2 capped at 1/2 from t = 1 on."""
    if not alpha > 0.0:
        raise InvalidParameterError("alpha must be positive, got %r" % alpha)
    t = alpha * np.abs(np.asarray(b, dtype=float))
    return np.where(t < 1.0, t - 0.5 * t * t, 0.5)


def penalty_value(spec, b):
    """Raw penalty shape used inside solver objectives.

    bernstein: phi(alpha*|b|); mcp: M(alpha*|b|); l1: |b|.
    """
    b = np.asarray(b, dtype=float)
    if spec.family == L1:
        return np.abs(b)
    if spec.family == MCP:
        return mcp_value(b, spec.alpha)
    return phi(spec, spec.alpha * np.abs(b))


def eta_normalizer(spec):
    """Value dividing the path-level eta to get the cell's lambda.

    bernstein cells use lambda = eta/phi(alpha), mcp cells the analogous
    lambda = eta/M(alpha), and l1 uses eta directly.
    """
    if spec.family == L1:
        return 1.0
    if spec.family == MCP:
        return float(mcp_value(1.0, spec.alpha))
    return float(phi(spec, spec.alpha))


def lambda_from_eta(spec, eta):
    if not eta > 0.0:
        raise InvalidParameterError("eta must be positive, got %r" % eta)
    return float(eta) / eta_normalizer(spec)


def has_atomic_levy_measure(spec):
    """True when the jump measure is the unit atom at u = 1 (rho = 1)."""
    _require_bernstein(spec)
    return abs(spec.rho - 1.0) < RHO_ONE_TOL


def levy_atom(spec):
    """Atom (location, mass) of the rho = 1 jump measure."""
    _require_bernstein(spec)
    if not has_atomic_levy_measure(spec):
        raise InvalidParameterError("the jump measure has a density for rho < 1; use levy_density")
    return 1.0, 1.0


def levy_density(spec, u):
    """Jump-measure density on u > 0 for rho < 1.

    Evaluated in log space for stability:
    exp(-log(1-rho)/(1-rho) - lgamma(1/(1-rho)) + (rho/(1-rho) - 1)*log u - u/(1-rho)).
    """
    _require_bernstein(spec)
    if has_atomic_levy_measure(spec):
        raise InvalidParameterError(
            "rho = 1 has a discrete jump measure (unit atom at u = 1); use levy_atom"
        )
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0):
        raise DomainError("u must be positive")
    rho = spec.rho
    t = 1.0 - rho
    log_const = -math.log(t) / t - gammaln(1.0 / t)
    return np.exp(log_const + (rho / t - 1.0) * np.log(u) - u / t)


def emit_curve(spec, s_values, path):
    """Write a (s, phi, dphi) CSV for plotting; columns named exactly s,phi,dphi."""
    s = _check_nonneg(s_values)
    values = np.atleast_1d(phi(spec, s))
    derivs = np.atleast_1d(phi_prime(spec, s))
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["s", "phi", "dphi"])
        for si, vi, di in zip(np.atleast_1d(s), values, derivs):
            writer.writerow([format(si, ".17g"), format(vi, ".17g"), format(di, ".17g")])
