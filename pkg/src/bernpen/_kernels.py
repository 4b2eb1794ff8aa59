"""Scalar and sweep kernels shared by the operators and the solvers.

Everything here is compiled with numba when it is importable and runs as
plain Python otherwise, so the package stays correct (just slower) without
a working JIT. Kernels are deliberately restricted to scalars, 1-D loops
and ``math`` calls.

The public modules re-expose this functionality with validation and richer
result types; tests cross-check both layers against independent oracles.
"""

import math

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# rho values this close to the endpoints use the log / exponential branches
RHO_ZERO_TOL = 1e-8
RHO_ONE_TOL = 1e-8

FAMILY_BERNSTEIN = 0
FAMILY_MCP = 1
FAMILY_L1 = 2

LOSS_SQUARED = 0
LOSS_LOGISTIC = 1
LOSS_HUBER = 2

BISECT_RTOL = 1e-12
BISECT_MAX_ITER = 200


@njit(cache=True)
def phi_scalar(rho, s):
    """Family value at s >= 0; normalized so phi(0)=0, phi'(0)=1, phi''(0)=-1."""
    if abs(rho - 1.0) < RHO_ONE_TOL:
        return -math.expm1(-s)
    if abs(rho) < RHO_ZERO_TOL:
        return math.log1p(s)
    t = 1.0 - rho
    return -math.expm1(-(rho / t) * math.log1p(t * s)) / rho


@njit(cache=True)
def phi_prime_scalar(rho, s):
    if abs(rho - 1.0) < RHO_ONE_TOL:
        return math.exp(-s)
    if abs(rho) < RHO_ZERO_TOL:
        return 1.0 / (1.0 + s)
    t = 1.0 - rho
    return math.exp(-math.log1p(t * s) / t)


@njit(cache=True)
def phi_dprime_scalar(rho, s):
    if abs(rho - 1.0) < RHO_ONE_TOL:
        return -math.exp(-s)
    if abs(rho) < RHO_ZERO_TOL:
        inv = 1.0 / (1.0 + s)
        return -inv * inv
    t = 1.0 - rho
    return -math.exp(-((2.0 - rho) / t) * math.log1p(t * s))


@njit(cache=True)
def penalty_scalar(family, rho, alpha, b):
    """Raw penalty shape P(b): phi(alpha|b|), the MCP curve, or |b|."""
    a = abs(b)
    if family == FAMILY_L1:
        return a
    if family == FAMILY_MCP:
        t = alpha * a
        if t < 1.0:
            return t - 0.5 * t * t
        return 0.5
    return phi_scalar(rho, alpha * a)


@njit(cache=True)
def _stationarity_gap(b, a, lam, alpha, rho):
    return b + lam * alpha * phi_prime_scalar(rho, alpha * b) - a


@njit(cache=True)
def bisect_root(a, lam, alpha, rho, lo, hi):
    """Root of b + lam*alpha*phi'(alpha*b) = a on [lo, hi].

    Caller guarantees the gap is negative at lo and positive at hi.
    Relative tolerance 1e-12, at most 200 halvings.
    """
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if _stationarity_gap(mid, a, lam, alpha, rho) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= BISECT_RTOL * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


@njit(cache=True)
def _kappa_log_scalar(a, lam, alpha):
    """Positive root of b + lam*alpha/(1 + alpha*b) = a (rho = 0).

    Quadratic alpha*b^2 + (1 - alpha*a)*b + (lam*alpha - a) = 0; the caller
    guarantees a sits above the zero boundary so the discriminant is
    nonnegative up to roundoff.
    """
    disc = (1.0 + alpha * a) ** 2 - 4.0 * lam * alpha * alpha
    if disc < 0.0:
        disc = 0.0
    return (alpha * a - 1.0 + math.sqrt(disc)) / (2.0 * alpha)


@njit(cache=True)
def _kappa_lfr_scalar(a, lam, alpha):
    """Positive root of b + 4*lam*alpha/(alpha*b + 2)^2 = a (rho = 1/2).

    With w = alpha*b + 2: w^3 - c*w^2 + 4*lam*alpha^2 = 0, c = alpha*a + 2;
    the largest real root is the relevant one.
    """
    c = alpha * a + 2.0
    arg = 1.0 - 54.0 * lam * alpha * alpha / (c * c * c)
    if arg < -1.0:
        arg = -1.0
    w = (2.0 * c / 3.0) * math.cos(math.acos(arg) / 3.0) + c / 3.0
    return (w - 2.0) / alpha


@njit(cache=True)
def _kappa_kep_scalar(a, lam, alpha):
    """Positive root of b + lam*alpha/sqrt(2*alpha*b + 1) = a (rho = -1).

    With w = sqrt(2*alpha*b + 1): w^3 - q*w + 2*lam*alpha^2 = 0,
    q = 2*alpha*a + 1; the largest real root is the relevant one.
    """
    q = 2.0 * alpha * a + 1.0
    arg = -lam * alpha * alpha * math.sqrt(27.0 / (q * q * q))
    if arg < -1.0:
        arg = -1.0
    w = 2.0 * math.sqrt(q / 3.0) * math.cos(math.acos(arg) / 3.0)
    return (w * w - 1.0) / (2.0 * alpha)


@njit(cache=True)
def _newton_root(a, lam, alpha, rho, lo, hi):
    """Newton iteration for the stationarity gap, started at hi.

    The gap g(b) = b + lam*alpha*phi'(alpha*b) - a is strictly convex
    (phi''' > 0 by complete monotonicity) with g(hi) > 0, so the iterates
    decrease monotonically to the bracketed root; any degenerate step falls
    back to bisection on the still-valid bracket.
    """
    b = hi
    g = _stationarity_gap(b, a, lam, alpha, rho)
    for _ in range(60):
        gp = 1.0 + lam * alpha * alpha * phi_dprime_scalar(rho, alpha * b)
        if gp <= 0.0:
            return bisect_root(a, lam, alpha, rho, lo, b)
        step = g / gp
        nb = b - step
        if nb < lo:
            return bisect_root(a, lam, alpha, rho, lo, b)
        g = _stationarity_gap(nb, a, lam, alpha, rho)
        if g < 0.0:
            # roundoff overshoot past the root; nb is within one ulp-scale step
            return nb
        b = nb
        if step <= BISECT_RTOL * max(1.0, b):
            return b
    return bisect_root(a, lam, alpha, rho, lo, b)


@njit(cache=True)
def root_any(a, lam, alpha, rho, lo, hi):
    """Stationarity root on [lo, hi]: closed forms for rho in {0, 1/2, -1},
    safeguarded Newton otherwise. All routes agree with plain bisection to
    its 1e-12 relative tolerance."""
    if abs(rho) < RHO_ZERO_TOL:
        return _kappa_log_scalar(a, lam, alpha)
    if abs(rho - 0.5) < 1e-9:
        return _kappa_lfr_scalar(a, lam, alpha)
    if abs(rho + 1.0) < 1e-9:
        return _kappa_kep_scalar(a, lam, alpha)
    return _newton_root(a, lam, alpha, rho, lo, hi)


@njit(cache=True)
def case2_sstar(lam, alpha, rho):
    """Stationary point of the threshold gap: solves 1 + lam*alpha^2*phi''(alpha*s) = 0.

    Valid when lam*alpha^2 > 1 (the nonconvex regime).
    """
    la2 = lam * alpha * alpha
    if abs(rho - 1.0) < RHO_ONE_TOL:
        return math.log(la2) / alpha
    t = 1.0 - rho
    return (math.exp((t / (2.0 - rho)) * math.log(la2)) - 1.0) / (alpha * t)


@njit(cache=True)
def threshold_scalar(z, lam, alpha, rho):
    """Global minimizer of 0.5*(z-b)^2 + lam*phi(alpha*|b|).

    In the nonconvex regime the candidate root is kept only when it beats
    b = 0 on the objective; ties go to 0.
    """
    a = abs(z)
    if a == 0.0:
        return 0.0
    sign = 1.0 if z > 0.0 else -1.0
    if lam * alpha * alpha <= 1.0:
        if a <= lam * alpha:
            return 0.0
        return sign * root_any(a, lam, alpha, rho, 0.0, a)
    s_star = case2_sstar(lam, alpha, rho)
    if a <= s_star + lam * alpha * phi_prime_scalar(rho, alpha * s_star):
        return 0.0
    root = root_any(a, lam, alpha, rho, s_star, a)
    j_root = 0.5 * (a - root) * (a - root) + lam * phi_scalar(rho, alpha * root)
    if j_root < 0.5 * a * a:
        return sign * root
    return 0.0


@njit(cache=True)
def soft_threshold_scalar(z, eta):
    if z > eta:
        return z - eta
    if z < -eta:
        return z + eta
    return 0.0


@njit(cache=True)
def mcp_threshold_scalar(z, lam, alpha):
    """Exact minimizer of 0.5*(z-b)^2 + lam*M(alpha*|b|); ties go to 0."""
    a = abs(z)
    if a == 0.0:
        return 0.0
    sign = 1.0 if z > 0.0 else -1.0
    gamma = lam * alpha * alpha
    if gamma < 1.0:
        if a <= lam * alpha:
            return 0.0
        if a < 1.0 / alpha:
            return sign * (a - lam * alpha) / (1.0 - gamma)
        return z
    if a > math.sqrt(lam):
        return z
    return 0.0


@njit(cache=True)
def threshold_any(z, lam, alpha, family, rho):
    if family == FAMILY_L1:
        return soft_threshold_scalar(z, lam)
    if family == FAMILY_MCP:
        return mcp_threshold_scalar(z, lam, alpha)
    return threshold_scalar(z, lam, alpha, rho)


@njit(cache=True)
def cd_sweep_kernel(X, r, b, lam, alpha, family, rho):
    """One cyclic coordinate pass for the squared loss.

    Columns of X must have unit length; r = y - X @ b is updated in place
    alongside b. Returns the largest absolute coefficient change.
    """
    n, p = X.shape
    max_change = 0.0
    for j in range(p):
        zj = b[j]
        for i in range(n):
            zj += X[i, j] * r[i]
        new = threshold_any(zj, lam, alpha, family, rho)
        d = new - b[j]
        if d != 0.0:
            for i in range(n):
                r[i] -= X[i, j] * d
            b[j] = new
            if abs(d) > max_change:
                max_change = abs(d)
    return max_change


@njit(cache=True)
def cd_solve_cell(X, r, b, lam, alpha, family, rho, tol, max_sweeps):
    """Sweep until the largest coefficient change drops to tol.

    Returns (sweeps, converged_flag).
    """
    sweeps = 0
    while sweeps < max_sweeps:
        change = cd_sweep_kernel(X, r, b, lam, alpha, family, rho)
        sweeps += 1
        if change <= tol:
            return sweeps, 1
    return sweeps, 0


@njit(cache=True)
def palm_epoch_kernel(X, y, b, state, nus, lam, alpha, family, rho, loss, delta):
    """One cyclic pass of prox-linear coordinate steps.

    state is the residual y - X @ b for squared/huber losses and the margin
    y * (X @ b) for the logistic loss; it is updated in place. Returns
    (max coefficient change, squared l2 norm of the epoch's change).
    """
    n, p = X.shape
    max_change = 0.0
    sq_change = 0.0
    for j in range(p):
        g = 0.0
        if loss == LOSS_SQUARED:
            for i in range(n):
                g -= X[i, j] * state[i]
        elif loss == LOSS_LOGISTIC:
            for i in range(n):
                m = state[i]
                if m > 0.0:
                    e = math.exp(-m)
                    w = e / (1.0 + e)
                else:
                    w = 1.0 / (1.0 + math.exp(m))
                g -= X[i, j] * y[i] * w
        else:
            for i in range(n):
                ri = state[i]
                if ri > delta:
                    ri = delta
                elif ri < -delta:
                    ri = -delta
                g -= X[i, j] * ri
        nu = nus[j]
        new = threshold_any(b[j] - g / nu, lam / nu, alpha, family, rho)
        d = new - b[j]
        if d != 0.0:
            if loss == LOSS_LOGISTIC:
                for i in range(n):
                    state[i] += y[i] * X[i, j] * d
            else:
                for i in range(n):
                    state[i] -= X[i, j] * d
            b[j] = new
            sq_change += d * d
            if abs(d) > max_change:
                max_change = abs(d)
    return max_change, sq_change
