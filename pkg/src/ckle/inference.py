"""Asymptotic inference for minimum cumulative-KL estimates.

Scalar estimates are asymptotically normal with variance A/B^2, where
A = Var[ds(X)/dtheta] and B integrates (dF/dtheta)^2/F over the negative
axis plus (dSF/dtheta)^2/SF over the nonnegative axis; the vector version is
B^-1 A B^-1 / n.  The data-driven counterpart is the sandwich
V = I^-1 J I^-1 / n with J the average outer product of psi and I the
average derivative of psi.

Note on the sign of I: at a minimum the average derivative of psi equals the
empirical Hessian of g and is positive definite, so I is taken with the plus
sign here; the sign squares away inside the sandwich either way.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc, ndtri

from .empirical import Sample, build_sample
from .errors import CkleError, DomainError, InferenceError
from .models import Family, get_family
from .objective import g_hessian, g_objective, make_g, psi_matrix, _steps
from .rng import make_rng
from .solver import FitResult, bisect_root, fit


def _family(f) -> Family:
    return get_family(f) if isinstance(f, str) else f


# ---------------------------------------------------------------- chi-square

def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError("quantile requires 0 < p < 1")
    return float(ndtri(p))


def chi2_quantile_df1(q: float) -> float:
    """q-quantile of chi-square with 1 df, via the normal quantile:
    (Phi^-1((1+q)/2))^2."""
    if not 0.0 < q < 1.0:
        raise DomainError("quantile requires 0 < q < 1")
    return float(ndtri((1.0 + q) / 2.0)) ** 2


def chi2_sf_df1(t: float) -> float:
    """P(chi-square_1 > t)."""
    if t <= 0.0:
        return 1.0
    return float(erfc(math.sqrt(t / 2.0)))


# ---------------------------------------------------------- variance limits

@dataclass(frozen=True)
class AsymptoticVariance:
    A: np.ndarray
    B: np.ndarray
    V_n: np.ndarray | None          # B^-1 A B^-1 / n when n was supplied
    sigma2: float | None            # scalar case A/B^2
    source: str                     # closed-form | quadrature | sandwich


@dataclass(frozen=True)
class SandwichEstimate:
    J: np.ndarray
    I: np.ndarray
    V_hat: np.ndarray


def _avar_quadrature(family: Family, theta) -> tuple[np.ndarray, np.ndarray]:
    """A and B by numerical integration; the independent cross-check path."""
    family = _family(family)
    theta = family.validate(theta)
    k = theta.size
    lower = family.support_lower(theta)
    if family.name == "twoparamexp" and theta[0] < 0:
        # (dF/dmu)^2/F ~ 1/(x - mu) at the support start: log-divergent
        raise InferenceError("variance integral diverges")

    def b_entry(j, l):
        def integrand(x, side):
            d = family.dcdf_dtheta(theta, x)
            dj, dl = float(d[j]), float(d[l])
            if dj == 0.0 or dl == 0.0:
                return 0.0
            lf = float(family.log_cdf(theta, x) if side == "neg"
                       else family.log_sf(theta, x))
            sign = math.copysign(1.0, dj) * math.copysign(1.0, dl)
            return sign * math.exp(math.log(abs(dj)) + math.log(abs(dl)) - lf)

        total = 0.0
        if lower < 0:
            total += quad(integrand, -np.inf, 0.0, args=("neg",),
                          epsabs=1e-13, epsrel=1e-10, limit=400)[0]
        start = max(lower, 0.0)
        total += quad(integrand, start, np.inf, args=("pos",),
                      epsabs=1e-13, epsrel=1e-10, limit=400)[0]
        return total

    B = np.empty((k, k))
    for j in range(k):
        for l in range(j, k):
            B[j, l] = B[l, j] = b_entry(j, l)
    if not np.all(np.isfinite(B)) or abs(np.linalg.det(B)) < 1e-300:
        raise InferenceError("variance integral diverges")

    if family.ds_dtheta_matrix(theta, np.array([max(lower, 0.0) + 1.0])) is not None:
        ds_fn = lambda x: family.ds_dtheta_matrix(theta, np.array([x]))[0]
    else:
        steps = _steps(family, theta, 1e-5)

        def ds_fn(x):
            xs = np.array([x])
            out = np.empty(k)
            for j in range(k):
                tp = theta.copy(); tp[j] += steps[j]
                tm = theta.copy(); tm[j] -= steps[j]
                out[j] = (family.s_values(tp, xs)[0] - family.s_values(tm, xs)[0]) / (2 * steps[j])
            return out

    def a_entry(j, l):
        def integrand(x):
            ds = ds_fn(x)
            return ds[j] * ds[l] * float(family.pdf(theta, x))

        total = 0.0
        if lower < 0:
            total += quad(integrand, -np.inf, 0.0, epsabs=1e-13, epsrel=1e-10, limit=400)[0]
        total += quad(integrand, max(lower, 0.0), np.inf,
                      epsabs=1e-13, epsrel=1e-10, limit=400)[0]
        return total

    E = np.empty((k, k))
    for j in range(k):
        for l in range(j, k):
            E[j, l] = E[l, j] = a_entry(j, l)
    mag = family.mean_abs_grad(theta)
    A = E - np.outer(mag, mag)
    return A, B


def avar_scalar(family, theta, method: str = "auto") -> AsymptoticVariance:
    """Asymptotic variance for the one-parameter families.

    Closed forms: 5*lambda^2/4 for the exponential and 5*theta^2/4 for the
    centered double exponential (whose |X| is exponential, inheriting the
    same constant).  ``method='quadrature'`` forces the integral path.
    """
    family = _family(family)
    theta = family.validate(theta)
    if family.dim != 1:
        raise DomainError("avar_scalar expects a one-parameter family")
    if method == "auto":
        method = "closed" if family.name in ("exponential", "laplace") else "quadrature"
    if method == "closed":
        v = theta[0]
        if family.name == "exponential":
            A = np.array([[5.0 / v**4]])
            B = np.array([[2.0 / v**3]])
        elif family.name == "laplace":
            A = np.array([[5.0]])
            B = np.array([[2.0 / v]])
        else:
            raise DomainError(f"no closed-form variance for {family.name}")
        return AsymptoticVariance(A, B, None, float(A[0, 0] / B[0, 0] ** 2), "closed-form")
    A, B = _avar_quadrature(family, theta)
    return AsymptoticVariance(A, B, None, float(A[0, 0] / B[0, 0] ** 2), "quadrature")


def avar_matrix(family, theta, n: int) -> AsymptoticVariance:
    """Asymptotic covariance V_n for the two-parameter families."""
    family = _family(family)
    theta = family.validate(theta)
    if family.dim < 2:
        raise DomainError("avar_matrix expects a vector family")
    if n < 1:
        raise DomainError("n must be >= 1")
    if family.name == "twoparamexp":
        mu, sig = theta
        if mu < 0:
            raise InferenceError("variance integral diverges")
        A = np.array([[1.0, 2.0], [2.0, 5.0]])
        B = np.array([[1.0, 1.0], [1.0, 2.0]]) / sig
        V = sig**2 * np.array([[1.0, -1.0], [-1.0, 2.0]]) / n
        return AsymptoticVariance(A, B, V, None, "closed-form")
    if family.name == "pareto":
        a, b = theta
        if a <= 2.0:
            raise InferenceError("asymptotic variance undefined")
        V = (np.array([[2.0 * a * (a - 1.0) ** 4, a * b * (a - 1.0) ** 2],
                       [a * b * (a - 1.0) ** 2, b**2 / a * (a * a - 2.0 * a + 2.0)]])
             / (n * (a - 2.0) ** 3))
        B = np.array([[2.0 * b / (a - 1.0) ** 3, -a / (a - 1.0) ** 2],
                      [-a / (a - 1.0) ** 2, a * a / (b * (a - 1.0))]])
        A = B @ (n * V) @ B
        return AsymptoticVariance(A, B, V, None, "closed-form")
    A, B = _avar_quadrature(family, theta)
    Binv = np.linalg.inv(B)
    V = Binv @ A @ Binv / n
    return AsymptoticVariance(A, B, (V + V.T) / 2.0, None, "quadrature")


def sandwich(family, fit_result: FitResult, sample: Sample,
             rel_step: float = 1e-5) -> SandwichEstimate:
    """Sample ('sandwich') covariance V = I^-1 J I^-1 / n at the fitted point;
    attaches V to ``fit_result.covariance``."""
    family = _family(family)
    if not fit_result.converged:
        raise InferenceError("sandwich requires a converged fit")
    theta = np.asarray(fit_result.params.values, dtype=float)
    n = sample.n
    k = theta.size
    Psi = psi_matrix(family, theta, sample)
    J = Psi.T @ Psi / n
    steps = _steps(family, theta, rel_step)
    I = np.empty((k, k))
    for j in range(k):
        tp = theta.copy(); tp[j] += steps[j]
        tm = theta.copy(); tm[j] -= steps[j]
        I[:, j] = (psi_matrix(family, tp, sample) - psi_matrix(family, tm, sample)
                   ).mean(axis=0) / (2 * steps[j])
    I = (I + I.T) / 2.0
    if not np.all(np.isfinite(I)) or np.linalg.cond(I) > 1e12:
        raise InferenceError("objective locally flat")
    Iinv = np.linalg.inv(I)
    V = Iinv @ J @ Iinv / n
    V = (V + V.T) / 2.0
    fit_result.covariance = V
    return SandwichEstimate(J=J, I=I, V_hat=V)


# ----------------------------------------------------------------- intervals

@dataclass(frozen=True)
class IntervalResult:
    lower: float
    upper: float
    level: float
    kind: str                      # wald | divergence
    cutoff_k: float | None = None
    c_theta: float | None = None
    boundary: str | None = None    # side that hit the domain edge, if any


def wald_ci(fit_result: FitResult, variance, level: float) -> IntervalResult:
    """theta_hat -+ z_{alpha/2} sigma_hat / sqrt(n) for a scalar parameter."""
    if not 0.0 < level < 1.0:
        raise DomainError("level must be in (0, 1)")
    if isinstance(variance, AsymptoticVariance):
        variance = variance.sigma2
    if variance is None or variance <= 0:
        raise InferenceError("nonpositive variance")
    if len(fit_result.params.values) != 1:
        raise DomainError("wald_ci expects a scalar parameter")
    theta = fit_result.params.values[0]
    z = normal_quantile((1.0 + level) / 2.0)
    half = z * math.sqrt(variance) / math.sqrt(fit_result.n)
    return IntervalResult(theta - half, theta + half, level, "wald")


def c_value(family, sample: Sample, theta) -> float:
    """c(theta) = sigma_F^2(theta) * g''(theta), the scale constant of the
    chi-square limits; closed form for the two scalar families."""
    family = _family(family)
    theta = family.validate(theta)
    if family.name == "exponential":
        return 5.0 / (2.0 * theta[0])
    if family.name == "laplace":
        return 5.0 * sample.mean_sq / (4.0 * theta[0])
    sigma2 = avar_scalar(family, theta, method="quadrature").sigma2
    hess = g_hessian(family, theta, sample)[0, 0]
    if hess <= 0:
        raise InferenceError("objective curvature not positive")
    return sigma2 * hess


def divergence_interval(family, sample: Sample, fit_result: FitResult,
                        level: float) -> IntervalResult:
    """Parameter set with normalized divergence above the cutoff
    k = exp(-c(theta_hat) chi2_{alpha,1} / (2n)); closed interval for the
    exponential, level-crossing bisection on each side otherwise."""
    family = _family(family)
    if not 0.0 < level < 1.0:
        raise DomainError("level must be in (0, 1)")
    if family.dim != 1:
        raise DomainError("divergence_interval expects a scalar parameter")
    if not fit_result.converged:
        raise InferenceError("divergence interval requires a converged fit")
    theta_hat = fit_result.params.values[0]
    n = sample.n
    c_hat = c_value(family, sample, (theta_hat,))
    chi2 = chi2_quantile_df1(level)
    log_k = -c_hat * chi2 / (2.0 * n)
    k_cut = math.exp(log_k)

    if family.name == "exponential":
        m = sample.mean_sq
        b = -log_k + math.sqrt(2.0 * m)
        disc = b * b - 2.0 * m
        root = math.sqrt(disc)
        return IntervalResult((b - root) / m, (b + root) / m, level,
                              "divergence", cutoff_k=k_cut, c_theta=c_hat)

    g = make_g(family, sample)
    target = g(np.array([theta_hat])) - log_k
    t_hat = float(family.to_internal((theta_hat,))[0])

    def crossing(direction: int):
        span = 0.5
        t_out = t_hat + direction * span
        for _ in range(100):
            val = g(family.from_internal([t_out])) - target
            if math.isfinite(val) and val > 0:
                root_t = bisect_root(
                    lambda t: g(family.from_internal([t])) - target,
                    *sorted((t_hat, t_out)), tol=1e-12)
                return float(family.from_internal([root_t])[0]), False
            span *= 2.0
            t_out = t_hat + direction * span
        edge = float(family.from_internal([t_out])[0])
        return edge, True

    lower, lo_edge = crossing(-1)
    upper, hi_edge = crossing(+1)
    boundary = ("lower" if lo_edge else None) or ("upper" if hi_edge else None)
    return IntervalResult(lower, upper, level, "divergence",
                          cutoff_k=k_cut, c_theta=c_hat, boundary=boundary)


def pivotal_q(family, sample: Sample, fit_result: FitResult, theta,
              sigma2: float | None = None) -> float:
    """Q(theta_hat, theta) = 2n [g(theta) - g(theta_hat)] / (sigma_F^2 g''(theta_hat));
    asymptotically chi-square with 1 df under the model."""
    family = _family(family)
    if family.dim != 1:
        raise DomainError("pivotal_q expects a scalar parameter")
    theta_hat = fit_result.params.values[0]
    n = sample.n
    if sigma2 is None:
        denom = c_value(family, sample, (theta_hat,))
    else:
        hess = g_hessian(family, (theta_hat,), sample)[0, 0]
        if hess <= 0:
            raise InferenceError("objective curvature not positive")
        denom = sigma2 * hess
    if denom <= 0:
        raise InferenceError("objective curvature not positive")
    num = 2.0 * n * (g_objective(family, theta, sample)
                     - g_objective(family, (theta_hat,), sample))
    return num / denom


# ------------------------------------------------------------------- testing

@dataclass(frozen=True)
class TestResult:
    statistic_gddt: float
    c_at_null: float
    critical_value: float
    p_value: float
    reject: bool
    alpha: float
    theta_hat: float
    theta_null: float
    region_mean_sq: tuple[float, float] | None = None


def gddt_test(family, sample: Sample, theta0, alpha: float) -> TestResult:
    """Divergence-difference test of a point null (or the minimizer over a
    finite null grid): statistic 2n [g(theta0_hat) - g(theta_hat)], limiting
    law c(theta0_hat) chi-square_1."""
    family = _family(family)
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must be in (0, 1)")
    if family.dim != 1:
        raise DomainError("gddt_test expects a scalar parameter")
    nulls = np.atleast_1d(np.asarray(theta0, dtype=float))
    for t0 in nulls:
        family.validate((t0,))
    fit_result = fit(family, sample)
    theta_hat = fit_result.params.values[0]
    n = sample.n
    g0_vals = [g_objective(family, (t0,), sample) for t0 in nulls]
    i0 = int(np.argmin(g0_vals))
    theta0_hat = float(nulls[i0])
    stat = 2.0 * n * (g0_vals[i0] - fit_result.g_at_opt)
    c0 = c_value(family, sample, (theta0_hat,))
    chi2 = chi2_quantile_df1(1.0 - alpha)
    critical = c0 * chi2
    p = chi2_sf_df1(max(stat, 0.0) / c0)
    region = None
    if family.name == "exponential":
        a = n * theta0_hat**2
        b = 2.0 * math.sqrt(2.0) * n * theta0_hat
        c = 2.0 * n - 2.5 * chi2
        disc = b * b - 4.0 * a * c
        root = math.sqrt(disc)
        t_lo = max((b - root) / (2.0 * a), 0.0)
        t_hi = (b + root) / (2.0 * a)
        region = (t_lo**2, t_hi**2)
    return TestResult(statistic_gddt=float(stat), c_at_null=float(c0),
                      critical_value=float(critical), p_value=float(p),
                      reject=bool(stat > critical), alpha=alpha,
                      theta_hat=float(theta_hat), theta_null=theta0_hat,
                      region_mean_sq=region)


def power_approx(family, sample: Sample, theta0, theta1, alpha: float,
                 n: int | None = None) -> float:
    """Tail approximation of the test power at the alternative theta1:
    P(chi2_1 > (2n [g(theta1) - g(theta0)] + c(theta0) chi2_{alpha,1}) / c(theta1))."""
    family = _family(family)
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must be in (0, 1)")
    n = sample.n if n is None else int(n)
    g0 = g_objective(family, (float(theta0),), sample)
    g1 = g_objective(family, (float(theta1),), sample)
    c0 = c_value(family, sample, (float(theta0),))
    c1 = c_value(family, sample, (float(theta1),))
    threshold = (2.0 * n * (g1 - g0) + c0 * chi2_quantile_df1(1.0 - alpha)) / c1
    return chi2_sf_df1(threshold)


@dataclass(frozen=True)
class SampleSizeResult:
    n_star: int
    n0: float
    g_theta0: float
    g_theta1: float
    c_theta0: float
    c_theta1: float
    chi2_alpha: float
    chi2_beta: float


def required_sample_size(family, sample: Sample, theta0, theta1,
                         alpha: float, beta: float) -> SampleSizeResult:
    """Smallest integer n with approximate power beta at theta1:
    n* = [n0] + 1 with n0 = (c1 chi2_{beta,1} - c0 chi2_{alpha,1}) / (2 [g1 - g0])."""
    family = _family(family)
    if not 0.0 < alpha < 1.0 or not 0.0 < beta < 1.0:
        raise DomainError("alpha and beta must be in (0, 1)")
    g0 = g_objective(family, (float(theta0),), sample)
    g1 = g_objective(family, (float(theta1),), sample)
    if g1 == g0:
        raise InferenceError("indistinguishable alternative")
    c0 = c_value(family, sample, (float(theta0),))
    c1 = c_value(family, sample, (float(theta1),))
    chi_a = chi2_quantile_df1(1.0 - alpha)
    chi_b = chi2_quantile_df1(1.0 - beta)
    n0 = (c1 * chi_b - c0 * chi_a) / (2.0 * (g1 - g0))
    if n0 <= 0:
        warnings.warn("requested power is reached at any sample size; returning 1")
        n_star = 1
    else:
        n_star = int(math.floor(n0)) + 1
    return SampleSizeResult(n_star=n_star, n0=float(n0), g_theta0=g0, g_theta1=g1,
                            c_theta0=c0, c_theta1=c1, chi2_alpha=chi_a, chi2_beta=chi_b)


# --------------------------------------------------- resampled region cutoffs

@dataclass(frozen=True)
class RegionCutoffs:
    levels: tuple[float, ...]
    cutoffs: tuple[float, ...]
    reps: int
    used: int
    failures: int


def divergence_region_cutoffs(family, theta_true, n: int, reps: int,
                              levels, seed: int) -> RegionCutoffs:
    """Empirical quantiles of g(theta_true) - g(theta_hat) over seeded
    replicate fits; these calibrate divergence-based confidence regions when
    the parameter has dimension above one."""
    family = _family(family)
    theta_true = family.validate(theta_true)
    if family.dim < 2:
        raise DomainError("region cutoffs apply to vector parameters")
    if reps < 100:
        raise DomainError("reps must be >= 100")
    levels = tuple(float(lv) for lv in levels)
    for lv in levels:
        if not 0.0 < lv < 1.0:
            raise DomainError("levels must be in (0, 1)")
    gaps = []
    failures = 0
    for r in range(reps):
        rng = make_rng(seed, r)
        xs = family.draw(theta_true, n, rng)
        try:
            sample = build_sample(xs)
            fres = fit(family, sample)
            if not fres.converged:
                raise InferenceError("fit did not converge")
            gaps.append(g_objective(family, theta_true, sample) - fres.g_at_opt)
        except CkleError:
            failures += 1
    if failures > 0.05 * reps:
        raise InferenceError(f"{failures} of {reps} replicate fits failed")
    gaps.sort()
    used = len(gaps)
    cutoffs = tuple(gaps[min(math.ceil(lv * used), used) - 1] for lv in levels)
    return RegionCutoffs(levels=levels, cutoffs=cutoffs, reps=reps,
                         used=used, failures=failures)
