"""The sample objective g, the estimating function psi, and their derivatives.

For a sample x_1..x_n and in-domain parameters theta,

    g(theta) = E_theta|X| - mean_i s(x_i; theta),

where s integrates the model's log-CDF on the negative axis and log-survival
on the nonnegative axis.  Minimizing g is equivalent to minimizing the
empirical cumulative KL divergence, since the divergence equals
C_n + g(theta) - mean|x| with both extra terms parameter-free.

Support violations (an observation where the model CDF vanishes on the
negative axis) make g = +inf; the sentinel keeps numeric minimizers total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import log_ndtr, ndtr

from .empirical import Sample, ecdf_eval, empirical_entropy_constant, esf_eval
from .errors import DomainError, SupportViolation
from .models import Family, get_family

_SQRT2PI = math.sqrt(2.0 * math.pi)


def _family(f) -> Family:
    return get_family(f) if isinstance(f, str) else f


@dataclass
class ObjectiveContext:
    """Cached pieces for repeated evaluations on one sample."""

    family: Family
    sample: Sample
    grad_rel_step: float = 1e-5
    hess_rel_step: float = 1e-4
    _s_sum: object = field(default=None, repr=False)

    def __post_init__(self):
        self.family = _family(self.family)
        if self.grad_rel_step <= 0 or self.hess_rel_step <= 0:
            raise DomainError("differentiation steps must be positive")
        self._s_sum = self.family.s_sum_fn(self.sample)

    def g(self, theta) -> float:
        theta = self.family.validate(theta)
        try:
            return self.family.mean_abs(theta) - self._s_sum(theta) / self.sample.n
        except SupportViolation:
            return math.inf

    def gradient(self, theta) -> np.ndarray:
        return _central_gradient(self.g, self.family, theta, self.grad_rel_step)

    def hessian(self, theta) -> np.ndarray:
        return _central_hessian(self.g, self.family, theta, self.hess_rel_step)


def make_g(family, sample: Sample):
    """theta -> g(theta) with per-sample precomputation done once."""
    return ObjectiveContext(family, sample).g


def g_objective(family, theta, sample: Sample) -> float:
    """g(theta) = E_theta|X| - mean(s); +inf on support violation."""
    family = _family(family)
    theta = family.validate(theta)
    try:
        return family.mean_abs(theta) - float(family.s_values(theta, sample.obs).sum()) / sample.n
    except SupportViolation:
        return math.inf


def ckl_divergence(family, theta, sample: Sample) -> float:
    """Empirical cumulative KL divergence at theta; nonnegative, +inf on
    support violation."""
    g = g_objective(family, theta, sample)
    if math.isinf(g):
        return math.inf
    return empirical_entropy_constant(sample) + g - sample.mean_abs


def _steps(family: Family, theta: np.ndarray, rel: float) -> np.ndarray:
    """Per-coordinate central-difference steps, shrunk to stay in the domain."""
    steps = rel * np.maximum(np.abs(theta), 1.0)
    for j in range(theta.size):
        while steps[j] >= 1e-12:
            ok = True
            for sgn in (1.0, -1.0):
                t = theta.copy()
                t[j] += sgn * steps[j]
                try:
                    family.validate(t)
                except DomainError:
                    ok = False
                    break
            if ok:
                break
            steps[j] /= 2.0
        if steps[j] < 1e-12:
            raise DomainError("boundary point: differentiation step underflow")
    return steps


def psi_matrix(family, theta, sample_or_xs, rel_step: float = 1e-5) -> np.ndarray:
    """Per-observation estimating function, shape (n, dim):
    psi(x, theta) = d E|X| / d theta - d s(x) / d theta.

    Analytic where the family has closed-form s-gradients; otherwise central
    differences of the vectorized s values.
    """
    family = _family(family)
    theta = family.validate(theta)
    xs = sample_or_xs.obs if isinstance(sample_or_xs, Sample) else np.asarray(sample_or_xs, float)
    ds = family.ds_dtheta_matrix(theta, xs)
    if ds is None:
        steps = _steps(family, theta, rel_step)
        cols = []
        for j in range(theta.size):
            tp = theta.copy(); tp[j] += steps[j]
            tm = theta.copy(); tm[j] -= steps[j]
            cols.append((family.s_values(tp, xs) - family.s_values(tm, xs)) / (2 * steps[j]))
        ds = np.column_stack(cols)
    return family.mean_abs_grad(theta)[None, :] - ds


def psi(family, theta, x) -> np.ndarray:
    """Estimating function at one observation."""
    return psi_matrix(family, theta, np.atleast_1d(float(x)))[0]


def gee_sum(family, theta, sample: Sample) -> np.ndarray:
    """Sum of psi over the sample; equals n times the gradient of g."""
    return psi_matrix(family, theta, sample).sum(axis=0)


def _central_gradient(g, family: Family, theta, rel_step: float) -> np.ndarray:
    theta = family.validate(theta)
    steps = _steps(family, theta, rel_step)
    grad = np.empty(theta.size)
    for j in range(theta.size):
        tp = theta.copy(); tp[j] += steps[j]
        tm = theta.copy(); tm[j] -= steps[j]
        grad[j] = (g(tp) - g(tm)) / (2 * steps[j])
    return grad


def _central_hessian(g, family: Family, theta, rel_step: float) -> np.ndarray:
    theta = family.validate(theta)
    steps = _steps(family, theta, rel_step)
    k = theta.size
    H = np.empty((k, k))
    g0 = g(theta)
    for j in range(k):
        tp = theta.copy(); tp[j] += steps[j]
        tm = theta.copy(); tm[j] -= steps[j]
        H[j, j] = (g(tp) - 2 * g0 + g(tm)) / steps[j] ** 2
        for l in range(j + 1, k):
            tpp = tp.copy(); tpp[l] += steps[l]
            tpm = tp.copy(); tpm[l] -= steps[l]
            tmp = tm.copy(); tmp[l] += steps[l]
            tmm = tm.copy(); tmm[l] -= steps[l]
            H[j, l] = H[l, j] = (g(tpp) - g(tpm) - g(tmp) + g(tmm)) / (4 * steps[j] * steps[l])
    return (H + H.T) / 2.0


def g_gradient(family, theta, sample: Sample, rel_step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of g with per-coordinate relative steps."""
    family = _family(family)
    return _central_gradient(make_g(family, sample), family, theta, rel_step)


def g_hessian(family, theta, sample: Sample, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of g, symmetrized as (H + H^T)/2."""
    family = _family(family)
    return _central_hessian(make_g(family, sample), family, theta, rel_step)


def _phi_over_cdf(z: np.ndarray) -> np.ndarray:
    # phi(z)/Phi(z), stable for z far in the left tail
    return np.exp(-0.5 * z * z - math.log(_SQRT2PI) - log_ndtr(z))


def normal_equation_residuals(sample: Sample, mu: float, sigma: float) -> dict[str, float]:
    """Residual diagnostics for the Gaussian estimating equations.

    ``eq_mu`` and ``eq_sigma`` are n times the partial derivatives of g in mu
    and sigma, written with the integrals of z*phi/Phi resolved per
    observation; ``eq_sigma_ecdf`` is the equivalent form that weights a
    single integral by the empirical CDF/SF, and equals eq_sigma/n.  All
    three vanish at the minimizer.
    """
    if sigma <= 0:
        raise DomainError("normal: parameter sigma must be positive")
    obs, n, k = sample.obs, sample.n, sample.k
    m = mu / sigma
    neg = obs[:k]
    pos = obs[k:]

    eq_mu = 2 * n * ndtr(m) - n + k * log_ndtr(-m) - (n - k) * log_ndtr(m)
    if k:
        eq_mu -= log_ndtr((neg - mu) / sigma).sum()
    if k < n:
        eq_mu += log_ndtr((mu - pos) / sigma).sum()

    def w_low(z):
        return z * _phi_over_cdf(np.asarray(z, float))

    def w_high(z):
        return z * _phi_over_cdf(-np.asarray(z, float))

    eq_sigma = 2 * n * math.exp(-0.5 * m * m) / _SQRT2PI
    for x in neg:
        eq_sigma += quad(w_low, (x - mu) / sigma, -m, epsabs=1e-12, epsrel=1e-10)[0]
    for x in pos:
        eq_sigma -= quad(w_high, -m, (x - mu) / sigma, epsabs=1e-12, epsrel=1e-10)[0]

    # single-integral form weighted by the empirical step functions, resolved
    # panel by panel between the knots where the step value is constant
    eq_ecdf = 2 * math.exp(-0.5 * m * m) / _SQRT2PI
    if k:
        knots = np.unique(np.concatenate(((neg - mu) / sigma, [-m])))
        for a, b in zip(knots[:-1], knots[1:]):
            fn_val = ecdf_eval(sample, mu + sigma * 0.5 * (a + b))
            eq_ecdf += fn_val * quad(w_low, a, b, epsabs=1e-12, epsrel=1e-10)[0]
    if k < n:
        knots = np.unique(np.concatenate(([-m], (pos - mu) / sigma)))
        for a, b in zip(knots[:-1], knots[1:]):
            sf_val = esf_eval(sample, mu + sigma * 0.5 * (a + b))
            eq_ecdf -= sf_val * quad(w_high, a, b, epsabs=1e-12, epsrel=1e-10)[0]
    return {"eq_mu": float(eq_mu), "eq_sigma": float(eq_sigma),
            "eq_sigma_ecdf": float(eq_ecdf)}
