"""Closed-form and semi-closed-form performance expressions.

Everything here evaluates the statistics implied by the decoupled
stage-wise selection variants (see the selection module): order
statistics of independent exponential gains pushed through the SINR
formulas.  Ergodic rates follow from

    rate = (1/ln 2) * integral_0^upper (1 - F(x)) / (1 + x) dx,

with F the SINR distribution; far-user SINRs are bounded by a2/a1, so
their integrals stop there.  Alternating binomial sums are accumulated
with math.fsum (error-free transformation), which keeps deep outage
floors accurate despite cancellation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.integrate import quad

from .config import SystemParams, mean_gains

LN2 = math.log(2.0)
EULER_GAMMA = 0.5772156649015329

_MAX_SAFE_ANTENNAS = 16
_SINGULAR_TOL = 1e-6
_PROB_TOL = 1e-12


class NonConvergedError(RuntimeError):
    """Quadrature failed to meet the requested tolerance within budget."""

    code = "NON_CONVERGED"


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_bound: float
    evaluations: int


def _scaled_e1(t: float) -> float:
    """exp(t) * E1(t) for t > 0; E1 is the upper exponential integral.

    Series below 1, modified-Lentz continued fraction above.  The scaled
    form never overflows, which matters because the rate kernels evaluate
    it at ratios that can be enormous when interference vanishes.
    """
    if not t > 0.0:
        raise ValueError(f"need t > 0, got {t!r}")
    if math.isinf(t):
        return 0.0
    if t < 1.0:
        # E1(t) = -gamma - ln t + sum_{k>=1} (-1)^(k+1) t^k / (k k!)
        terms = [-EULER_GAMMA - math.log(t)]
        power = 1.0
        for k in range(1, 60):
            power *= t / k
            term = power / k if k % 2 else -power / k
            terms.append(term)
            if power / k < 1e-20:
                break
        return math.exp(t) * math.fsum(terms)
    # E1(t) = e^-t / (t+1 - 1^2/(t+3 - 2^2/(t+5 - ...)))
    tiny = 1e-300
    b = t + 1.0
    f = b if b != 0.0 else tiny
    c = f
    d = 0.0
    for n in range(1, 500):
        a = -float(n * n)
        b += 2.0
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return 1.0 / f
    raise NonConvergedError(f"continued fraction for E1({t}) did not converge")


def exp_int_ei(x: float) -> float:
    """Exponential integral Ei(x), defined for x < 0 only."""
    if not x < 0.0:
        raise ValueError(f"EI_DOMAIN_INVALID: need x < 0, got {x!r}")
    t = -x
    return -math.exp(-t) * _scaled_e1(t)


def _rate_kernel(alpha: float, beta: float, singular_tol: float = _SINGULAR_TOL) -> float:
    """integral_0^inf exp(-beta x) / ((1+x)(1+alpha x)) dx, alpha >= 0, beta > 0.

    Closed form (g(t) = exp(t) E1(t)):

        alpha = 0:      g(beta)
        alpha != 1:     (g(beta/alpha) - g(beta)) / (alpha - 1)

    alpha = 1 is a removable singularity; within singular_tol of it the
    kernel falls back to adaptive quadrature instead of the closed form.
    """
    if alpha == 0.0:
        return _scaled_e1(beta)
    if abs(alpha - 1.0) < singular_tol:
        value, _ = quad(
            lambda x: math.exp(-beta * x) / ((1.0 + x) * (1.0 + alpha * x)),
            0.0,
            math.inf,
            epsabs=1e-13,
            epsrel=1e-11,
            limit=200,
        )
        return value
    return (_scaled_e1(beta / alpha) - _scaled_e1(beta)) / (alpha - 1.0)


def _warn_counts(params: SystemParams) -> None:
    worst = max(params.m_b, params.m_r, params.m_t)
    if worst > _MAX_SAFE_ANTENNAS:
        warnings.warn(
            f"antenna count {worst} > {_MAX_SAFE_ANTENNAS}: alternating binomial "
            "sums lose precision to combinatorial cancellation",
            RuntimeWarning,
            stacklevel=3,
        )


def _clamp_probability(raw: float) -> float:
    if raw < -_PROB_TOL or raw > 1.0 + _PROB_TOL:
        raise RuntimeError(f"CDF_RANGE_VIOLATION: raw probability {raw!r}")
    return min(max(raw, 0.0), 1.0)


def sinr_cap(params: SystemParams) -> float:
    """Supremum a2/a1 of every far-user-symbol SINR."""
    return params.a2 / params.a1


# Survival functions P(component SINR > x).  The _s1 family describes the
# near-user-first decoupled selection, the _s2 family the far-user
# decoupled selection.  All take 0 <= x < a2/a1 where the SINR is capped.

def _ratio(x: float, params: SystemParams) -> float:
    den = params.a2 - params.a1 * x
    if den <= 0.0:
        return math.inf
    return x / den


def _sf_cross_s1(x: float, params: SystemParams, lam_su1: float, lam_ru1: float) -> float:
    r = _ratio(x, params)
    if math.isinf(r):
        return 0.0
    m_b, m_t = params.m_b, params.m_t
    terms = [
        (-1.0) ** p
        * math.comb(m_b - 1, p)
        * math.exp(-(p + 1) * r / lam_su1)
        / ((p + 1) * (1.0 + lam_ru1 * (p + 1) * r / (m_t * lam_su1)))
        for p in range(m_b)
    ]
    return m_b * math.fsum(terms)


def _sf_relay_s1(x: float, params: SystemParams, lam_br: float, lam_si: float) -> float:
    r = _ratio(x, params)
    if math.isinf(r):
        return 0.0
    m_r = params.m_r
    terms = [
        (-1.0) ** q
        * math.comb(m_r - 1, q)
        * math.exp(-(q + 1) * r / lam_br)
        / ((q + 1) * (1.0 + lam_si * (q + 1) * r / lam_br))
        for q in range(m_r)
    ]
    return m_r * math.fsum(terms)


def _sf_cross_s2(x: float, params: SystemParams, lam_su1: float, lam_ru1: float) -> float:
    r = _ratio(x, params)
    if math.isinf(r):
        return 0.0
    return math.exp(-r / lam_su1) / (1.0 + lam_ru1 * r / lam_su1)


def _sf_relay_s2(x: float, params: SystemParams, lam_br: float, lam_si: float) -> float:
    r = _ratio(x, params)
    if math.isinf(r):
        return 0.0
    m_b, m_r = params.m_b, params.m_r
    terms = [
        (-1.0) ** p
        * math.comb(m_b - 1, p)
        * math.exp(-(p + 1) * r / lam_br)
        / ((p + 1) * (1.0 + lam_si * (p + 1) * r / (m_r * lam_br)))
        for p in range(m_b)
    ]
    return m_b * math.fsum(terms)


def _sf_far_s1(x: float, lam_ru2: float) -> float:
    return math.exp(-x / lam_ru2)


def _sf_far_s2(x: float, params: SystemParams, lam_ru2: float) -> float:
    m_t = params.m_t
    terms = [
        (-1.0) ** q * math.comb(m_t - 1, q) * math.exp(-(q + 1) * x / lam_ru2) / (q + 1)
        for q in range(m_t)
    ]
    return m_t * math.fsum(terms)


def cdf_gamma1_max_u1(x: float, params: SystemParams) -> float:
    """Distribution of the near-user SINR under near-user-first selection.

    Strongest of m_b direct gains over 1 plus the weakest of m_t
    interfering gains.
    """
    if x <= 0.0:
        return 0.0
    _warn_counts(params)
    g = mean_gains(params)
    m_b, m_t = params.m_b, params.m_t
    scale = params.a1 * g.lam_su1
    terms = [
        (-1.0) ** p
        * math.comb(m_b - 1, p)
        * math.exp(-(p + 1) * x / scale)
        / ((p + 1) * (1.0 + (p + 1) * g.lam_ru1 * x / (m_t * scale)))
        for p in range(m_b)
    ]
    return _clamp_probability(1.0 - m_b * math.fsum(terms))


def cdf_gamma1_max_u2(x: float, params: SystemParams) -> float:
    """Distribution of the near-user SINR under far-user selection.

    No selection gain reaches the near-user links, so both gains are
    plain exponentials.
    """
    if x <= 0.0:
        return 0.0
    g = mean_gains(params)
    scale = params.a1 * g.lam_su1
    return _clamp_probability(1.0 - math.exp(-x / scale) / (1.0 + g.lam_ru1 * x / scale))


def cdf_gamma2_max_u1(x: float, params: SystemParams) -> float:
    """Distribution of the far-user e2e SINR under near-user-first selection."""
    if x <= 0.0:
        return 0.0
    if x >= sinr_cap(params):
        return 1.0
    _warn_counts(params)
    g = mean_gains(params)
    survival = (
        _sf_cross_s1(x, params, g.lam_su1, g.lam_ru1)
        * _sf_relay_s1(x, params, g.lam_br, g.lam_si)
        * _sf_far_s1(x, g.lam_ru2)
    )
    return _clamp_probability(1.0 - survival)


def cdf_gamma2_max_u2(x: float, params: SystemParams) -> float:
    """Distribution of the far-user e2e SINR under far-user decoupled selection."""
    if x <= 0.0:
        return 0.0
    if x >= sinr_cap(params):
        return 1.0
    _warn_counts(params)
    g = mean_gains(params)
    survival = (
        _sf_cross_s2(x, params, g.lam_su1, g.lam_ru1)
        * _sf_relay_s2(x, params, g.lam_br, g.lam_si)
        * _sf_far_s2(x, params, g.lam_ru2)
    )
    return _clamp_probability(1.0 - survival)


def rate_from_cdf(
    cdf,
    upper: float = math.inf,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-9,
    limit: int = 200,
) -> QuadratureResult:
    """Ergodic rate (1/ln 2) * integral_0^upper (1 - F(x)) / (1 + x) dx.

    Requires F nondecreasing on [0, upper] and F = 1 beyond.  Finite
    domains are truncated a hair inside the endpoint, where the
    integrand has already decayed to zero.
    """
    hi = upper if math.isinf(upper) else upper * (1.0 - 1e-12)

    def integrand(x: float) -> float:
        return (1.0 - cdf(x)) / (1.0 + x)

    value, abserr, info = quad(
        integrand,
        0.0,
        hi,
        epsabs=abs_tol * LN2,
        epsrel=rel_tol,
        limit=limit,
        full_output=True,
    )[:3]
    rate = value / LN2
    bound = abserr / LN2
    if bound > max(abs_tol, rel_tol * abs(rate)):
        raise NonConvergedError(
            f"quadrature error bound {bound:.3e} exceeds tolerance "
            f"(abs {abs_tol:.1e}, rel {rel_tol:.1e}) after {info['neval']} evaluations"
        )
    return QuadratureResult(value=rate, abs_error_bound=bound, evaluations=int(info["neval"]))


def rate_u1_max_u1(params: SystemParams) -> float:
    """Near-user ergodic rate under near-user-first selection (closed form).

    Termwise integration of the survival of cdf_gamma1_max_u1 through the
    rate kernel; terms near the kernel's removable singularity fall back
    to quadrature.
    """
    _warn_counts(params)
    g = mean_gains(params)
    m_b, m_t = params.m_b, params.m_t
    scale = params.a1 * g.lam_su1
    terms = []
    for p in range(m_b):
        alpha = (p + 1) * g.lam_ru1 / (m_t * scale)
        beta = (p + 1) / scale
        coeff = (-1.0) ** p * math.comb(m_b - 1, p) / (p + 1)
        terms.append(coeff * _rate_kernel(alpha, beta))
    return m_b * math.fsum(terms) / LN2


def rate_u1_max_u2(params: SystemParams) -> float:
    """Near-user ergodic rate under far-user selection (closed form).

    Single-exponential links on both sides; coincides with the near-user
    rate of a fully random antenna pair.
    """
    g = mean_gains(params)
    scale = params.a1 * g.lam_su1
    return _rate_kernel(g.lam_ru1 / scale, 1.0 / scale) / LN2


def rate_u2_max_u1(
    params: SystemParams, rel_tol: float = 1e-8, abs_tol: float = 1e-9
) -> QuadratureResult:
    """Far-user ergodic rate under near-user-first selection (quadrature)."""
    return rate_from_cdf(
        lambda x: cdf_gamma2_max_u1(x, params),
        upper=sinr_cap(params),
        rel_tol=rel_tol,
        abs_tol=abs_tol,
    )


def rate_u2_max_u2(
    params: SystemParams, rel_tol: float = 1e-8, abs_tol: float = 1e-9
) -> QuadratureResult:
    """Far-user ergodic rate under far-user decoupled selection (quadrature)."""
    return rate_from_cdf(
        lambda x: cdf_gamma2_max_u2(x, params),
        upper=sinr_cap(params),
        rel_tol=rel_tol,
        abs_tol=abs_tol,
    )


def thresholds(params: SystemParams) -> tuple[float, float]:
    """SINR thresholds 2^rate - 1 for the two target rates."""
    return math.expm1(params.rate1 * LN2), math.expm1(params.rate2 * LN2)


def zeta(params: SystemParams) -> float:
    """Combined near-user outage threshold.

    The near user is in outage unless its cross-decoding SINR clears the
    far-user threshold and its own SINR clears its own threshold; both
    events reduce to one threshold on the shared ratio
    X = g_su1 / (g_ru1 + 1).  Infinite when the far-user threshold hits
    the a2/a1 cap (outage is then certain).
    """
    theta1, theta2 = thresholds(params)
    if theta2 >= sinr_cap(params):
        return math.inf
    return max(theta2 / (params.a2 - params.a1 * theta2), theta1 / params.a1)


def outage_u1_max_u1(params: SystemParams) -> float:
    """Near-user outage under near-user-first selection."""
    z = zeta(params)
    if math.isinf(z):
        return 1.0
    return cdf_gamma1_max_u1(params.a1 * z, params)


def outage_u1_max_u2(params: SystemParams) -> float:
    """Near-user outage under far-user selection."""
    z = zeta(params)
    if math.isinf(z):
        return 1.0
    return cdf_gamma1_max_u2(params.a1 * z, params)


def outage_u2_max_u1(params: SystemParams) -> float:
    """Far-user outage under near-user-first selection.

    The relay must decode the far-user symbol and the far user must
    decode it from the relay; the near-user leg does not appear.
    """
    _, theta2 = thresholds(params)
    if theta2 >= sinr_cap(params):
        return 1.0
    _warn_counts(params)
    g = mean_gains(params)
    survival = _sf_relay_s1(theta2, params, g.lam_br, g.lam_si) * _sf_far_s1(theta2, g.lam_ru2)
    return _clamp_probability(1.0 - survival)


def outage_u2_max_u2(params: SystemParams) -> float:
    """Far-user outage under far-user decoupled selection."""
    _, theta2 = thresholds(params)
    if theta2 >= sinr_cap(params):
        return 1.0
    _warn_counts(params)
    g = mean_gains(params)
    survival = _sf_relay_s2(theta2, params, g.lam_br, g.lam_si) * _sf_far_s2(
        theta2, params, g.lam_ru2
    )
    return _clamp_probability(1.0 - survival)
