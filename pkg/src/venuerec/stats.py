"""Student-t tail probabilities without a scipy dependency.

Only the pieces the evaluator needs: the regularized incomplete beta
function and the two-sided p-value of a t statistic.  The continued
fraction follows the classic modified-Lentz scheme.
"""

import math

from .errors import VenuerecError

_MAX_ITER = 300
_EPS = 3e-15
_TINY = 1e-300


def _beta_cf(a, b, x):
    # Continued fraction for the incomplete beta, evaluated by modified
    # Lentz.  Converges fast for x < (a + 1) / (a + b + 2); betainc_reg
    # flips to the mirrored argument otherwise.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _EPS:
            return h
    raise VenuerecError(
        "incomplete beta continued fraction did not converge "
        "(a=%r, b=%r, x=%r)" % (a, b, x)
    )


def betainc_reg(a, b, x):
    """Regularized incomplete beta function I_x(a, b).

    `a` and `b` must be positive; `x` outside [0, 1] is clamped to the
    trivial endpoint values.
    """
    if a <= 0.0 or b <= 0.0:
        raise VenuerecError("betainc_reg requires a > 0 and b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t, df):
    """P(|T| >= |t|) for a Student-t variable with `df` degrees of freedom."""
    if df < 1:
        raise VenuerecError("degrees of freedom must be >= 1, got %r" % (df,))
    if math.isnan(t):
        raise VenuerecError("t statistic is NaN")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    tt = t * t
    # Pick the argument form that avoids rounding the tail away: for
    # small t the ratio df / (df + t*t) collapses to 1.0 exactly.
    if tt < df:
        return 1.0 - betainc_reg(0.5, 0.5 * df, tt / (df + tt))
    return betainc_reg(0.5 * df, 0.5, df / (df + tt))
