"""Real-order incomplete-gamma machinery and the Whittaker-W family used by
the closed-form channel distributions.

The channel closed forms only ever need Whittaker W functions whose indices
satisfy ``lam == kappa + 1/2``.  For that one-parameter family the function
reduces exactly to an upper incomplete gamma of real (possibly negative)
order:

    integral_u^inf x**(-nu) * exp(-x) dx
        = u**(-nu/2) * exp(-u/2) * W(-nu/2, (1-nu)/2; u)
        = Gamma(1 - nu, u)

so everything funnels through ``upper_incomplete_gamma``.  The quadrature
routine ``tail_integral`` evaluates the left-hand side directly and serves
as the independent oracle for both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import DomainError, NumericsError, UnsupportedDomainError

_EULER_GAMMA = 0.5772156649015328606
_MAX_ITER = 600
_TINY = 1.0e-300
# Below this x the downward recurrence from a positive-order seed is stable
# for negative orders; at or above it the continued fraction converges fast
# and avoids the error growth (factor ~ x/|s| per step) of the recurrence.
_CF_SWITCH = 1.0
_EXP_OVERFLOW = 708.0
# Orders within this distance of an integer are evaluated at the integer
# itself: a recurrence seed landing within ~1e-9 of 0 or 1 makes the first
# downward step divide an almost fully cancelled numerator by that vanishing
# index.  Snapping perturbs the true value by O(tol * |ln x|), far below the
# accuracy floor of the surrounding routes.
_ORDER_SNAP_TOL = 1.0e-9


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"ln_gamma requires finite x > 0, got {x!r}")
    return math.lgamma(x)


def _lower_reg_series(s: float, x: float) -> float:
    """Regularized lower incomplete gamma P(s, x) by power series (x < s+1)."""
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            expo = -x + s * math.log(x) - math.lgamma(s)
            return total * math.exp(expo)
    raise NumericsError(f"P-series failed to converge for s={s}, x={x}")


def _upper_gamma_cf_log(s: float, x: float) -> float:
    """ln Gamma(s, x) by modified Lentz continued fraction.

    Valid for x > 0 and real s; efficient once x is not small, and for
    strongly negative s even at small x (the partial numerators shrink
    like n/|s|).  The classic fraction:
    Gamma(s,x) = exp(-x + s ln x) / (x+1-s - 1(1-s)/(x+3-s - ...)).
    Working on the log scale keeps results meaningful far past the
    overflow and underflow limits of the plain value.
    """
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0.0 else 1.0 / _TINY
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if d == 0.0:
            d = _TINY
        c = b + an / c
        if c == 0.0:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            if h <= 0.0:
                raise NumericsError(
                    f"continued fraction lost positivity for s={s}, x={x}")
            return -x + s * math.log(x) + math.log(h)
    raise NumericsError(
        f"continued fraction failed to converge for s={s}, x={x}")


def _upper_gamma_cf(s: float, x: float) -> float:
    lg = _upper_gamma_cf_log(s, x)
    if lg > _EXP_OVERFLOW:
        raise NumericsError(f"Gamma({s}, {x}) overflows double precision")
    return math.exp(lg)


def _e1_series(x: float) -> float:
    """Exponential integral E1(x) = Gamma(0, x), small-x series."""
    total = -_EULER_GAMMA - math.log(x)
    term = 1.0
    for k in range(1, _MAX_ITER):
        term *= -x / k
        contrib = -term / k
        total += contrib
        if abs(contrib) < abs(total) * 1e-17 + 1e-300:
            return total
    raise NumericsError(f"E1 series failed to converge for x={x}")


def _upper_gamma_positive_log(s: float, x: float) -> float:
    """ln Gamma(s, x) for s > 0."""
    if x >= s + 1.0:
        return _upper_gamma_cf_log(s, x)
    if s <= _ORDER_SNAP_TOL:
        # continuous limit Gamma(s,x) -> E1(x); the one-step recurrence
        # below would divide an O(s) numerator difference by s
        return math.log(_e1_series(x))
    if s < 0.5 and x < 1.0:
        # tiny positive order: the series route computes 1 - P with poor
        # relative accuracy; one downward step from the safe order s+1 is
        # accurate because the numerator difference is O(s) by design
        g1 = math.exp(_upper_gamma_positive_log(s + 1.0, x))
        val = (g1 - math.exp(s * math.log(x) - x)) / s
        if val <= 0.0:
            raise NumericsError(f"recurrence lost positivity for s={s}, x={x}")
        return math.log(val)
    p = _lower_reg_series(s, x)
    # Gamma(s,x) = Gamma(s) * (1 - P);  log form dodges overflow of Gamma(s)
    if p >= 1.0:
        raise NumericsError(f"series lost all precision for s={s}, x={x}")
    return math.lgamma(s) + math.log1p(-p)


def _upper_gamma_positive(s: float, x: float) -> float:
    lg = _upper_gamma_positive_log(s, x)
    if lg > _EXP_OVERFLOW:
        raise NumericsError(f"Gamma({s}, {x}) overflows double precision")
    return math.exp(lg)


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Upper incomplete gamma Gamma(s, x) for real s and x > 0.

    Positive order uses the standard series / continued-fraction split at
    x = s + 1.  Non-positive order uses the continued fraction directly
    when x >= 1; for smaller x it first snaps orders within 1e-9 of an
    integer onto that integer, then seeds at the shifted positive order
    s + ceil(-s) in (0, 1] (order exactly 0 seeds on the E1 series) and
    applies the recurrence

        Gamma(s, x) = (Gamma(s+1, x) - x**s * exp(-x)) / s

    downward, which is the stable direction there.
    """
    if not (math.isfinite(s) and math.isfinite(x)):
        raise DomainError(f"arguments must be finite, got s={s!r}, x={x!r}")
    if x <= 0.0:
        raise DomainError(f"upper_incomplete_gamma requires x > 0, got {x!r}")
    if s > 0.0:
        return _upper_gamma_positive(s, x)
    if x >= _CF_SWITCH:
        return _upper_gamma_cf(s, x)

    nearest = round(s)
    if abs(s - nearest) <= _ORDER_SNAP_TOL:
        s = float(nearest)
    m = int(math.ceil(-s))
    s0 = s + m  # in [0, 1)
    if s0 == 0.0:
        g = _e1_series(x)
    else:
        g = _upper_gamma_positive(s0, x)
    lx = math.log(x)
    nu = s0
    for _ in range(m):
        nu -= 1.0
        expo = nu * lx - x
        if expo > _EXP_OVERFLOW:
            raise NumericsError(f"Gamma({s}, {x}) overflows double precision")
        g = (g - math.exp(expo)) / nu
    return g


def _upper_gamma_log_recurrence(s: float, x: float) -> float:
    """log Gamma(s, x) for s <= 0, 0 < x < 1, carried entirely on the
    log scale.  Each downward step rewrites the recurrence as

        Gamma(nu, x) = (x**nu * exp(-x) - Gamma(nu+1, x)) / (-nu)

    (positivity of the left side fixes which term dominates), i.e.

        log Gamma(nu, x) = nu*log(x) - x + log1p(-r) - log(-nu),
        r = exp(log Gamma(nu+1, x) - nu*log(x) + x) in (0, 1),

    so no intermediate can overflow: arbitrarily small x stays
    representable even when the value itself is far beyond double range.
    """
    nearest = round(s)
    if abs(s - nearest) <= _ORDER_SNAP_TOL:
        s = float(nearest)
    m = int(math.ceil(-s))
    s0 = s + m  # in [0, 1)
    if s0 == 0.0:
        lg = math.log(_e1_series(x))
    else:
        lg = _upper_gamma_positive_log(s0, x)
    lx = math.log(x)
    nu = s0
    for _ in range(m):
        nu -= 1.0
        base = nu * lx - x
        r = math.exp(lg - base)
        if r >= 1.0:
            raise NumericsError(
                f"log recurrence lost positivity for Gamma({s}, {x})")
        lg = base + math.log1p(-r) - math.log(-nu)
    return lg


def log_upper_incomplete_gamma(s: float, x: float) -> float:
    """ln Gamma(s, x) for real s and x > 0.

    Same mathematics as ``upper_incomplete_gamma`` but carried on the log
    scale throughout, so orders of magnitude like exp(+-5000) (which arise
    in the channel closed forms at extreme pointing-severity ratios)
    remain representable.  Non-positive orders below the continued-fraction
    switch run the downward recurrence in log form, which tolerates
    arguments all the way down to the smallest positive doubles.
    """
    if not (math.isfinite(s) and math.isfinite(x)):
        raise DomainError(f"arguments must be finite, got s={s!r}, x={x!r}")
    if x <= 0.0:
        raise DomainError(f"log_upper_incomplete_gamma requires x > 0, got {x!r}")
    if s > 0.0:
        return _upper_gamma_positive_log(s, x)
    if x >= _CF_SWITCH:
        return _upper_gamma_cf_log(s, x)
    return _upper_gamma_log_recurrence(s, x)


@dataclass(frozen=True)
class WhittakerArgs:
    """Index pair and argument for a Whittaker-W evaluation.

    Only the family ``lam == kappa + 1/2`` is representable here; that is
    the family the channel closed forms generate, and the only one this
    library evaluates.
    """
    kappa: float
    lam: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and math.isfinite(self.lam)
                and math.isfinite(self.z)):
            raise DomainError("WhittakerArgs fields must be finite")
        if self.z <= 0.0:
            raise DomainError(f"WhittakerArgs requires z > 0, got {self.z!r}")
        scale = max(1.0, abs(self.kappa) + abs(self.lam))
        if abs(self.lam - (self.kappa + 0.5)) > 1e-10 * scale:
            raise UnsupportedDomainError(
                f"index pair (kappa={self.kappa}, lam={self.lam}) is outside "
                "the supported family lam = kappa + 1/2")

    def value(self) -> float:
        return whittaker_w(self.kappa, self.lam, self.z)


def log_whittaker_w(kappa: float, lam: float, z: float) -> float:
    """ln W(kappa, lam; z) on the family lam = kappa + 1/2.

    The log form exists because the channel closed forms multiply W by
    factors like z**p * exp(-z/2) whose separate magnitudes dwarf the
    product; assembling everything in logs first avoids spurious
    overflow.  Same domain rules as whittaker_w.
    """
    args = WhittakerArgs(kappa, lam, z)  # validates domain and family
    nu = -2.0 * args.kappa
    lg = log_upper_incomplete_gamma(1.0 - nu, args.z)
    return 0.5 * (nu * math.log(args.z) + args.z) + lg


def whittaker_w(kappa: float, lam: float, z: float) -> float:
    """Whittaker W(kappa, lam; z) on the family lam = kappa + 1/2.

    Evaluated through the exact identity
    W(-nu/2, (1-nu)/2; z) = z**(nu/2) * exp(z/2) * Gamma(1-nu, z)
    with nu = -2*kappa.  Index pairs off the family raise
    UnsupportedDomainError; overflow raises NumericsError.
    """
    expo = log_whittaker_w(kappa, lam, z)
    if expo > _EXP_OVERFLOW:
        raise NumericsError(
            f"whittaker_w(kappa={kappa}, lam={lam}, z={z}) overflows")
    return math.exp(expo)


def tail_integral(nu: float, u: float) -> float:
    """Independent quadrature oracle: integral_u^inf x**(-nu) exp(-x) dx.

    Splits the range into geometric panels (the integrand can span many
    orders of magnitude near u when nu is large) and finishes with an
    infinite-tail panel; each panel uses adaptive Gauss-Kronrod.
    """
    if not (math.isfinite(nu) and math.isfinite(u)):
        raise DomainError(f"arguments must be finite, got nu={nu!r}, u={u!r}")
    if u <= 0.0:
        raise DomainError(f"tail_integral requires u > 0, got {u!r}")

    def f(x: float) -> float:
        return x ** (-nu) * math.exp(-x)

    edges = [u]
    stop = max(40.0, 2.0 * u)
    while edges[-1] < stop:
        edges.append(min(edges[-1] * 4.0, stop))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    tail, _ = integrate.quad(f, edges[-1], math.inf,
                             epsabs=1e-300, epsrel=1e-13, limit=200)
    total += tail
    if not math.isfinite(total):
        raise NumericsError(f"tail_integral({nu}, {u}) overflows")
    return total
