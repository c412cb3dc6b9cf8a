"""Pointing-error statistics for a jittering directional link.

Transmitter and receiver each wobble independently: the two orientation
components of each node are zero-mean Gaussians with common deviation
sigma_theta, making each node's off-axis angle Rayleigh and the combined
misalignment angle theta_tr = sqrt(theta_t^2 + theta_r^2) a two-node
composition with density theta^3/(2 sigma^4) exp(-theta^2/(2 sigma^2)).

Mapping that angle through the Gaussian lobe gives the pointing gain
h_p = g0 * exp(-theta_tr^2 / (2 w_b^2)) whose distribution on (0, g0] has
the closed forms implemented below, together with their power-function
approximations (the log replaced by a*(z^(1/a) - 1)) that make the
end-to-end channel law tractable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .antenna import BEAMWIDTH_COEFF, LobeModel
from .errors import DomainError
from ._util import vectorized

DEFAULT_LN_APPROX_ORDER = 80.0


@dataclass(frozen=True)
class JitterParams:
    """Per-axis orientation jitter (radians); common to both nodes."""
    sigma_theta: float

    def __post_init__(self):
        s = self.sigma_theta
        if not (isinstance(s, (int, float)) and math.isfinite(s) and s > 0):
            raise DomainError(f"sigma_theta must be finite and > 0, got {s!r}")


@dataclass(frozen=True)
class PointingModel:
    """Gaussian-lobe pointing model: lobe shape plus jitter statistics.

    beta = w_b^2 / sigma_theta^2 is the shape parameter of the gain
    distribution; ln_approx_order is the order of the power-function
    approximation to the logarithm used by the *_approx forms.
    """
    lobe: LobeModel
    jitter: JitterParams
    ln_approx_order: float = DEFAULT_LN_APPROX_ORDER

    def __post_init__(self):
        a = self.ln_approx_order
        if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 1):
            raise DomainError(
                f"ln_approx_order must be finite and > 1, got {a!r}")
        if abs(self.beta - 1.0 / a) < 1e-12 * max(1.0, self.beta):
            raise DomainError(
                "degenerate parameters: beta equals 1/ln_approx_order")

    @property
    def beta(self) -> float:
        w = self.lobe.w_b
        s = self.jitter.sigma_theta
        return (w * w) / (s * s)

    @property
    def jitter_coeff(self) -> float:
        """B^2 / sigma_theta^2 with B the fitted beamwidth coefficient;
        equals beta * N^2 when the lobe uses the closed-form fit."""
        s = self.jitter.sigma_theta
        return (BEAMWIDTH_COEFF / s) ** 2


def combine_orientation(theta_x, theta_y):
    """Off-axis angle of a direction tilted by theta_x and theta_y about
    the two transverse axes: atan(sqrt(tan^2 x + tan^2 y)).

    Components must lie strictly inside (-pi/2, pi/2).  Scalar or array.
    """
    tx = np.asarray(theta_x, dtype=float)
    ty = np.asarray(theta_y, dtype=float)
    if np.any(np.abs(tx) >= 0.5 * math.pi) or np.any(np.abs(ty) >= 0.5 * math.pi):
        raise DomainError("orientation components must lie in (-pi/2, pi/2)")
    out = np.arctan(np.hypot(np.tan(tx), np.tan(ty)))
    if np.ndim(theta_x) == 0 and np.ndim(theta_y) == 0:
        return float(out)
    return out


def orientation_azimuth(theta_x, theta_y):
    """Azimuth of the tilted direction in the array frame, atan2-based;
    companion of combine_orientation for exact-pattern evaluation."""
    tx = np.asarray(theta_x, dtype=float)
    ty = np.asarray(theta_y, dtype=float)
    out = np.arctan2(np.tan(ty), np.tan(tx))
    if np.ndim(theta_x) == 0 and np.ndim(theta_y) == 0:
        return float(out)
    return out


@vectorized
def theta_tr_pdf(theta: float, j: JitterParams) -> float:
    """Density of the combined misalignment angle of two jittering nodes:
    theta^3 / (2 sigma^4) * exp(-theta^2 / (2 sigma^2)) on theta >= 0."""
    if theta < 0.0:
        return 0.0
    s2 = j.sigma_theta * j.sigma_theta
    t2 = theta * theta
    return t2 * theta / (2.0 * s2 * s2) * math.exp(-t2 / (2.0 * s2))


@vectorized
def theta_tr_cdf(theta: float, j: JitterParams) -> float:
    """CDF of the combined misalignment angle:
    1 - exp(-t)(1 + t) with t = theta^2 / (2 sigma^2)."""
    if theta <= 0.0:
        return 0.0
    t = theta * theta / (2.0 * j.sigma_theta * j.sigma_theta)
    return 1.0 - math.exp(-t) * (1.0 + t)


def pointing_gain(m: PointingModel, theta_tr):
    """Pointing gain h_p = g0 * exp(-theta_tr^2 / (2 w_b^2))."""
    th = np.asarray(theta_tr, dtype=float)
    w2 = m.lobe.w_b * m.lobe.w_b
    out = m.lobe.g0 * np.exp(-(th * th) / (2.0 * w2))
    if np.ndim(theta_tr) == 0:
        return float(out)
    return out


@vectorized
def pointing_pdf(h_p: float, m: PointingModel) -> float:
    """Exact pointing-gain density on (0, g0]:

        f(h_p) = beta^2 / g0 * r^(beta - 1) * (-ln r),   r = h_p / g0.

    Evaluated in log form so large beta neither overflows nor loses the
    support edge.  Zero outside the support.
    """
    g0 = m.lobe.g0
    if h_p <= 0.0 or h_p > g0:
        return 0.0
    b = m.beta
    ln_r = math.log(h_p / g0)
    expo = (b - 1.0) * ln_r
    if expo < -745.0:
        return 0.0
    return b * b / g0 * math.exp(expo) * (-ln_r)


@vectorized
def pointing_cdf(h_p: float, m: PointingModel) -> float:
    """Exact pointing-gain CDF: r^beta * (1 - beta ln r), r = h_p/g0."""
    g0 = m.lobe.g0
    if h_p <= 0.0:
        return 0.0
    if h_p >= g0:
        return 1.0
    b = m.beta
    ln_r = math.log(h_p / g0)
    expo = b * ln_r
    if expo < -745.0:
        return 0.0
    return math.exp(expo) * (1.0 - b * ln_r)


@vectorized
def pointing_pdf_approx(h_p: float, m: PointingModel) -> float:
    """Tractable density with ln z ~ a (z^(1/a) - 1):

        f(h_p) ~ a beta^2 / g0 * (r^(beta-1-1/a) - r^(beta-1)).

    Written as r^(beta-1) * expm1(-ln(r)/a) to stay exact for large a.
    """
    g0 = m.lobe.g0
    if h_p <= 0.0 or h_p > g0:
        return 0.0
    a = m.ln_approx_order
    b = m.beta
    ln_r = math.log(h_p / g0)
    expo = (b - 1.0) * ln_r
    if expo < -745.0:
        return 0.0
    return a * b * b / g0 * math.exp(expo) * math.expm1(-ln_r / a)


@vectorized
def pointing_cdf_approx(h_p: float, m: PointingModel) -> float:
    """Tractable CDF companion of pointing_pdf_approx:

        F(h_p) ~ a beta^2/(beta - 1/a) r^(beta-1/a) - a beta r^beta
               = r^beta (beta + a beta^2 expm1(-ln(r)/a)) / (beta - 1/a)

    The second form is the same expression rearranged to dodge the
    cancellation of two nearly equal powers at large a.  Note F(g0) =
    beta/(beta - 1/a) = 1 + O(1/(a*beta)): the approximation carries a
    small normalization excess by construction.
    """
    g0 = m.lobe.g0
    if h_p <= 0.0:
        return 0.0
    a = m.ln_approx_order
    b = m.beta
    r = min(h_p / g0, 1.0)
    ln_r = math.log(r)
    expo = b * ln_r
    if expo < -745.0:
        return 0.0
    return math.exp(expo) * (b + a * b * b * math.expm1(-ln_r / a)) / (b - 1.0 / a)


def fso_pointing_fraction(displacement: float, lens_radius: float,
                          beam_waist: float) -> float:
    """Fraction of a collimated Gaussian beam collected by a circular lens
    whose centre is offset by `displacement` from the beam axis:

        integral over the disc of 2/(pi w^2) exp(-2((x-d)^2+y^2)/w^2).

    Fixed-aperture benchmark model; evaluated by 2-D adaptive quadrature
    to ~1e-9 absolute.
    """
    for name, v in (("displacement", displacement),
                    ("lens_radius", lens_radius),
                    ("beam_waist", beam_waist)):
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise DomainError(f"{name} must be finite, got {v!r}")
    if displacement < 0 or lens_radius <= 0 or beam_waist <= 0:
        raise DomainError("need displacement >= 0, lens_radius > 0, "
                          "beam_waist > 0")
    w2 = beam_waist * beam_waist
    norm = 2.0 / (math.pi * w2)
    d = displacement
    a = lens_radius
    # beam centre more than ~27 waists outside the lens: nothing collected
    if d - a > 6.0 * beam_waist and (d - a) ** 2 / w2 > 745.0 / 2.0:
        return 0.0

    def f(y: float, x: float) -> float:
        return norm * math.exp(-2.0 * ((x - d) ** 2 + y * y) / w2)

    val, err = integrate.dblquad(
        f, -a, a,
        lambda x: -math.sqrt(max(a * a - x * x, 0.0)),
        lambda x: math.sqrt(max(a * a - x * x, 0.0)),
        epsabs=1e-11, epsrel=1e-10)
    return min(max(val, 0.0), 1.0)
