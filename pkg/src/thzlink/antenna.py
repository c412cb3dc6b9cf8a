"""Uniform square planar-array radiation pattern and its Gaussian main-lobe
surrogate.

The array is N x N, half-wavelength spaced, broadside steered (zero phase
taper).  The normalized power pattern factorizes into two Dirichlet-kernel
ratios; the peak gain follows from power normalization over the forward
hemisphere, and the 1/e main-lobe width from a bracketed root solve on the
boresight cut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy import integrate, optimize
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import BeamwidthError, DomainError, NumericsError

# Fitted closed forms: w_B ~ BEAMWIDTH_COEFF / N and g0 ~ pi * N**2.
# Both are asymptotic in N; see fit_lobe_model for the exact-fit route.
BEAMWIDTH_COEFF = 1.061


@dataclass(frozen=True)
class ArrayConfig:
    """Square planar array: N x N isotropic elements at half-wavelength
    spacing, broadside (no steering phase)."""
    n_elements_per_side: int
    carrier_frequency: float = 275e9

    def __post_init__(self):
        n = self.n_elements_per_side
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise DomainError(f"n_elements_per_side must be an int, got {n!r}")
        if n < 1:
            raise DomainError(f"n_elements_per_side must be >= 1, got {n}")
        f = self.carrier_frequency
        if not (isinstance(f, (int, float)) and math.isfinite(f) and f > 0):
            raise DomainError(f"carrier_frequency must be > 0, got {f!r}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def element_spacing(self) -> float:
        """Inter-element spacing, fixed at half a wavelength."""
        return 0.5 * self.wavelength

    # broadside: no progressive phase in either axis
    steering_phase = 0.0


def _dirichlet_ratio(x: np.ndarray, n: int) -> np.ndarray:
    """sin(n*x) / (n*sin(x)) with removable singularities at x = m*pi.

    Near a singularity the ratio tends to +-1; the series
    (+-1)*(1 - (n^2-1)*delta^2/6) restores it smoothly.  Callers square the
    result, so the sign is immaterial, but we keep it correct anyway.
    """
    m = np.round(x / math.pi)
    delta = x - m * math.pi
    near = np.abs(delta) < 1e-9
    denom = np.where(near, 1.0, n * np.sin(x))
    ratio = np.sin(n * x) / denom
    sign = np.where((m.astype(np.int64) * (n + 1)) % 2 == 0, 1.0, -1.0)
    series = sign * (1.0 - (n * n - 1.0) * delta * delta / 6.0)
    return np.where(near, series, ratio)


def array_factor_gain(cfg: ArrayConfig, theta, phi):
    """Normalized power pattern G'(theta, phi) in [0, 1].

    theta is the polar angle off boresight, phi the azimuth of the
    deviation; both accept scalars or arrays (broadcast together).
    """
    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    n = cfg.n_elements_per_side
    s = np.sin(th)
    # with d = lambda/2 the half-argument is (pi/2) sin(theta) cos/sin(phi)
    x = 0.5 * math.pi * s * np.cos(ph)
    y = 0.5 * math.pi * s * np.sin(ph)
    g = (_dirichlet_ratio(x, n) * _dirichlet_ratio(y, n)) ** 2
    if np.ndim(theta) == 0 and np.ndim(phi) == 0:
        return float(g)
    return g


def _theta_panel_edges(cfg: ArrayConfig, phi: float) -> np.ndarray:
    """Null-aligned panel edges of G'(theta, phi) on [0, pi/2]."""
    n = cfg.n_elements_per_side
    edges = {0.0, 0.5 * math.pi}
    for trig in (abs(math.cos(phi)), abs(math.sin(phi))):
        if trig < 1e-12:
            continue
        m = 1
        while 2.0 * m / (n * trig) < 1.0:
            edges.add(math.asin(2.0 * m / (n * trig)))
            m += 1
    return np.array(sorted(edges))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _hemisphere_power_integral(cfg: ArrayConfig, rel_tol: float) -> float:
    """integral of G' sin(theta) over the forward hemisphere.

    Outer adaptive quadrature over phi in [0, pi/2] (pattern period), inner
    composite Gauss-Legendre on panels between consecutive pattern nulls so
    each oscillation lobe is resolved by a single smooth panel.
    """

    def inner(phi: float) -> float:
        edges = _theta_panel_edges(cfg, phi)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        theta = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        vals = array_factor_gain(cfg, theta, phi) * np.sin(theta)
        vals = vals.reshape(len(mid), -1)
        return float(np.sum(half * (vals @ _GL_WEIGHTS)))

    quarter, abserr, info = integrate.quad(
        inner, 0.0, 0.5 * math.pi,
        epsabs=0.0, epsrel=rel_tol / 4.0, limit=300, full_output=True)[:3]
    if abserr > abs(quarter) * rel_tol:
        raise NumericsError(
            f"hemisphere quadrature did not reach rel_tol={rel_tol} "
            f"(estimate {abserr / abs(quarter):.2e}) for N={cfg.n_elements_per_side}")
    return 4.0 * quarter


def normalization_g0(cfg: ArrayConfig, rel_tol: float = 1e-6) -> float:
    """Peak gain G0 from power normalization over the forward hemisphere:

        G0 = 4*pi / integral_{hemisphere} G' sin(theta) dtheta dphi.

    The broadside pattern of an isotropic-element planar array is mirror
    symmetric through the array plane; normalizing over the full sphere
    would halve G0 and contradict the G0 ~ pi*N^2 behaviour this model is
    built around, so radiation is taken as confined to the forward
    half-space (reflector-backed array).
    """
    return 4.0 * math.pi / _hemisphere_power_integral(cfg, rel_tol)


def solve_beamwidth(cfg: ArrayConfig) -> float:
    """1/e beamwidth: the angle where the boresight-cut pattern
    G'(theta, 0) first falls to exp(-1).  Bracketed by the first null at
    arcsin(2/N); solved to 1e-12 absolute."""
    n = cfg.n_elements_per_side
    if n < 2:
        raise BeamwidthError(
            "a single element radiates isotropically; no 1/e beamwidth exists")
    target = math.exp(-1.0)

    def f(theta: float) -> float:
        return array_factor_gain(cfg, theta, 0.0) - target

    hi = math.asin(2.0 / n) * (1.0 - 1e-12)
    return float(optimize.brentq(f, 1e-15, hi, xtol=1e-12, rtol=8.9e-16))


@dataclass(frozen=True)
class LobeModel:
    """Gaussian main-lobe surrogate: G(theta) = g0 * exp(-theta^2 / w_b^2)."""
    g0: float
    w_b: float
    source: Literal["exact-fit", "closed-form-approx"]

    def __post_init__(self):
        if not (math.isfinite(self.g0) and self.g0 > 0):
            raise DomainError(f"g0 must be finite and > 0, got {self.g0!r}")
        if not (math.isfinite(self.w_b) and 0 < self.w_b < 0.5 * math.pi):
            raise DomainError(
                f"w_b must lie in (0, pi/2), got {self.w_b!r}")


@lru_cache(maxsize=64)
def _exact_fit(cfg: ArrayConfig) -> tuple[float, float]:
    return normalization_g0(cfg), solve_beamwidth(cfg)


def fit_lobe_model(
    cfg: ArrayConfig,
    mode: Literal["exact-fit", "closed-form-approx"] = "exact-fit",
) -> LobeModel:
    """Build the Gaussian lobe surrogate for an array.

    "exact-fit" computes g0 by quadrature and w_b by root solve;
    "closed-form-approx" uses the fitted asymptotics g0 = pi*N^2 and
    w_b = 1.061/N (poor below N ~ 8, see tests for measured deviations).
    """
    n = cfg.n_elements_per_side
    if mode == "exact-fit":
        g0, w_b = _exact_fit(cfg)
        return LobeModel(g0=g0, w_b=w_b, source=mode)
    if mode == "closed-form-approx":
        if n < 2:
            raise BeamwidthError("closed-form lobe fit needs N >= 2")
        return LobeModel(g0=math.pi * n * n, w_b=BEAMWIDTH_COEFF / n,
                         source=mode)
    raise DomainError(f"unknown lobe fit mode {mode!r}")


def gaussian_gain(model: LobeModel, theta):
    """Gaussian-lobe gain g0 * exp(-theta^2 / w_b^2); scalar or array."""
    th = np.asarray(theta, dtype=float)
    g = model.g0 * np.exp(-(th * th) / (model.w_b * model.w_b))
    if np.ndim(theta) == 0:
        return float(g)
    return g
