"""Stationary DPP kernel models and their truncated Fourier spectra.

Three classical covariance models (Gaussian, Matern, Cauchy) are expanded
in the Fourier basis of the square window. The expansion coefficients are
the continuous Fourier transform of the covariance evaluated at the lattice
wavevectors, which is essentially exact when the correlation range is small
compared to the window. From the eigenvalues we form the J-kernel
coefficients gamma = lambda / (1 - lambda), whose sum fixes the constant
diagonal H = J(x, x), the birth-rate bound used by the sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .errors import ParameterError, SpectrumError, TruncationError

DEFAULT_COVERAGE = 0.999
DEFAULT_MAX_ORDER = 64


class Family(Enum):
    GAUSSIAN = "gaussian"
    MATERN = "matern"
    CAUCHY = "cauchy"

    @classmethod
    def from_string(cls, name: str) -> "Family":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ParameterError(
                f"unknown model family {name!r}; expected one of "
                f"{[f.value for f in cls]}"
            ) from None


@dataclass(frozen=True)
class Window:
    """Square simulation window [-side/2, side/2]^2."""

    side: float = 1.0

    def __post_init__(self):
        if not (self.side > 0):
            raise ParameterError(f"window side must be positive, got {self.side}")

    @property
    def area(self) -> float:
        return self.side * self.side

    def contains(self, point) -> bool:
        h = self.side / 2.0
        x, y = point
        return -h <= x <= h and -h <= y <= h


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of a stationary DPP covariance model.

    rho is the intensity (points per unit area), alpha the range parameter
    and nu the shape parameter (Matern and Cauchy only).
    """

    family: Family
    rho: float
    alpha: float
    nu: float | None = None

    def __post_init__(self):
        if self.rho < 0:
            raise ParameterError(f"rho must be >= 0, got {self.rho}")
        if not (self.alpha > 0):
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if self.family is Family.GAUSSIAN:
            if self.nu is not None:
                raise ParameterError("nu is not a Gaussian-model parameter")
        else:
            if self.nu is None:
                raise ParameterError(f"{self.family.value} model requires nu")
            if not (self.nu > 0):
                raise ParameterError(f"nu must be positive, got {self.nu}")
        amax = max_alpha(self.family, self.rho, self.nu)
        if self.alpha > amax:
            raise ParameterError(
                f"alpha={self.alpha} exceeds the existence bound "
                f"alpha_max={amax} for {self.family.value} with rho={self.rho}"
            )


def max_alpha(family: Family, rho: float, nu: float | None = None) -> float:
    """Largest admissible range parameter for the given family and intensity."""
    if rho < 0:
        raise ParameterError(f"rho must be >= 0, got {rho}")
    if rho == 0:
        return math.inf
    if family is Family.GAUSSIAN:
        return math.sqrt(1.0 / (math.pi * rho))
    if nu is None or nu <= 0:
        raise ParameterError(f"{family.value} model requires nu > 0")
    if family is Family.MATERN:
        return math.sqrt(1.0 / (4.0 * math.pi * nu * rho))
    return math.sqrt(nu / (math.pi * rho))


def spectral_density(spec: ModelSpec, q) -> np.ndarray:
    """Continuous Fourier transform of the covariance at radial frequency q.

    The k = 0 value of the Cauchy model is the analytic limit of
    z^nu K_nu(z), which avoids the 0 * inf indeterminacy of the closed form.
    """
    q = np.asarray(q, dtype=float)
    a2r = math.pi * spec.alpha**2 * spec.rho
    if spec.family is Family.GAUSSIAN:
        return a2r * np.exp(-((math.pi * spec.alpha) ** 2) * q * q)
    nu = spec.nu
    if spec.family is Family.MATERN:
        return 4.0 * a2r * nu / (1.0 + (2.0 * math.pi * spec.alpha) ** 2 * q * q) ** (
            1.0 + nu
        )
    # Cauchy
    z = 2.0 * math.pi * spec.alpha * q
    out = np.empty_like(z)
    zero = z == 0.0
    out[zero] = a2r / nu  # limit z^nu K_nu(z) -> Gamma(nu) 2^(nu-1)
    zr = z[~zero]
    with np.errstate(under="ignore"):
        out[~zero] = (
            2.0 ** (1.0 - nu) * a2r / math.gamma(1.0 + nu) * zr**nu * special.kv(nu, zr)
        )
    return out


def eigenvalue(spec: ModelSpec, k, side: float = 1.0) -> float:
    """Eigenvalue of the windowed kernel operator for integer wavevector k.

    For a window of side s the Fourier basis is exp(2*pi*i k.l / s) / s and
    the operator eigenvalue is the continuous transform at frequency k / s.
    """
    k1, k2 = k
    q = math.hypot(float(k1), float(k2)) / side
    return float(spectral_density(spec, q))


def pair_correlation(spec: ModelSpec, r):
    """Closed-form pair correlation g(r) of the model; g(0) = 0 exactly."""
    scalar = np.isscalar(r)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ParameterError("pair correlation requires r >= 0")
    t = r / spec.alpha
    if spec.family is Family.GAUSSIAN:
        g = 1.0 - np.exp(-2.0 * t * t)
    elif spec.family is Family.MATERN:
        nu = spec.nu
        b = np.ones_like(t)
        pos = t > 0
        with np.errstate(under="ignore"):
            b[pos] = 2.0 ** (1.0 - nu) * t[pos] ** nu * special.kv(nu, t[pos]) / math.gamma(nu)
        g = 1.0 - b * b
    else:
        g = 1.0 - (1.0 + t * t) ** (-2.0 * spec.nu - 2.0)
    g = np.clip(g, 0.0, 1.0)
    return float(g[0]) if scalar else g


class SpectralKernel:
    """Truncated Fourier model of a stationary DPP kernel.

    Modes enumerate the full square lattice |k1| <= N, |k2| <= N in
    row-major order. With the normalized basis exp(2*pi*i k.l / s) / s the
    kernel and J-kernel evaluate to

        K(x, y) = sum_k lambda_k cos(2*pi k.(x - y) / s) / s^2
        J(x, y) = sum_k gamma_k  cos(2*pi k.(x - y) / s) / s^2

    so H = J(x, x) = sum(gamma) / s^2 and the dominating birth rate
    H * area = sum(gamma) equals the integral of J(x, x) over the window.
    On the default unit window the 1 / s^2 factor is 1 and H = sum(gamma).
    """

    def __init__(self, spec, window, order, k, lam):
        self.spec = spec
        self.window = window
        self.order = int(order)
        self.k = k
        self.lam = lam
        self.gamma = lam / (1.0 - lam)
        area = window.area
        # Same dot-product path as j_eval at zero lag, so j_eval(x, x) == H bitwise.
        self.H = float(np.dot(self.gamma, np.ones_like(self.gamma))) / area
        self.trace = float(np.sum(lam))
        self.coverage = self.trace / (spec.rho * area) if spec.rho > 0 else 1.0
        n = 2 * self.order + 1
        omega = 2.0 * math.pi / window.side
        self._omega_axis = omega * np.arange(-self.order, self.order + 1)
        self._w1 = omega * self.k[:, 0].astype(float)
        self._w2 = omega * self.k[:, 1].astype(float)
        # sqrt(gamma) / side grid: real feature map phi with phi(x).phi(y) = J(x, y)
        self._sqrt_gamma_grid = np.sqrt(self.gamma).reshape(n, n) / window.side

    @property
    def n_modes(self) -> int:
        return self.k.shape[0]

    @property
    def feature_dim(self) -> int:
        return 2 * self.n_modes

    def features(self, point) -> np.ndarray:
        """Real feature vector phi(x) with phi(x) . phi(y) = J(x, y).

        Uses the angle-addition identities on the two axes, so the cost is
        O(order) trig calls plus O(n_modes) multiplies.
        """
        x, y = point
        a1 = self._omega_axis * x
        a2 = self._omega_axis * y
        c1, s1 = np.cos(a1), np.sin(a1)
        c2, s2 = np.cos(a2), np.sin(a2)
        cosg = np.outer(c1, c2) - np.outer(s1, s2)
        sing = np.outer(s1, c2) + np.outer(c1, s2)
        sg = self._sqrt_gamma_grid
        return np.concatenate([(sg * cosg).ravel(), (sg * sing).ravel()])

    def features_many(self, points) -> np.ndarray:
        """Stack of feature vectors, one row per point."""
        out = np.empty((len(points), self.feature_dim))
        for i, p in enumerate(points):
            out[i] = self.features(p)
        return out

    def summary(self) -> dict:
        """JSON-ready description used in sample reports."""
        return {
            "family": self.spec.family.value,
            "rho": self.spec.rho,
            "alpha": self.spec.alpha,
            "nu": self.spec.nu,
            "side": self.window.side,
            "order": self.order,
            "H": self.H,
            "coverage": self.coverage,
        }


def build_spectral(
    spec: ModelSpec,
    window: Window | None = None,
    coverage_target: float = DEFAULT_COVERAGE,
    max_order: int = DEFAULT_MAX_ORDER,
) -> SpectralKernel:
    """Truncate the Fourier expansion at the smallest adequate order.

    The order N grows one shell at a time until the retained eigenvalues
    carry at least coverage_target of the total mass rho * area (coverage
    is monotone in N). Any retained eigenvalue >= 1 is a hard error: the
    J-series requires the spectrum inside [0, 1).
    """
    if window is None:
        window = Window()
    if not (0.0 < coverage_target < 1.0):
        raise ParameterError(
            f"coverage target must lie in (0, 1), got {coverage_target}"
        )
    side = window.side
    target = coverage_target * spec.rho * window.area

    total = 0.0
    order = None
    for n in range(max_order + 1):
        if n == 0:
            shell = np.array([[0, 0]])
        else:
            rim = np.arange(-n, n + 1)
            top = np.stack([np.full(2 * n + 1, -n), rim], axis=1)
            bot = np.stack([np.full(2 * n + 1, n), rim], axis=1)
            mid = rim[1:-1]
            left = np.stack([mid, np.full(2 * n - 1, -n)], axis=1)
            right = np.stack([mid, np.full(2 * n - 1, n)], axis=1)
            shell = np.concatenate([top, bot, left, right])
        q = np.hypot(shell[:, 0], shell[:, 1]) / side
        lam = spectral_density(spec, q)
        if np.any(lam >= 1.0):
            raise SpectrumError(
                f"eigenvalue {lam.max():.6g} >= 1 at order {n}; the model "
                "violates the spectrum condition after discretization"
            )
        total += float(np.sum(lam))
        if total >= target:
            order = n
            break
    if order is None:
        raise TruncationError(
            f"coverage {total / (spec.rho * window.area) if spec.rho else 1.0:.6g} "
            f"< {coverage_target} at max order {max_order}"
        )

    axis = np.arange(-order, order + 1)
    k1, k2 = np.meshgrid(axis, axis, indexing="ij")
    k = np.stack([k1.ravel(), k2.ravel()], axis=1)
    lam = spectral_density(spec, np.hypot(k[:, 0], k[:, 1]) / side)
    return SpectralKernel(spec, window, order, k, lam)


def j_eval(kernel: SpectralKernel, x, y) -> float:
    """J-kernel value at a pair of points.

    The mode set is symmetric under k -> -k, so the imaginary parts of the
    complex expansion cancel and the cosine sum is the exact real value.
    """
    d1 = x[0] - y[0]
    d2 = x[1] - y[1]
    ang = kernel._w1 * d1 + kernel._w2 * d2
    return float(np.dot(kernel.gamma, np.cos(ang))) / kernel.window.area


def k_eval(kernel: SpectralKernel, x, y) -> float:
    """Truncated covariance kernel value at a pair of points."""
    d1 = x[0] - y[0]
    d2 = x[1] - y[1]
    ang = kernel._w1 * d1 + kernel._w2 * d2
    return float(np.dot(kernel.lam, np.cos(ang))) / kernel.window.area
