"""Point configurations and the DPP Papangelou conditional intensity.

The intensity for adding x to a configuration xi is the determinant ratio
det J(xi + x) / det J(xi), evaluated as the Schur complement
J(x, x) - v' A^-1 v with A the J-Gram matrix of xi and v_i = J(p_i, x).
A Cholesky factor of A is cached on the configuration, so the ratio costs
one triangular solve; births extend the factor by one row, deaths
refactorize the reduced Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegeneratePointError, DomainError
from .kernel import SpectralKernel

# Schur complements below SINGULARITY_FLOOR * H count as singular: the new
# point would be linearly dependent on the configuration to within roundoff.
SINGULARITY_FLOOR = 1e-12


@dataclass
class ClampStats:
    """Counters for numerically clamped Schur complements."""

    negative: int = 0
    floored: int = 0


@dataclass(frozen=True)
class Configuration:
    """Immutable point pattern with a factorized J-Gram matrix.

    gram[i, j] = J(p_i, p_j), factor is its lower Cholesky factor, and
    phi caches the per-point feature rows so that J(p_i, x) for a new x
    is a single matrix-vector product. Treat all arrays as read-only.
    """

    points: tuple
    phi: np.ndarray
    gram: np.ndarray
    factor: np.ndarray
    logdet: float

    def __len__(self) -> int:
        return len(self.points)


def empty_configuration(kernel: SpectralKernel) -> Configuration:
    d = kernel.feature_dim
    return Configuration(
        points=(),
        phi=np.empty((0, d)),
        gram=np.empty((0, 0)),
        factor=np.empty((0, 0)),
        logdet=0.0,
    )


def make_configuration(kernel: SpectralKernel, points) -> Configuration:
    """Build a configuration from scratch (batch Gram + one factorization)."""
    points = tuple((float(p[0]), float(p[1])) for p in points)
    if not points:
        return empty_configuration(kernel)
    phi = kernel.features_many(points)
    gram = phi @ phi.T
    gram = 0.5 * (gram + gram.T)
    np.fill_diagonal(gram, kernel.H)
    factor = np.linalg.cholesky(gram)
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor))))
    return Configuration(points, phi, gram, factor, logdet)


def _schur_parts(kernel, config, phi_x):
    """Return (raw Schur complement, J-values v, triangular solve w)."""
    if len(config) == 0:
        return kernel.H, np.empty(0), np.empty(0)
    v = config.phi @ phi_x
    w = solve_triangular(config.factor, v, lower=True, check_finite=False)
    return kernel.H - float(np.dot(w, w)), v, w


def conditional_intensity(
    kernel: SpectralKernel,
    config: Configuration,
    x,
    clamps: ClampStats | None = None,
) -> float:
    """Papangelou conditional intensity c(config, x), clamped to [0, H].

    Returns 0 when the Schur complement falls below the singularity floor,
    matching the convention that the intensity vanishes on singular
    configurations. Negative values from roundoff are clamped to 0 and
    counted in clamps.
    """
    if not kernel.window.contains(x):
        raise DomainError(f"point {x} outside window of side {kernel.window.side}")
    c, _, _ = _schur_parts(kernel, config, kernel.features(x))
    if c < 0.0:
        if clamps is not None:
            clamps.negative += 1
        return 0.0
    if c < SINGULARITY_FLOOR * kernel.H:
        if clamps is not None:
            clamps.floored += 1
        return 0.0
    return min(c, kernel.H)


def with_point(kernel: SpectralKernel, config: Configuration, x) -> Configuration:
    """Configuration extended by one point (rank-1 Cholesky append)."""
    x = (float(x[0]), float(x[1]))
    phi_x = kernel.features(x)
    c, v, w = _schur_parts(kernel, config, phi_x)
    return _extend(kernel, config, x, phi_x, c, v, w)


def _extend(kernel, config, x, phi_x, c, v, w):
    if c < SINGULARITY_FLOOR * kernel.H:
        raise DegeneratePointError(
            f"Schur complement {c:.3g} below singularity floor; "
            f"point {x} is numerically dependent on the configuration"
        )
    n = len(config)
    h = kernel.H
    gram = np.empty((n + 1, n + 1))
    gram[:n, :n] = config.gram
    gram[n, :n] = v
    gram[:n, n] = v
    gram[n, n] = h
    factor = np.zeros((n + 1, n + 1))
    factor[:n, :n] = config.factor
    factor[n, :n] = w
    factor[n, n] = np.sqrt(c)
    return Configuration(
        points=config.points + (x,),
        phi=np.vstack([config.phi, phi_x[None, :]]),
        gram=gram,
        factor=factor,
        logdet=config.logdet + float(np.log(c)),
    )


def without_point(
    kernel: SpectralKernel, config: Configuration, index: int
) -> Configuration:
    """Configuration with the index-th point removed.

    Refactorizes the reduced Gram matrix (O(n^3)); configurations stay
    small enough that a downdate is not worth its numerical delicacy.
    """
    n = len(config)
    if not (0 <= index < n):
        raise IndexError(f"point index {index} out of range for {n} points")
    if n == 1:
        return empty_configuration(kernel)
    keep = np.arange(n) != index
    gram = config.gram[np.ix_(keep, keep)]
    factor = np.linalg.cholesky(gram)
    return Configuration(
        points=config.points[:index] + config.points[index + 1 :],
        phi=config.phi[keep],
        gram=gram,
        factor=factor,
        logdet=2.0 * float(np.sum(np.log(np.diag(factor)))),
    )
