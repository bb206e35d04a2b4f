"""Independent ground-truth generators used to validate the CFTP sampler.

Two routes that do not share code with the sampler: the exact count
distribution of a DPP (a Poisson-binomial over the eigenvalues, evaluated
through its discrete Fourier transform) and an exact sampler for the DPP
discretized to a finite grid of cell centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DiscretizationError, ParameterError, SpectrumError
from .kernel import SpectralKernel, Window, k_eval

GRID_EIGENVALUE_SLACK = 1e-8
_CHUNK = 256


@dataclass(frozen=True)
class CountPmf:
    """Exact distribution of the number of points, indexed 0..M."""

    probabilities: np.ndarray

    @property
    def M(self) -> int:
        return len(self.probabilities) - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probabilities)), self.probabilities))

    def variance(self) -> float:
        n = np.arange(len(self.probabilities))
        m = self.mean()
        return float(np.dot((n - m) ** 2, self.probabilities))


def poisson_binomial_pmf(lambdas) -> CountPmf:
    """PMF of a sum of independent Bernoulli(lambda_i) variables.

    Evaluated through the characteristic function on the (M+1)-point
    frequency grid and one inverse transform. Magnitudes and phases are
    accumulated in log/angle form so the product over thousands of factors
    neither under- nor overflows.
    """
    p = np.asarray(lambdas, dtype=float)
    if p.ndim != 1:
        raise ParameterError("lambdas must be a 1-d sequence")
    if np.any((p < 0.0) | (p >= 1.0)):
        raise SpectrumError("all Bernoulli parameters must lie in [0, 1)")
    m = len(p)
    size = m + 1
    if m == 0:
        return CountPmf(np.ones(1))
    chi = np.empty(size, dtype=complex)
    phase = np.exp(2j * np.pi * np.arange(size) / size)
    with np.errstate(divide="ignore"):
        for start in range(0, size, _CHUNK):
            ph = phase[start : start + _CHUNK]
            factors = 1.0 - p[None, :] + p[None, :] * ph[:, None]
            log_mag = np.sum(np.log(np.abs(factors)), axis=1)
            angle = np.sum(np.angle(factors), axis=1)
            chi[start : start + _CHUNK] = np.exp(log_mag + 1j * angle)
    pmf = np.fft.fft(chi) / size
    residue = float(np.max(np.abs(pmf.imag)))
    if residue > 1e-9:
        raise ParameterError(f"imaginary residue {residue:.3g} exceeds 1e-9")
    out = np.clip(pmf.real, 0.0, None)
    return CountPmf(out)


def sample_finite_dpp(K: np.ndarray, rng: np.random.Generator) -> list:
    """Exact draw from a finite DPP with dense marginal kernel K.

    Eigenvalues must lie in [0, 1] up to a small slack; each eigenvector is
    kept with probability its eigenvalue and the resulting projection DPP
    is sampled by the standard sequential conditional recursion.
    """
    vals, vecs = np.linalg.eigh(K)
    if np.any(vals < -GRID_EIGENVALUE_SLACK) or np.any(
        vals > 1.0 + GRID_EIGENVALUE_SLACK
    ):
        raise DiscretizationError(
            f"kernel eigenvalues outside [0, 1]: min {vals.min():.3g}, "
            f"max {vals.max():.3g}"
        )
    vals = np.clip(vals, 0.0, 1.0 - 1e-12)
    keep = rng.random(len(vals)) < vals
    V = vecs[:, keep]
    k = V.shape[1]
    if k == 0:
        return []
    n = V.shape[0]
    # Sequential sampling of the projection DPP: maintain the Gram-Schmidt
    # columns c_s of the conditional kernel, O(n k) per selected point.
    c = np.empty((n, k))
    residual = np.einsum("ij,ij->i", V, V)  # diag of V V', shrinks each step
    chosen: list[int] = []
    for it in range(k):
        probs = np.clip(residual, 0.0, None)
        probs /= probs.sum()
        i = int(rng.choice(n, p=probs))
        if i in chosen:
            raise DiscretizationError("duplicate ground-set element selected")
        chosen.append(i)
        cross = V @ V[i]
        if it > 0:
            cross -= c[:, :it] @ c[i, :it]
        c[:, it] = cross / np.sqrt(cross[i])
        residual = residual - c[:, it] ** 2
    return chosen


def grid_kernel_matrix(kernel: SpectralKernel, window: Window, m: int):
    """Discretized kernel matrix and cell centers for an m x m grid.

    K_grid[i, j] = K(x_i, x_j) * (area / m^2) at cell centers; built from
    the (2m-1)^2 table of lag values since the kernel is stationary.
    """
    side = window.side
    centers_1d = -side / 2.0 + (np.arange(m) + 0.5) * side / m
    cx, cy = np.meshgrid(centers_1d, centers_1d, indexing="ij")
    centers = np.stack([cx.ravel(), cy.ravel()], axis=1)

    lags = np.arange(-(m - 1), m) * side / m
    table = np.empty((2 * m - 1, 2 * m - 1))
    for a, dx in enumerate(lags):
        for b, dy in enumerate(lags):
            table[a, b] = k_eval(kernel, (dx, dy), (0.0, 0.0))
    idx = np.arange(m * m)
    i1, i2 = idx // m, idx % m
    d1 = np.subtract.outer(i1, i1) + (m - 1)
    d2 = np.subtract.outer(i2, i2) + (m - 1)
    K = table[d1, d2] * (window.area / (m * m))
    K = 0.5 * (K + K.T)
    return K, centers


def grid_dpp_sample(
    kernel: SpectralKernel,
    window: Window,
    m: int,
    rng: np.random.Generator,
    eigensystem=None,
) -> np.ndarray:
    """Exact draw from the grid-discretized DPP; returns selected centers.

    Pass the result of grid_eigensystem as eigensystem to amortize the
    eigendecomposition over many draws.
    """
    if m > 64:
        raise ParameterError(f"grid size {m} too large to eigendecompose")
    if eigensystem is None:
        eigensystem = grid_eigensystem(kernel, window, m)
    vals, vecs, centers = eigensystem
    keep = rng.random(len(vals)) < vals
    V = vecs[:, keep]
    chosen = _sample_projection(V, rng)
    return centers[sorted(chosen)]


def grid_eigensystem(kernel: SpectralKernel, window: Window, m: int):
    """Eigendecomposition of the discretized kernel, validated and clamped."""
    K, centers = grid_kernel_matrix(kernel, window, m)
    vals, vecs = np.linalg.eigh(K)
    if np.any(vals < -GRID_EIGENVALUE_SLACK) or np.any(
        vals > 1.0 + GRID_EIGENVALUE_SLACK
    ):
        raise DiscretizationError(
            f"grid eigenvalues outside [0, 1]: min {vals.min():.3g}, "
            f"max {vals.max():.3g}"
        )
    vals = np.clip(vals, 0.0, 1.0 - 1e-12)
    return vals, vecs, centers


def _sample_projection(V: np.ndarray, rng: np.random.Generator) -> list:
    k = V.shape[1]
    if k == 0:
        return []
    n = V.shape[0]
    c = np.empty((n, k))
    residual = np.einsum("ij,ij->i", V, V)
    chosen: list[int] = []
    for it in range(k):
        probs = np.clip(residual, 0.0, None)
        probs /= probs.sum()
        i = int(rng.choice(n, p=probs))
        if i in chosen:
            raise DiscretizationError("duplicate ground-set element selected")
        chosen.append(i)
        cross = V @ V[i]
        if it > 0:
            cross -= c[:, :it] @ c[i, :it]
        c[:, it] = cross / np.sqrt(cross[i])
        residual = residual - c[:, it] ** 2
    return chosen
