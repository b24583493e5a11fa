"""Evaluation metrics: overlap fidelity, squeezing levels, Wigner functions.

dB values are reported against the shot-noise limit: 10*log10(V / 0.5) for a
single quadrature, 10*log10(V / 1.0) for the EPR sum/difference variances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import VACUUM_VARIANCE, GaussianState, symplectic_eigenvalues

PURITY_TOL = 1e-6


def variance_db(variance: float) -> float:
    """Single-quadrature variance relative to the shot-noise limit, in dB."""
    return 10.0 * np.log10(variance / VACUUM_VARIANCE)


@dataclass(frozen=True)
class FidelityReport:
    """Pure-target overlap, split into its covariance and mean factors."""

    fidelity: float
    covariance_factor: float
    mean_factor: float


@dataclass(frozen=True)
class SqueezingReport:
    """Extremal quadrature variances of one mode in dB and the minor-axis angle."""

    min_variance_db: float
    max_variance_db: float
    principal_angle: float


def gaussian_overlap(
    mean_a: np.ndarray, cov_a: np.ndarray, mean_b: np.ndarray, cov_b: np.ndarray
) -> tuple[float, float, float]:
    """(overlap, covariance factor, mean factor) of two single-mode Gaussians.

    Equals <psi_a| rho_b |psi_a> when state a is pure.  Works on raw moment
    arrays so estimators with small physicality violations can be evaluated.
    """
    sigma = np.asarray(cov_a, dtype=float) + np.asarray(cov_b, dtype=float)
    delta = np.asarray(mean_a, dtype=float) - np.asarray(mean_b, dtype=float)
    det = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0]
    cov_factor = 1.0 / np.sqrt(det)
    mean_factor = np.exp(-0.5 * (delta @ np.linalg.solve(sigma, delta)))
    return cov_factor * mean_factor, float(cov_factor), float(mean_factor)


def fidelity(target: GaussianState, actual: GaussianState) -> FidelityReport:
    """Overlap of a pure single-mode target with an arbitrary single-mode state.

    The target must be pure (symplectic eigenvalue 1/2 within 1e-6); the
    closed form is exp(-delta^T Sigma^-1 delta / 2) / sqrt(det Sigma) with
    Sigma the summed covariances.
    """
    for name, state in (("target", target), ("actual", actual)):
        if state.n_modes != 1:
            raise ValueError(f"{name} state must be single-mode")
    nu = symplectic_eigenvalues(target.cov)[0]
    if abs(nu - VACUUM_VARIANCE) > PURITY_TOL:
        raise ValueError(f"target not pure: symplectic eigenvalue {nu:.8g}")
    overlap, cov_factor, mean_factor = gaussian_overlap(
        target.mean, target.cov, actual.mean, actual.cov
    )
    return FidelityReport(float(overlap), cov_factor, mean_factor)


def squeezing_db(state: GaussianState) -> SqueezingReport:
    """Extremal variances of a single-mode state in dB plus the squeezed axis."""
    if state.n_modes != 1:
        raise ValueError("squeezing report is defined for single-mode states")
    eigvals, eigvecs = np.linalg.eigh(state.cov)
    minor = eigvecs[:, 0]
    angle = float(np.mod(np.arctan2(minor[1], minor[0]), np.pi))
    return SqueezingReport(
        min_variance_db=float(variance_db(eigvals[0])),
        max_variance_db=float(variance_db(eigvals[1])),
        principal_angle=angle,
    )


@dataclass(frozen=True)
class GridSpec:
    """Rectangular phase-space grid with uniform step."""

    x_min: float = -8.0
    x_max: float = 8.0
    p_min: float = -8.0
    p_max: float = 8.0
    step: float = 0.05

    def __post_init__(self):
        if self.step <= 0 or self.x_max <= self.x_min or self.p_max <= self.p_min:
            raise ValueError("grid bounds must be increasing and step positive")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.arange(self.x_min, self.x_max + self.step / 2.0, self.step)
        ps = np.arange(self.p_min, self.p_max + self.step / 2.0, self.step)
        return xs, ps

    def covers(self, state: GaussianState, n_sigma: float = 6.0) -> bool:
        """Whether the grid contains the state's mean +- n_sigma spread."""
        spread = n_sigma * np.sqrt(np.linalg.eigvalsh(state.cov).max())
        mx, mp = state.mean
        return (
            self.x_min <= mx - spread
            and mx + spread <= self.x_max
            and self.p_min <= mp - spread
            and mp + spread <= self.p_max
        )

    @classmethod
    def covering(cls, gaussian_states, n_sigma: float = 6.5, step: float = 0.05) -> "GridSpec":
        """Smallest symmetric grid covering every given state to n_sigma."""
        bound = 0.0
        for state in gaussian_states:
            spread = n_sigma * np.sqrt(np.linalg.eigvalsh(state.cov).max())
            bound = max(bound, np.abs(state.mean).max() + spread)
        bound = np.ceil(bound / step) * step
        return cls(-bound, bound, -bound, bound, step)


@dataclass(frozen=True)
class WignerField:
    """Wigner function sampled on a grid: values[i, j] = W(x[i], p[j])."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray
    riemann_sum: float
    coverage_warning: bool


def wigner(state: GaussianState, grid: GridSpec | None = None) -> WignerField:
    """Evaluate the (Gaussian) Wigner function of one mode on a grid.

    The field integrates to 1; a Riemann sum off by more than 1e-3 flags the
    grid as too coarse or too small via ``coverage_warning``.
    """
    if state.n_modes != 1:
        raise ValueError("wigner grid evaluation is defined for single-mode states")
    grid = grid or GridSpec()
    xs, ps = grid.axes()
    xx, pp = np.meshgrid(xs, ps, indexing="ij")
    dx = xx - state.mean[0]
    dp = pp - state.mean[1]
    inv = np.linalg.inv(state.cov)
    quad = inv[0, 0] * dx * dx + 2.0 * inv[0, 1] * dx * dp + inv[1, 1] * dp * dp
    norm = 2.0 * np.pi * np.sqrt(np.linalg.det(state.cov))
    values = np.exp(-0.5 * quad) / norm
    riemann = float(values.sum() * grid.step * grid.step)
    return WignerField(
        x=xs,
        p=ps,
        values=values,
        riemann_sum=riemann,
        coverage_warning=abs(riemann - 1.0) > 1e-3,
    )


def epr_quality(state: GaussianState) -> tuple[float, float]:
    """Sum and difference variances of a two-mode state in dB.

    Returns 10*log10 of Var(X1 + X2) and Var(P1 - P2) against the
    two-vacuum value of 1; both are negative for an entangled pair.
    """
    if state.n_modes != 2:
        raise ValueError("EPR quality is defined for two-mode states")
    x_sum = np.array([1.0, 0.0, 1.0, 0.0])
    p_diff = np.array([0.0, 1.0, 0.0, -1.0])
    sum_var = float(x_sum @ state.cov @ x_sum)
    diff_var = float(p_diff @ state.cov @ p_diff)
    return 10.0 * np.log10(sum_var), 10.0 * np.log10(diff_var)
