"""Homodyne detection: outcome sampling and exact Gaussian conditioning.

Measuring the quadrature X cos(theta) + P sin(theta) of one mode leaves the
remaining modes in a Gaussian state whose covariance is the Schur complement
of the measured variance and whose mean is shifted linearly by the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import GaussianState, _check_mode

DEGENERATE_VARIANCE = 1e-12


class DegenerateQuadratureError(ValueError):
    """Measured quadrature has (numerically) zero variance."""


@dataclass(frozen=True)
class HomodyneOutcome:
    """One homodyne reading: mode index, LO phase in [0, pi), quadrature value."""

    mode: int
    lo_phase: float
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("homodyne value must be finite")
        if not 0.0 <= self.lo_phase < np.pi:
            raise ValueError("lo_phase must be normalized to [0, pi)")


def normalize_lo_phase(lo_phase: float, value: float = 0.0) -> tuple[float, float]:
    """Map a phase to [0, pi), flipping the reading's sign when needed.

    The quadrature at theta + pi is the negative of the one at theta, so
    (theta, y) and (theta mod pi, +/-y) describe the same measurement.
    """
    wrapped = float(np.mod(lo_phase, 2.0 * np.pi))
    if wrapped >= np.pi:
        return wrapped - np.pi, -value
    return wrapped, value


def _quadrature_vector(n_modes: int, mode: int, lo_phase: float) -> np.ndarray:
    vec = np.zeros(2 * n_modes)
    vec[2 * mode] = np.cos(lo_phase)
    vec[2 * mode + 1] = np.sin(lo_phase)
    return vec


def quadrature_marginal(state: GaussianState, mode: int, lo_phase: float) -> tuple[float, float]:
    """Mean and variance of the quadrature at ``lo_phase`` on one mode."""
    _check_mode(state, mode)
    lo_phase, _ = normalize_lo_phase(lo_phase)
    vec = _quadrature_vector(state.n_modes, mode, lo_phase)
    return float(vec @ state.mean), float(vec @ state.cov @ vec)


def sample_quadrature(
    state: GaussianState, mode: int, lo_phase: float, rng: np.random.Generator
) -> HomodyneOutcome:
    """Draw one reading from the exact Gaussian marginal (no conditioning)."""
    lo_phase, _ = normalize_lo_phase(lo_phase)
    mu, var = quadrature_marginal(state, mode, lo_phase)
    value = mu + np.sqrt(var) * rng.standard_normal()
    return HomodyneOutcome(mode, lo_phase, float(value))


def homodyne_condition(
    state: GaussianState, mode: int, lo_phase: float, outcome: float
) -> GaussianState:
    """State of the remaining N-1 modes after reading ``outcome`` on one mode.

    The post-measurement covariance does not depend on the outcome value;
    only the mean does.
    """
    _check_mode(state, mode)
    if state.n_modes < 2:
        raise ValueError("conditioning needs at least two modes")
    lo_phase, outcome = normalize_lo_phase(lo_phase, outcome)
    vec = _quadrature_vector(state.n_modes, mode, lo_phase)
    var = float(vec @ state.cov @ vec)
    if var <= DEGENERATE_VARIANCE:
        raise DegenerateQuadratureError("degenerate quadrature")
    mu = float(vec @ state.mean)
    cross = state.cov @ vec
    keep = [k for m in range(state.n_modes) if m != mode for k in (2 * m, 2 * m + 1)]
    cross = cross[keep]
    cov = state.cov[np.ix_(keep, keep)] - np.outer(cross, cross) / var
    mean = state.mean[keep] + cross * ((outcome - mu) / var)
    return GaussianState(mean, cov)


def homodyne_sample(
    state: GaussianState, mode: int, lo_phase: float, rng: np.random.Generator
) -> tuple[HomodyneOutcome, GaussianState]:
    """Sample a homodyne reading, then condition the other modes on it.

    Reproducible for a fixed generator state: exactly one normal variate is
    consumed per call.
    """
    if state.n_modes < 2:
        raise ValueError("sampling with conditioning needs at least two modes")
    outcome = sample_quadrature(state, mode, lo_phase, rng)
    post = homodyne_condition(state, mode, outcome.lo_phase, outcome.value)
    return outcome, post


def shot_stream(seed, shot_index: int) -> np.random.Generator:
    """Counter-based substream for one shot, keyed on (seed, shot_index).

    Streams are independent of each other and of execution order, so shot
    loops can run in any order or in parallel without changing results.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(shot_index,)))


def spawn_shot_streams(seed, n_shots: int) -> list[np.random.Generator]:
    """All per-shot substreams for a run; index k matches shot_stream(seed, k)."""
    return [np.random.default_rng(c) for c in np.random.SeedSequence(seed).spawn(n_shots)]
