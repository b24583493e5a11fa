"""Single-mode Gaussian state reconstruction from homodyne records.

Shots taken at three or more LO phases determine the mean vector and the
covariance matrix through the phase dependence of the per-phase sample mean
and variance; both systems are solved by least squares (states here are
exactly Gaussian, so first and second moments are sufficient).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .states import VACUUM_VARIANCE, GaussianState

CSV_HEADER = "shot_index,lo_phase_rad,value"

MIN_DISTINCT_PHASES = 3
MIN_SHOTS_PER_PHASE = 100


class InsufficientPhasesError(ValueError):
    """Fewer than three distinct LO phases: the moment system is rank deficient."""


class UnphysicalReconstructionError(ValueError):
    """Estimated covariance violates the uncertainty bound beyond sampling noise."""


@dataclass(frozen=True)
class HomodyneDataset:
    """Per-shot LO phases and quadrature readings, plus run provenance."""

    lo_phases: np.ndarray
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        phases = np.array(self.lo_phases, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if phases.size != values.size:
            raise ValueError("phase and value arrays differ in length")
        if phases.size and (phases.min() < 0.0 or phases.max() >= np.pi):
            raise ValueError("LO phases must be normalized to [0, pi)")
        phases.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "lo_phases", phases)
        object.__setattr__(self, "values", values)

    @property
    def n_shots(self) -> int:
        return self.values.size

    def by_phase(self) -> dict[float, np.ndarray]:
        """Values grouped by exact LO phase, keyed in ascending phase order."""
        groups: dict[float, np.ndarray] = {}
        for phase in np.unique(self.lo_phases):
            groups[float(phase)] = self.values[self.lo_phases == phase]
        return groups

    def save(self, csv_path) -> Path:
        """Write shots as CSV (17 significant digits) plus a JSON sidecar.

        The sidecar holds the provenance dict and lands next to the CSV with
        the extension swapped for ``.json``.
        """
        path = Path(csv_path)
        lines = [CSV_HEADER]
        for idx, (phase, value) in enumerate(zip(self.lo_phases, self.values)):
            lines.append(f"{idx},{phase:.17g},{value:.17g}")
        path.write_text("\n".join(lines) + "\n")
        sidecar = path.with_suffix(".json")
        sidecar.write_text(json.dumps(self.provenance, indent=2, sort_keys=True) + "\n")
        return sidecar

    @classmethod
    def load(cls, csv_path) -> "HomodyneDataset":
        path = Path(csv_path)
        lines = path.read_text().strip().splitlines()
        if not lines or lines[0].strip() != CSV_HEADER:
            raise ValueError(f"{path}: expected header '{CSV_HEADER}'")
        phases, values = [], []
        for line in lines[1:]:
            _, phase, value = line.split(",")
            phases.append(float(phase))
            values.append(float(value))
        sidecar = path.with_suffix(".json")
        provenance = json.loads(sidecar.read_text()) if sidecar.exists() else {}
        return cls(np.array(phases), np.array(values), provenance)


@dataclass(frozen=True)
class Reconstruction:
    """Reconstructed state with least-squares standard errors.

    ``mean_cov`` (2x2) and ``var_cov`` (3x3, parameters Vxx, Vpp, Vxp) are the
    estimator covariance matrices behind the per-entry standard errors;
    ``clamped`` records a projection onto the physical cone.
    """

    state: GaussianState
    mean_stderr: np.ndarray
    cov_stderr: np.ndarray
    mean_cov: np.ndarray
    var_cov: np.ndarray
    clamped: bool
    n_shots: int


def _sandwich(design: np.ndarray, noise_var: np.ndarray) -> np.ndarray:
    pseudo = np.linalg.pinv(design.T @ design) @ design.T
    return pseudo @ np.diag(noise_var) @ pseudo.T


def reconstruct(dataset: HomodyneDataset) -> Reconstruction:
    """Estimate mean and covariance of the measured mode from a dataset.

    Raises :class:`InsufficientPhasesError` below three distinct phases and
    :class:`UnphysicalReconstructionError` when the estimate breaks the
    uncertainty bound by more than three standard errors; smaller violations
    are projected back onto the physical cone.
    """
    groups = dataset.by_phase()
    if len(groups) < MIN_DISTINCT_PHASES:
        raise InsufficientPhasesError(
            f"insufficient phases: {len(groups)} distinct, need {MIN_DISTINCT_PHASES}"
        )
    counts = {phase: vals.size for phase, vals in groups.items()}
    thin = {phase: n for phase, n in counts.items() if n < MIN_SHOTS_PER_PHASE}
    if thin:
        raise ValueError(f"too few shots per phase: {thin}")

    phases = np.array(sorted(groups))
    n = np.array([counts[p] for p in phases], dtype=float)
    m = np.array([groups[p].mean() for p in phases])
    v = np.array([groups[p].var(ddof=1) for p in phases])

    design_mean = np.column_stack([np.cos(phases), np.sin(phases)])
    mean_est, *_ = np.linalg.lstsq(design_mean, m, rcond=None)
    mean_cov = _sandwich(design_mean, v / n)

    design_var = np.column_stack(
        [np.cos(phases) ** 2, np.sin(phases) ** 2, np.sin(2.0 * phases)]
    )
    var_est, *_ = np.linalg.lstsq(design_var, v, rcond=None)
    var_cov = _sandwich(design_var, (v * np.sqrt(2.0 / n)) ** 2)

    vxx, vpp, vxp = var_est
    cov = np.array([[vxx, vxp], [vxp, vpp]])
    det = vxx * vpp - vxp * vxp
    if det <= 0.0:
        raise UnphysicalReconstructionError("unphysical reconstruction: det <= 0")
    nu = np.sqrt(det)
    grad = np.array([vpp, vxx, -2.0 * vxp]) / (2.0 * nu)
    nu_stderr = float(np.sqrt(max(grad @ var_cov @ grad, 0.0)))
    clamped = False
    if nu < VACUUM_VARIANCE:
        if VACUUM_VARIANCE - nu >= 3.0 * nu_stderr:
            raise UnphysicalReconstructionError(
                f"unphysical reconstruction: nu={nu:.6g} "
                f"violates 1/2 by more than 3 stderr ({nu_stderr:.2g})"
            )
        cov = cov * (VACUUM_VARIANCE / nu)
        clamped = True

    state = GaussianState(mean_est, cov)
    var_se = np.sqrt(np.clip(np.diag(var_cov), 0.0, None))
    cov_stderr = np.array([[var_se[0], var_se[2]], [var_se[2], var_se[1]]])
    mean_stderr = np.sqrt(np.clip(np.diag(mean_cov), 0.0, None))
    return Reconstruction(
        state=state,
        mean_stderr=mean_stderr,
        cov_stderr=cov_stderr,
        mean_cov=mean_cov,
        var_cov=var_cov,
        clamped=clamped,
        n_shots=dataset.n_shots,
    )


def ellipse(state: GaussianState, n_sigma: float = 1.0, n_points: int = 256) -> np.ndarray:
    """Covariance ellipse of a single-mode state, sampled as (n_points, 2).

    Points trace mean + n_sigma * sqrt(V) applied to the unit circle; the
    curve closes implicitly (the last point precedes the first).
    """
    if state.n_modes != 1:
        raise ValueError("ellipse is defined for single-mode states")
    if n_sigma <= 0:
        raise ValueError("n_sigma must be positive")
    eigvals, eigvecs = np.linalg.eigh(state.cov)
    root = eigvecs @ np.diag(np.sqrt(eigvals)) @ eigvecs.T
    angles = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
    circle = np.stack([np.cos(angles), np.sin(angles)])
    return (state.mean[:, None] + n_sigma * root @ circle).T
