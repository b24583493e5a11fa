"""Gaussian states of N optical modes and the linear-optics operations on them.

A state is carried by its mean quadrature vector and covariance matrix in the
ordering (X1, P1, ..., XN, PN), with hbar = 1 so the vacuum variance of every
quadrature is 1/2.  All unitary operations are symplectic maps on phase space;
loss is the usual Gaussian attenuation channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

VACUUM_VARIANCE = 0.5

SYMMETRY_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10
PHYSICALITY_TOL = 1e-8

R_MIN = 1e-6


class UnphysicalStateError(ValueError):
    """Covariance matrix violates the uncertainty principle."""


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form for ``n_modes`` modes in XPXP ordering."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), block)


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix, sorted ascending.

    Physical states have every value >= 1/2; pure states sit exactly at 1/2.
    A single mode reduces to sqrt(det); multimode uses |eig(i Omega V)|
    (two-invariant closed forms lose digits near pure states).
    """
    dim = cov.shape[0]
    if dim == 2:
        det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
        return np.array([np.sqrt(max(det, 0.0))])
    eigs = np.abs(np.linalg.eigvals(1j * omega(dim // 2) @ cov))
    return np.sort(eigs)[::2]


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of an N-mode Gaussian state.

    Instances are immutable: every operation returns a new state.  The
    constructor symmetrizes the covariance, then rejects matrices whose
    smallest symplectic eigenvalue falls below 1/2 beyond float tolerance.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size == 0 or mean.size % 2 != 0:
            raise ValueError(f"mean length {mean.size} is not 2N with N >= 1")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        asym = np.max(np.abs(cov - cov.T))
        if asym > SYMMETRY_TOL:
            raise ValueError(f"covariance asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
        cov = (cov + cov.T) / 2.0
        nu_min = symplectic_eigenvalues(cov).min()
        if nu_min < VACUUM_VARIANCE - PHYSICALITY_TOL:
            raise UnphysicalStateError(
                f"smallest symplectic eigenvalue {nu_min:.12g} below 1/2"
            )
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def mode_mean(self, mode: int) -> np.ndarray:
        """(X, P) mean of one mode."""
        _check_mode(self, mode)
        return self.mean[2 * mode : 2 * mode + 2]

    def mode_cov(self, mode: int) -> np.ndarray:
        """2x2 covariance block of one mode."""
        _check_mode(self, mode)
        return self.cov[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2]


@dataclass(frozen=True)
class SymplecticTransform:
    """Linear phase-space map S, d acting as mean -> S mean + d, cov -> S cov S^T."""

    matrix: np.ndarray
    displacement: np.ndarray = field(default=None)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        dim = matrix.shape[0]
        if matrix.shape != (dim, dim) or dim % 2 != 0:
            raise ValueError(f"matrix shape {matrix.shape} is not 2Nx2N")
        disp = self.displacement
        disp = np.zeros(dim) if disp is None else np.array(disp, dtype=float).reshape(-1)
        if disp.size != dim:
            raise ValueError("displacement length does not match matrix")
        form = omega(dim // 2)
        defect = np.max(np.abs(matrix @ form @ matrix.T - form))
        if defect > SYMPLECTIC_TOL:
            raise ValueError(f"matrix is not symplectic (defect {defect:.3e})")
        matrix.flags.writeable = False
        disp.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "displacement", disp)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def apply(self, state: GaussianState) -> GaussianState:
        if state.n_modes != self.n_modes:
            raise ValueError("transform and state mode counts differ")
        mean = self.matrix @ state.mean + self.displacement
        cov = self.matrix @ state.cov @ self.matrix.T
        return GaussianState(mean, cov)

    def __matmul__(self, other: "SymplecticTransform") -> "SymplecticTransform":
        """Composition: (A @ B).apply(s) == A.apply(B.apply(s))."""
        return SymplecticTransform(
            self.matrix @ other.matrix,
            self.matrix @ other.displacement + self.displacement,
        )

    @classmethod
    def identity(cls, n_modes: int) -> "SymplecticTransform":
        return cls(np.eye(2 * n_modes))

    @classmethod
    def squeezer(cls, n_modes: int, mode: int, r: float, phi: float = 0.0) -> "SymplecticTransform":
        """Single-mode squeezer; phi = 0 squeezes X by e^(-r)."""
        rot = _rotation_2x2(phi)
        block = rot @ np.diag([np.exp(-r), np.exp(r)]) @ rot.T
        return cls(_embed_single(n_modes, mode, block))

    @classmethod
    def rotator(cls, n_modes: int, mode: int, theta: float) -> "SymplecticTransform":
        """Counterclockwise phase-space rotation; theta = pi/2 maps (X,P) -> (-P,X)."""
        return cls(_embed_single(n_modes, mode, _rotation_2x2(theta)))

    @classmethod
    def beam_splitter(cls, n_modes: int, i: int, j: int, reflectivity: float) -> "SymplecticTransform":
        """Two-mode mixer with the convention documented at :func:`beamsplitter`."""
        root_r = np.sqrt(reflectivity)
        root_t = np.sqrt(1.0 - reflectivity)
        mixing = np.array([[root_r, root_t], [root_t, -root_r]])
        return cls(_embed_pair(n_modes, i, j, mixing))

    @classmethod
    def displacer(cls, n_modes: int, mode: int, dx: float, dp: float) -> "SymplecticTransform":
        disp = np.zeros(2 * n_modes)
        disp[2 * mode] = dx
        disp[2 * mode + 1] = dp
        return cls(np.eye(2 * n_modes), disp)


def _rotation_2x2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _embed_single(n_modes: int, mode: int, block: np.ndarray) -> np.ndarray:
    full = np.eye(2 * n_modes)
    full[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = block
    return full


def _embed_pair(n_modes: int, i: int, j: int, mixing: np.ndarray) -> np.ndarray:
    # mixing acts on the mode amplitudes, identically for X and P rows
    full = np.eye(2 * n_modes)
    for a, ma in ((i, 0), (j, 1)):
        for b, mb in ((i, 0), (j, 1)):
            full[2 * a : 2 * a + 2, 2 * b : 2 * b + 2] = mixing[ma, mb] * np.eye(2)
    return full


def _check_mode(state: GaussianState, mode: int):
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes} modes")


def vacuum(n_modes: int) -> GaussianState:
    """N-mode vacuum: zero mean, covariance I/2."""
    if n_modes < 1:
        raise ValueError("mode count must be >= 1")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes) * VACUUM_VARIANCE)


def squeeze(state: GaussianState, mode: int, r: float, phi: float = 0.0) -> GaussianState:
    """Squeeze one mode: for phi = 0 the X variance scales by e^(-2r)."""
    _check_mode(state, mode)
    return SymplecticTransform.squeezer(state.n_modes, mode, r, phi).apply(state)


def beamsplitter(state: GaussianState, i: int, j: int, reflectivity: float) -> GaussianState:
    """Mix modes i and j on a beam splitter of reflectivity R in (0, 1).

    Port i carries sqrt(R)*mode_i + sqrt(1-R)*mode_j and port j carries
    sqrt(1-R)*mode_i - sqrt(R)*mode_j, identically for X and P rows.
    R in {0, 1} is rejected: that is a swap or the identity, not a mixer.
    """
    _check_mode(state, i)
    _check_mode(state, j)
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    if not 0.0 < reflectivity < 1.0:
        raise ValueError(f"reflectivity {reflectivity} outside (0, 1)")
    return SymplecticTransform.beam_splitter(state.n_modes, i, j, reflectivity).apply(state)


def rotate(state: GaussianState, mode: int, theta: float) -> GaussianState:
    """Rotate one mode counterclockwise in phase space by theta."""
    _check_mode(state, mode)
    return SymplecticTransform.rotator(state.n_modes, mode, theta).apply(state)


def displace(state: GaussianState, mode: int, dx: float, dp: float) -> GaussianState:
    """Shift one mode's mean by (dx, dp); covariance unchanged."""
    _check_mode(state, mode)
    mean = state.mean.copy()
    mean[2 * mode] += dx
    mean[2 * mode + 1] += dp
    return GaussianState(mean, state.cov)


def loss(state: GaussianState, mode: int, eta: float) -> GaussianState:
    """Pure attenuation of one mode with transmission eta in [0, 1]."""
    _check_mode(state, mode)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission {eta} outside [0, 1]")
    root = np.sqrt(eta)
    scale = _embed_single(state.n_modes, mode, root * np.eye(2))
    mean = scale @ state.mean
    cov = scale @ state.cov @ scale.T
    block = slice(2 * mode, 2 * mode + 2)
    cov[block, block] += (1.0 - eta) * VACUUM_VARIANCE * np.eye(2)
    return GaussianState(mean, cov)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state of two uncorrelated registers, modes of ``a`` first."""
    mean = np.concatenate([a.mean, b.mean])
    dim_a, dim_b = a.mean.size, b.mean.size
    cov = np.zeros((dim_a + dim_b, dim_a + dim_b))
    cov[:dim_a, :dim_a] = a.cov
    cov[dim_a:, dim_a:] = b.cov
    return GaussianState(mean, cov)


def drop_modes(state: GaussianState, modes) -> GaussianState:
    """Partial trace: discard the listed modes."""
    drop = {int(m) for m in np.atleast_1d(modes)}
    for m in drop:
        _check_mode(state, m)
    if len(drop) >= state.n_modes:
        raise ValueError("cannot drop every mode")
    rows = [k for m in range(state.n_modes) if m not in drop for k in (2 * m, 2 * m + 1)]
    return GaussianState(state.mean[rows], state.cov[np.ix_(rows, rows)])


def epr_pair(entanglement_db: float) -> GaussianState:
    """Two-mode entangled state built from two squeezers and a 50/50 splitter.

    The pair satisfies Var(X1 + X2) = Var(P1 - P2) = 10^(-entanglement_db/10),
    where two uncorrelated vacua would give 1.
    """
    if entanglement_db < 0:
        raise ValueError("entanglement level in dB must be >= 0")
    r = entanglement_db * np.log(10.0) / 20.0
    state = vacuum(2)
    state = squeeze(state, 0, r, 0.0)
    state = squeeze(state, 1, r, np.pi / 2.0)
    return beamsplitter(state, 0, 1, 0.5)
