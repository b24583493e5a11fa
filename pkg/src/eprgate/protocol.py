"""The measurement-and-feed-forward squeezing gate.

The input beam interferes with one arm of an EPR pair on a beam splitter of
reflectivity R; X is read on one output port and P on the other, and the
readings (scaled by the feed-forward gains) displace the second EPR arm.
With the gains matched to R the output obeys

    X_out = sqrt(R/(1-R)) X_in + (X_epr1 + X_epr2)
    P_out = sqrt((1-R)/R) P_in + (-P_epr1 + P_epr2)

so both added noise terms carry the EPR sum/difference variance, which
vanishes for perfect entanglement.  Amplitude squeezing needs R < 1/2, phase
squeezing R > 1/2, and R = 1/2 is plain unity-gain teleportation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import measurement, states
from .states import R_MIN, GaussianState
from .tomography import HomodyneDataset

AMPLITUDE = "amplitude"
PHASE = "phase"


@dataclass(frozen=True)
class GateConfig:
    """All protocol knobs.

    ``gain_x``/``gain_p`` of ``None`` mean "matched to R" (see
    :func:`optimal_gains`); explicit values model gain mistuning.
    ``coupler_rd`` is the transmission of the displacement coupler (1.0 =
    ideal displacement) and ``detection_eta`` the homodyne efficiency,
    modeled as loss on the measured ports.
    """

    reflectivity_r: float
    epr_db: float = 12.0
    gain_x: float | None = None
    gain_p: float | None = None
    coupler_rd: float = 1.0
    detection_eta: float = 1.0

    def __post_init__(self):
        if not R_MIN <= self.reflectivity_r <= 1.0 - R_MIN:
            raise ValueError(
                f"reflectivity {self.reflectivity_r} outside [{R_MIN}, {1 - R_MIN}]"
            )
        if not self.epr_db >= 0.0:
            raise ValueError("negative EPR entanglement level")
        for name, gain in (("gain_x", self.gain_x), ("gain_p", self.gain_p)):
            if gain is not None and not (np.isfinite(gain) and gain > 0.0):
                raise ValueError(f"{name} must be finite and positive")
        if not 0.0 < self.coupler_rd <= 1.0:
            raise ValueError("coupler transmission outside (0, 1]")
        if not 0.0 < self.detection_eta <= 1.0:
            raise ValueError("detection efficiency outside (0, 1]")

    @classmethod
    def for_target(cls, target_db: float, axis: str = AMPLITUDE, **kwargs) -> "GateConfig":
        """Config squeezing the chosen axis by ``target_db`` decibels."""
        return cls(reflectivity_for_target(target_db, axis), **kwargs)

    def gains(self) -> tuple[float, float]:
        gx, gp = optimal_gains(self.reflectivity_r)
        if self.gain_x is not None:
            gx = self.gain_x
        if self.gain_p is not None:
            gp = self.gain_p
        return gx, gp

    def with_overrides(self, **kwargs) -> "GateConfig":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {
            "reflectivity_r": self.reflectivity_r,
            "epr_db": self.epr_db,
            "gain_x": self.gain_x,
            "gain_p": self.gain_p,
            "coupler_rd": self.coupler_rd,
            "detection_eta": self.detection_eta,
        }


@dataclass(frozen=True)
class GateResult:
    """Gate output plus the noiseless map of the same input as fidelity target."""

    output: GaussianState
    target: GaussianState
    config: GateConfig


def reflectivity_for_target(target_db: float, axis: str = AMPLITUDE) -> float:
    """Beam-splitter reflectivity realizing a target squeezing level.

    The X gain is sqrt(R/(1-R)), so amplitude squeezing by s^2 =
    10^(-target_db/10) needs R = s^2/(1+s^2) < 1/2; the phase axis mirrors
    it with R -> 1-R.  Zero target gives R = 1/2 for either axis.
    """
    if target_db < 0.0:
        raise ValueError("negative target squeezing")
    s2 = 10.0 ** (-target_db / 10.0)
    if axis == AMPLITUDE:
        return s2 / (1.0 + s2)
    if axis == PHASE:
        return 1.0 / (1.0 + s2)
    raise ValueError(f"axis must be '{AMPLITUDE}' or '{PHASE}', got {axis!r}")


def optimal_gains(reflectivity_r: float) -> tuple[float, float]:
    """Feed-forward gains that cancel the anti-squeezed EPR quadratures.

    With port X carrying sqrt(R) X_in + sqrt(1-R) X_epr1 and port P carrying
    sqrt(1-R) P_in - sqrt(R) P_epr1, the choice g_x = 1/sqrt(1-R), g_p =
    1/sqrt(R) leaves exactly the EPR sum (difference) noise on X_out (P_out).
    """
    if not R_MIN <= reflectivity_r <= 1.0 - R_MIN:
        raise ValueError(
            f"reflectivity {reflectivity_r} outside [{R_MIN}, {1 - R_MIN}]"
        )
    return 1.0 / np.sqrt(1.0 - reflectivity_r), 1.0 / np.sqrt(reflectivity_r)


def _noise_term(coef_sq: float, epr_factor: float) -> float:
    # avoids 0 * inf when the anti-squeezed quadrature cancels exactly
    if coef_sq < 1e-18:
        return 0.0
    return coef_sq * epr_factor


def run_gate_analytic(config: GateConfig, input_state: GaussianState) -> GateResult:
    """Exact output statistics of the gate for a single-mode Gaussian input.

    The output operator is a fixed linear combination of the input, the two
    EPR arms, and (for imperfect detection or coupler) extra vacua, so mean
    and covariance follow in closed form.  ``epr_db`` may be ``inf`` here,
    giving the noiseless map.
    """
    if input_state.n_modes != 1:
        raise ValueError("gate input must be a single-mode state")
    r_bs = config.reflectivity_r
    s = np.sqrt(r_bs / (1.0 - r_bs))
    target_mat = np.diag([s, 1.0 / s])
    target = GaussianState(target_mat @ input_state.mean,
                           target_mat @ input_state.cov @ target_mat)

    gx, gp = config.gains()
    root_eta = np.sqrt(config.detection_eta)
    # products g_x*sqrt(1-R) and g_p*sqrt(R) are exactly 1 for matched gains
    gx_bs = 1.0 if config.gain_x is None else gx * np.sqrt(1.0 - r_bs)
    gp_bs = 1.0 if config.gain_p is None else gp * np.sqrt(r_bs)
    ax = gx * root_eta * np.sqrt(r_bs)
    ap = gp * root_eta * np.sqrt(1.0 - r_bs)
    bx = gx_bs * root_eta
    bp = -gp_bs * root_eta
    c = np.sqrt(config.coupler_rd)

    e_minus = 10.0 ** (-config.epr_db / 10.0)
    e_plus = np.inf if np.isinf(config.epr_db) else 10.0 ** (config.epr_db / 10.0)
    extra_x = (gx * gx * (1.0 - config.detection_eta) + (1.0 - config.coupler_rd)) / 2.0
    extra_p = (gp * gp * (1.0 - config.detection_eta) + (1.0 - config.coupler_rd)) / 2.0
    noise_x = (
        _noise_term((bx + c) ** 2 / 4.0, e_minus)
        + _noise_term((bx - c) ** 2 / 4.0, e_plus)
        + extra_x
    )
    noise_p = (
        _noise_term((bp + c) ** 2 / 4.0, e_plus)
        + _noise_term((bp - c) ** 2 / 4.0, e_minus)
        + extra_p
    )

    gain_mat = np.diag([ax, ap])
    out_mean = gain_mat @ input_state.mean
    out_cov = gain_mat @ input_state.cov @ gain_mat + np.diag([noise_x, noise_p])
    return GateResult(GaussianState(out_mean, out_cov), target, config)


def prepared_state(config: GateConfig, input_state: GaussianState) -> GaussianState:
    """Three-mode state just before the homodyne stage.

    Mode 0 carries the X-measured port, mode 1 the P-measured port, mode 2
    the EPR arm that will be displaced; detection loss is already applied to
    the measured ports.
    """
    if input_state.n_modes != 1:
        raise ValueError("gate input must be a single-mode state")
    if np.isinf(config.epr_db):
        raise ValueError("shot simulation needs a finite EPR level")
    pre = states.tensor(input_state, states.epr_pair(config.epr_db))
    pre = states.beamsplitter(pre, 0, 1, config.reflectivity_r)
    if config.detection_eta < 1.0:
        pre = states.loss(pre, 0, config.detection_eta)
        pre = states.loss(pre, 1, config.detection_eta)
    return pre


def output_state_for_outcomes(
    config: GateConfig, pre: GaussianState, x_value: float, p_value: float
) -> GaussianState:
    """Output mode after one shot whose homodyne readings are given.

    Conditions the prepared state on X = x_value (mode 0) then P = p_value
    (next port), and displaces the remaining EPR arm by the gain-scaled
    readings, through the coupler when it is not ideal.
    """
    gx, gp = config.gains()
    st = measurement.homodyne_condition(pre, 0, 0.0, x_value)
    st = measurement.homodyne_condition(st, 0, np.pi / 2.0, p_value)
    dx, dp = gx * x_value, gp * p_value
    if config.coupler_rd == 1.0:
        return states.displace(st, 0, dx, dp)
    scale = np.sqrt(1.0 - config.coupler_rd)
    aux = states.displace(states.vacuum(1), 0, dx / scale, dp / scale)
    st = states.beamsplitter(states.tensor(st, aux), 0, 1, config.coupler_rd)
    return states.drop_modes(st, 1)


class _ShotKernel:
    """Exact per-shot sampling coefficients for one gate configuration.

    Gaussian conditioning and all downstream optics are affine in the
    measured outcomes, so the chain is probed at outcomes (0,0), (1,0) and
    (0,1) to extract the affine map once; every shot then only needs three
    standard normals and scalar arithmetic.  The sampled joint distribution
    is identical to conditioning shot by shot.
    """

    def __init__(self, config: GateConfig, pre: GaussianState, phases):
        self.x_mean, x_var = measurement.quadrature_marginal(pre, 0, 0.0)
        self.x_sigma = np.sqrt(x_var)
        post0 = measurement.homodyne_condition(pre, 0, 0.0, 0.0)
        post1 = measurement.homodyne_condition(pre, 0, 0.0, 1.0)
        p_mean0, p_var = measurement.quadrature_marginal(post0, 0, np.pi / 2.0)
        p_mean1, _ = measurement.quadrature_marginal(post1, 0, np.pi / 2.0)
        self.p_base = p_mean0
        self.p_slope = p_mean1 - p_mean0
        self.p_sigma = np.sqrt(p_var)

        s00 = output_state_for_outcomes(config, pre, 0.0, 0.0)
        s10 = output_state_for_outcomes(config, pre, 1.0, 0.0)
        s01 = output_state_for_outcomes(config, pre, 0.0, 1.0)
        base = s00.mean
        slope_x = s10.mean - base
        slope_p = s01.mean - base
        self.out_cov = s00.cov

        cos = np.cos(phases)
        sin = np.sin(phases)
        self.m_base = cos * base[0] + sin * base[1]
        self.m_x = cos * slope_x[0] + sin * slope_x[1]
        self.m_p = cos * slope_p[0] + sin * slope_p[1]
        cov = self.out_cov
        self.out_sigma = np.sqrt(
            cos * cos * cov[0, 0] + sin * sin * cov[1, 1] + 2.0 * cos * sin * cov[0, 1]
        )

    def sample(self, k: int, rng: np.random.Generator) -> float:
        """One shot at phase index ``k``; consumes exactly three normals."""
        z1, z2, z3 = rng.standard_normal(3)
        x = self.x_mean + self.x_sigma * z1
        p = self.p_base + self.p_slope * x + self.p_sigma * z2
        return self.m_base[k] + self.m_x[k] * x + self.m_p[k] * p + self.out_sigma[k] * z3

    def output_moments(self, k: int) -> tuple[float, float]:
        """Exact mean and variance of the dataset values at phase index k."""
        x_var = self.x_sigma**2
        p_var = self.p_sigma**2 + self.p_slope**2 * x_var
        xp_cov = self.p_slope * x_var
        x_mean = self.x_mean
        p_mean = self.p_base + self.p_slope * x_mean
        mean = self.m_base[k] + self.m_x[k] * x_mean + self.m_p[k] * p_mean
        var = (
            self.out_sigma[k] ** 2
            + self.m_x[k] ** 2 * x_var
            + self.m_p[k] ** 2 * p_var
            + 2.0 * self.m_x[k] * self.m_p[k] * xp_cov
        )
        return float(mean), float(var)


def run_gate_shots(
    config: GateConfig,
    input_state: GaussianState,
    n_shots: int,
    output_lo_phases,
    seed,
) -> HomodyneDataset:
    """Monte Carlo run of the full protocol chain.

    Each shot prepares input x EPR, interferes them, samples both homodyne
    ports with exact conditioning, displaces the remaining EPR arm by the
    scaled readings (through the coupler when ``coupler_rd`` < 1), and reads
    one output quadrature at the shot's LO phase (phases cycle round-robin).
    Per-shot RNG substreams keyed on (seed, shot index) make the dataset
    reproducible regardless of execution order; each shot consumes exactly
    three normal variates from its own substream.
    """
    if n_shots < 1:
        raise ValueError("need at least one shot")
    phases = np.array(
        [measurement.normalize_lo_phase(p)[0] for p in np.atleast_1d(output_lo_phases)]
    )
    if phases.size == 0:
        raise ValueError("need at least one output LO phase")

    pre = prepared_state(config, input_state)
    kernel = _ShotKernel(config, pre, phases)
    streams = measurement.spawn_shot_streams(seed, n_shots)
    values = np.empty(n_shots)
    shot_phases = np.empty(n_shots)
    n_phases = phases.size
    for i in range(n_shots):
        k = i % n_phases
        shot_phases[i] = phases[k]
        values[i] = kernel.sample(k, streams[i])

    provenance = {
        "config": config.to_dict(),
        "seed": list(seed) if isinstance(seed, (tuple, list)) else seed,
        "n_shots": n_shots,
        "output_lo_phases": [float(p) for p in phases],
        "input_mean": input_state.mean.tolist(),
        "input_cov": input_state.cov.tolist(),
    }
    return HomodyneDataset(shot_phases, values, provenance)


def run_complex(config: GateConfig, input_state: GaussianState) -> GateResult:
    """Fourier rotation followed by the squeezing gate, as one operation.

    The pi/2 rotation moves information between the quadratures; choosing
    ``config`` to squeeze the quadrature the signal rotated into makes the
    whole map squeeze-after-Fourier exactly, and the result's target is that
    ideal composite applied to the same input.
    """
    return run_gate_analytic(config, fourier(input_state))


def fourier(input_state: GaussianState) -> GaussianState:
    """Phase-space rotation by pi/2: (X, P) -> (-P, X)."""
    if input_state.n_modes != 1:
        raise ValueError("expected a single-mode state")
    return states.rotate(input_state, 0, np.pi / 2.0)
