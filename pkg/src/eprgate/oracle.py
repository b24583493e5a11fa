"""Brute-force validators for the closed-form metrics.

The overlap of a pure state with any state equals 2*pi times the phase-space
integral of their Wigner functions, so a dense grid quadrature provides an
independent check of the closed-form fidelity before sweep results are
trusted.  Analytic special cases (squeezed-vacuum pairs, the no-entanglement
teleportation bound) anchor the integral itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics, protocol, states
from .metrics import GridSpec
from .states import GaussianState

TOLERANCE = 1e-4
COVERAGE_SIGMA = 6.0


@dataclass(frozen=True)
class OracleVerdict:
    """Closed-form value vs brute-force value for one scenario."""

    name: str
    closed_form: float
    brute_force: float
    abs_diff: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "closed_form": self.closed_form,
            "brute_force": self.brute_force,
            "abs_diff": self.abs_diff,
            "pass": self.passed,
        }


def _verdict(name: str, closed: float, brute: float, extra_ok: bool = True) -> OracleVerdict:
    diff = abs(closed - brute)
    return OracleVerdict(name, float(closed), float(brute), float(diff),
                         bool(diff <= TOLERANCE and extra_ok))


def wigner_overlap_fidelity(
    pure: GaussianState,
    actual: GaussianState,
    grid: GridSpec | None = None,
    name: str = "wigner-overlap",
) -> OracleVerdict:
    """Compare closed-form fidelity against the Wigner overlap integral.

    With no explicit grid, one covering both states to 6.5 sigma is built;
    an explicit grid must cover both states to 6 sigma or it is rejected.
    """
    if grid is None:
        grid = GridSpec.covering([pure, actual])
    for label, state in (("pure", pure), ("actual", actual)):
        if not grid.covers(state, COVERAGE_SIGMA):
            raise ValueError(f"grid does not cover the {label} state to 6 sigma")
    w_pure = metrics.wigner(pure, grid)
    w_actual = metrics.wigner(actual, grid)
    brute = 2.0 * np.pi * np.sum(w_pure.values * w_actual.values) * grid.step**2
    closed = metrics.fidelity(pure, actual).fidelity
    return _verdict(name, closed, brute)


def squeezed_vacuum_overlap(r1: float, r2: float) -> float:
    """Analytic fidelity of two squeezed vacua with the same axis: 1/cosh(r2-r1)."""
    return 1.0 / np.cosh(r2 - r1)


def classical_bound_check() -> OracleVerdict:
    """Unity-gain gate with no entanglement on vacuum: fidelity exactly 1/2.

    Passes only when the closed form hits 0.5 to 1e-12 and the brute-force
    integral agrees to the oracle tolerance.
    """
    config = protocol.GateConfig(reflectivity_r=0.5, epr_db=0.0)
    result = protocol.run_gate_analytic(config, states.vacuum(1))
    closed = metrics.fidelity(result.target, result.output).fidelity
    brute = wigner_overlap_fidelity(result.target, result.output).brute_force
    return _verdict("classical-bound", closed, brute,
                    extra_ok=abs(closed - 0.5) <= 1e-12)


def random_single_mode_state(
    rng: np.random.Generator,
    max_squeeze_db: float = 12.0,
    max_displacement: float = 3.0,
) -> GaussianState:
    """Random squeezed, rotated, displaced single-mode state (for validation)."""
    r = rng.uniform(0.0, max_squeeze_db) * np.log(10.0) / 20.0
    state = states.squeeze(states.vacuum(1), 0, r)
    state = states.rotate(state, 0, rng.uniform(0.0, np.pi))
    dx, dp = rng.uniform(-max_displacement, max_displacement, size=2)
    return states.displace(state, 0, dx, dp)


def random_state_pair(
    rng: np.random.Generator,
    max_squeeze_db: float = 12.0,
    max_displacement: float = 3.0,
) -> tuple[GaussianState, GaussianState]:
    """A random pure state and a nearby noisy state.

    The partner reuses the pure state's parameters with jittered squeezing,
    axis and mean plus added isotropic noise, so the pair's overlap is far
    from both 0 and 1 and the comparison exercises real digits.
    """
    r = rng.uniform(0.0, max_squeeze_db) * np.log(10.0) / 20.0
    angle = rng.uniform(0.0, np.pi)
    center = rng.uniform(-max_displacement + 0.8, max_displacement - 0.8, size=2)

    def build(r_val, angle_val, mean_val):
        st = states.squeeze(states.vacuum(1), 0, r_val)
        st = states.rotate(st, 0, angle_val)
        return states.displace(st, 0, *mean_val)

    pure = build(r, angle, center)
    partner = build(
        max(r + rng.uniform(-0.2, 0.2), 0.0),
        angle + rng.uniform(-0.3, 0.3),
        center + rng.uniform(-0.8, 0.8, size=2),
    )
    noisy_cov = partner.cov + rng.uniform(0.0, 0.3) * np.eye(2)
    return pure, GaussianState(partner.mean, noisy_cov)


def validation_suite(seed: int = 2024, n_random_pairs: int = 5) -> list[OracleVerdict]:
    """The scenario battery behind ``eprgate validate``."""
    verdicts = []

    vac = states.vacuum(1)
    verdicts.append(wigner_overlap_fidelity(vac, vac, name="vacuum-vs-vacuum"))

    r2 = np.log(10.0) / 2.0  # 10 dB of squeezing
    squeezed = states.squeeze(states.vacuum(1), 0, r2)
    verdict = wigner_overlap_fidelity(squeezed, vac, name="squeezed-vs-vacuum")
    analytic = squeezed_vacuum_overlap(0.0, r2)
    verdicts.append(
        _verdict("squeezed-vs-vacuum-analytic", analytic, verdict.brute_force)
    )
    verdicts.append(verdict)

    verdicts.append(classical_bound_check())

    result = protocol.run_gate_analytic(
        protocol.GateConfig.for_target(10.0, epr_db=12.0), vac
    )
    verdicts.append(
        wigner_overlap_fidelity(result.target, result.output, name="gate-10db-12db-epr")
    )

    rng = np.random.default_rng(seed)
    for k in range(n_random_pairs):
        pure, noisy = random_state_pair(rng)
        verdicts.append(
            wigner_overlap_fidelity(pure, noisy, name=f"random-pair-{k}")
        )
    return verdicts
