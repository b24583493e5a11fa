import numpy as np
import pytest

from eprgate.metrics import GridSpec, fidelity
from eprgate.oracle import (
    TOLERANCE,
    classical_bound_check,
    random_state_pair,
    squeezed_vacuum_overlap,
    validation_suite,
    wigner_overlap_fidelity,
)
from eprgate.protocol import GateConfig, run_gate_analytic
from eprgate.states import displace, squeeze, vacuum


def test_vacuum_overlap_is_unity():
    verdict = wigner_overlap_fidelity(vacuum(1), vacuum(1))
    assert verdict.passed
    assert verdict.brute_force == pytest.approx(1.0, abs=1e-6)


def test_squeezed_vacuum_pair_overlaps():
    # 10 dB of squeezing relative to vacuum: delta_r = ln(10)/2
    r2 = np.log(10.0) / 2.0
    verdict = wigner_overlap_fidelity(squeeze(vacuum(1), 0, r2), vacuum(1))
    analytic = squeezed_vacuum_overlap(0.0, r2)
    assert analytic == pytest.approx(0.5749595745760689, abs=1e-12)
    assert verdict.closed_form == pytest.approx(analytic, abs=1e-9)
    assert abs(verdict.brute_force - analytic) < TOLERANCE

    # a second anchor with e^(-2 delta_r) = 0.2
    r3 = np.log(5.0) / 2.0
    verdict = wigner_overlap_fidelity(squeeze(vacuum(1), 0, r3), vacuum(1))
    analytic = squeezed_vacuum_overlap(0.0, r3)
    assert analytic == pytest.approx(0.7453559924999299, abs=1e-12)
    assert abs(verdict.brute_force - analytic) < TOLERANCE


def test_squeezed_overlap_depends_only_on_difference():
    assert squeezed_vacuum_overlap(0.3, 0.9) == pytest.approx(
        squeezed_vacuum_overlap(-0.2, 0.4), abs=1e-15
    )


def test_golden_gate_scenario_certified():
    result = run_gate_analytic(GateConfig.for_target(10.0, epr_db=12.0), vacuum(1))
    verdict = wigner_overlap_fidelity(result.target, result.output)
    assert verdict.passed
    assert verdict.closed_form == pytest.approx(0.7805718703129106, abs=1e-9)
    assert verdict.abs_diff < TOLERANCE


def test_classical_bound_verdict():
    verdict = classical_bound_check()
    assert verdict.passed
    assert abs(verdict.closed_form - 0.5) < 1e-12
    assert abs(verdict.brute_force - 0.5) < TOLERANCE


def test_random_pairs_certified():
    rng = np.random.default_rng(31)
    for _ in range(10):
        pure, noisy = random_state_pair(rng)
        verdict = wigner_overlap_fidelity(pure, noisy)
        assert verdict.passed, verdict
        assert verdict.closed_form == pytest.approx(
            fidelity(pure, noisy).fidelity, abs=1e-15
        )


def test_grid_refinement_convergence():
    result = run_gate_analytic(GateConfig.for_target(10.0, epr_db=12.0), vacuum(1))
    grid = GridSpec.covering([result.target, result.output], step=0.05)
    fine = GridSpec(grid.x_min, grid.x_max, grid.p_min, grid.p_max, 0.025)
    coarse_value = wigner_overlap_fidelity(result.target, result.output, grid).brute_force
    fine_value = wigner_overlap_fidelity(result.target, result.output, fine).brute_force
    assert abs(fine_value - coarse_value) < 1e-5


def test_coverage_violation_rejected():
    small = GridSpec(-2.0, 2.0, -2.0, 2.0, 0.05)
    with pytest.raises(ValueError, match="does not cover"):
        wigner_overlap_fidelity(vacuum(1), displace(vacuum(1), 0, 1.5, 0.0), small)


def test_verdict_serialization_uses_pass_key():
    verdict = classical_bound_check()
    payload = verdict.to_dict()
    assert payload["pass"] is True
    assert set(payload) == {"name", "closed_form", "brute_force", "abs_diff", "pass"}


def test_validation_suite_all_pass():
    verdicts = validation_suite(seed=7, n_random_pairs=3)
    assert len(verdicts) >= 7
    assert all(v.passed for v in verdicts)
