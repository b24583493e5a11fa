"""Phase-space simulator for an EPR-assisted measurement-and-feed-forward
squeezing gate: Gaussian states, homodyne conditioning, the gate protocol,
evaluation metrics, tomography, and brute-force validation oracles."""

from .measurement import (
    HomodyneOutcome,
    homodyne_condition,
    homodyne_sample,
    quadrature_marginal,
    sample_quadrature,
    shot_stream,
)
from .metrics import (
    FidelityReport,
    GridSpec,
    SqueezingReport,
    WignerField,
    epr_quality,
    fidelity,
    squeezing_db,
    variance_db,
    wigner,
)
from .oracle import OracleVerdict, classical_bound_check, wigner_overlap_fidelity
from .protocol import (
    GateConfig,
    GateResult,
    optimal_gains,
    reflectivity_for_target,
    run_complex,
    run_gate_analytic,
    run_gate_shots,
)
from .states import (
    GaussianState,
    SymplecticTransform,
    UnphysicalStateError,
    beamsplitter,
    displace,
    drop_modes,
    epr_pair,
    loss,
    rotate,
    squeeze,
    symplectic_eigenvalues,
    tensor,
    vacuum,
)
from .tomography import HomodyneDataset, Reconstruction, ellipse, reconstruct

__all__ = [
    "FidelityReport",
    "GateConfig",
    "GateResult",
    "GaussianState",
    "GridSpec",
    "HomodyneDataset",
    "HomodyneOutcome",
    "OracleVerdict",
    "Reconstruction",
    "SqueezingReport",
    "SymplecticTransform",
    "UnphysicalStateError",
    "WignerField",
    "beamsplitter",
    "classical_bound_check",
    "displace",
    "drop_modes",
    "ellipse",
    "epr_pair",
    "epr_quality",
    "fidelity",
    "homodyne_condition",
    "homodyne_sample",
    "loss",
    "optimal_gains",
    "quadrature_marginal",
    "reconstruct",
    "reflectivity_for_target",
    "rotate",
    "run_complex",
    "run_gate_analytic",
    "run_gate_shots",
    "sample_quadrature",
    "shot_stream",
    "squeeze",
    "squeezing_db",
    "symplectic_eigenvalues",
    "tensor",
    "vacuum",
    "variance_db",
    "wigner",
    "wigner_overlap_fidelity",
]

__version__ = "0.1.0"
