"""Spin-chain embedding of the data wave function.

Builds a local Pauli-string operator basis, finds the weight vector whose
Hamiltonian carries the embedded wave function as an eigen-mode (via the
correlation-matrix null space), applies first-order perturbation theory,
and turns the perturbed modes into per-sequence uncertainty features.
"""

from semuq.qtn.basis import OperatorBasis, build_operator_basis, operator_basis
from semuq.qtn.features import (
    BoundCheck,
    UqFeatureMatrix,
    nullspace_perturbation_bound_check,
    uncertainty_features,
    uq_score,
)
from semuq.qtn.qcm import (
    NullSpaceResult,
    QcmMatrix,
    assemble_hamiltonian,
    null_space_weights,
    quantum_correlation_matrix,
)
from semuq.qtn.spectrum import (
    FirstOrderCorrections,
    Spectrum,
    eigendecompose,
    first_order_corrections,
)

__all__ = [
    "BoundCheck",
    "FirstOrderCorrections",
    "NullSpaceResult",
    "OperatorBasis",
    "QcmMatrix",
    "Spectrum",
    "UqFeatureMatrix",
    "assemble_hamiltonian",
    "build_operator_basis",
    "eigendecompose",
    "first_order_corrections",
    "null_space_weights",
    "nullspace_perturbation_bound_check",
    "operator_basis",
    "quantum_correlation_matrix",
    "uncertainty_features",
    "uq_score",
]
