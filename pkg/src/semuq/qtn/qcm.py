"""Correlation matrix of the operator basis against a state vector.

Entry (i, j) is the symmetrized second moment minus the product of means,
0.5<psi|{Hi,Hj}|psi> - <Hi><Hj>, which for Hermitian operators reduces to
Re(<Hi psi, Hj psi>) - e_i e_j.  The matrix is real, symmetric, and
positive semi-definite; a null-space weight vector assembles a Hamiltonian
whose variance against psi vanishes, i.e. psi is one of its eigen-modes.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from semuq.errors import NumericalError, ParameterError
from semuq.qtn.basis import OperatorBasis

UNIT_NORM_ATOL = 1e-10


@dataclasses.dataclass
class QcmMatrix:
    entries: np.ndarray
    psi: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def validate(self, sym_tol: float = 1e-10, psd_tol: float = 1e-8) -> None:
        asym = float(np.max(np.abs(self.entries - self.entries.T)))
        if asym > sym_tol:
            raise ParameterError(f"correlation matrix asymmetry {asym} exceeds {sym_tol}")
        smallest = float(np.linalg.eigvalsh(self.entries)[0])
        if smallest < -psd_tol:
            raise ParameterError(f"correlation matrix eigenvalue {smallest} below -{psd_tol}")


@dataclasses.dataclass
class NullSpaceResult:
    weights: np.ndarray
    residual: float
    approximate: bool


def _fix_vector_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude entry is real and positive."""
    k = int(np.argmax(np.abs(vec)))
    pivot = vec[k]
    magnitude = abs(pivot)
    if magnitude == 0.0:
        return vec
    if np.iscomplexobj(vec):
        return vec * (pivot.conjugate() / magnitude)
    return vec if pivot > 0 else -vec


def quantum_correlation_matrix(basis: OperatorBasis, psi: np.ndarray) -> QcmMatrix:
    """Covariance matrix of the basis operators in the state psi."""
    psi = np.asarray(psi)
    if psi.shape != (basis.dim,):
        raise ParameterError(
            f"state vector must have shape ({basis.dim},), got {psi.shape}"
        )
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > UNIT_NORM_ATOL:
        raise ParameterError(
            f"state vector norm {norm} violates the unit-norm precondition (tol {UNIT_NORM_ATOL})"
        )
    applied = basis.apply_all(psi.astype(complex))  # row k = H_k psi
    means = (applied @ psi.conj()).real
    gram = (applied.conj() @ applied.T).real
    entries = gram - np.outer(means, means)
    entries = 0.5 * (entries + entries.T)
    return QcmMatrix(entries=entries, psi=np.array(psi))


def null_space_weights(qcm: QcmMatrix, tol: float = 1e-8) -> NullSpaceResult:
    """Unit eigenvector of the smallest correlation-matrix eigenvalue.

    The residual is that eigenvalue (the variance of the assembled
    Hamiltonian against psi).  A residual above ``tol`` flags the result as
    approximate: the weights are still the best local-Hamiltonian fit.
    """
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(qcm.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolve of the correlation matrix failed: {exc}") from exc
    weights = _fix_vector_phase(eigenvectors[:, 0].copy())
    residual = float(eigenvalues[0])
    # the residual is a variance, so a negative value is pure float noise;
    # judge exactness by magnitude or a noise-level tolerance never triggers
    return NullSpaceResult(
        weights=weights, residual=residual, approximate=abs(residual) > tol
    )


def assemble_hamiltonian(basis: OperatorBasis, weights: np.ndarray) -> np.ndarray:
    """Dense weighted sum over the operator basis."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (basis.size,):
        raise ParameterError(
            f"weight vector must have shape ({basis.size},), got {weights.shape}"
        )
    dim = basis.dim
    out = np.zeros((dim, dim), dtype=complex)
    rows = np.arange(dim)
    for k in range(basis.size):
        w = weights[k]
        if w != 0.0:
            out[rows, basis.cols[k]] += w * basis.phases[k]
    return out
