"""Eigendecomposition and first-order perturbation of the assembled Hamiltonian."""

from __future__ import annotations

import dataclasses

import numpy as np

from semuq.errors import DegeneracyError, NumericalError, ParameterError
from semuq.qtn.basis import OperatorBasis
from semuq.qtn.qcm import _fix_vector_phase, assemble_hamiltonian

HERMITICITY_ATOL = 1e-8
DEFAULT_DEGENERACY_TAU = 1e-8


@dataclasses.dataclass
class Spectrum:
    hamiltonian: np.ndarray
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column m = mode m
    kme_mode_index: int
    kme_overlap: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


@dataclasses.dataclass
class FirstOrderCorrections:
    energies: np.ndarray  # (D,) first-order energy shifts
    modes: np.ndarray  # (D, D) column m = first-order correction to mode m
    dropped_terms: int  # near-degenerate pairs excluded from the mode sums
    guard: float  # absolute gap threshold that was applied


def eigendecompose(hamiltonian: np.ndarray, psi_hat: np.ndarray) -> Spectrum:
    """Ascending eigensystem with a deterministic per-vector phase convention.

    The mode index best matching the embedded wave function is recorded as
    the anchor for the adjacent-mode averaging downstream.
    """
    hamiltonian = np.asarray(hamiltonian)
    deviation = float(np.max(np.abs(hamiltonian - hamiltonian.conj().T)))
    if deviation > HERMITICITY_ATOL:
        raise ParameterError(f"matrix deviates from Hermitian by {deviation}")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(hamiltonian)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolve failed: {exc}") from exc
    eigenvectors = eigenvectors.copy()
    for m in range(eigenvectors.shape[1]):
        eigenvectors[:, m] = _fix_vector_phase(eigenvectors[:, m])
    overlaps = np.abs(eigenvectors.conj().T @ np.asarray(psi_hat, dtype=complex))
    mode_index = int(np.argmax(overlaps))
    return Spectrum(
        hamiltonian=hamiltonian,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        kme_mode_index=mode_index,
        kme_overlap=float(overlaps[mode_index]),
    )


def _first_order_from_matrix(
    spectrum: Spectrum, delta_h: np.ndarray, tau: float = DEFAULT_DEGENERACY_TAU
) -> FirstOrderCorrections:
    """First-order energy and mode corrections for an explicit perturbation matrix."""
    energies = spectrum.eigenvalues
    vectors = spectrum.eigenvectors
    coupling = vectors.conj().T @ np.asarray(delta_h, dtype=complex) @ vectors
    energy_shifts = coupling.diagonal().real.copy()

    gaps = energies[np.newaxis, :] - energies[:, np.newaxis]  # gaps[n, m] = E_m - E_n
    # guard floored away from zero so a fully flat spectrum is caught, not divided by
    guard = tau * max(float(np.max(np.abs(energies))), np.finfo(float).tiny)
    off_diagonal = ~np.eye(spectrum.dim, dtype=bool)
    keep = off_diagonal & (np.abs(gaps) >= guard)
    if not keep.any():
        spread = float(energies[-1] - energies[0])
        raise DegeneracyError(
            f"spectrum is fully degenerate: maximal gap {spread} sits below the guard {guard}"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        coefficients = np.where(keep, coupling / gaps, 0.0)
    modes = vectors @ coefficients
    dropped = int(np.count_nonzero(off_diagonal & ~keep))
    return FirstOrderCorrections(
        energies=energy_shifts, modes=modes, dropped_terms=dropped, guard=guard
    )


def first_order_corrections(
    spectrum: Spectrum,
    basis: OperatorBasis,
    delta_w: np.ndarray,
    tau: float = DEFAULT_DEGENERACY_TAU,
) -> FirstOrderCorrections:
    """Corrections for the perturbation assembled from basis weights delta_w.

    energies[m] = <psi_m|dH|psi_m>; modes[:, m] sums the other modes with
    coefficients <psi_n|dH|psi_m> / (E_m - E_n), omitting pairs whose gap
    falls under ``tau * max|E|`` (counted in ``dropped_terms``).
    """
    delta_h = assemble_hamiltonian(basis, delta_w)
    return _first_order_from_matrix(spectrum, delta_h, tau=tau)
