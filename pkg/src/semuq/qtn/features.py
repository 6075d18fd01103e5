"""Uncertainty features from perturbed modes, and the null-mode stability bound.

Each perturbed mode is treated as a function on the amplitude grid; its
feature row is a curvature-to-magnitude ratio shifted so the row minimum is
zero.  A query probability maps to its nearest grid point and is scored by
averaging the rows of the modes adjacent (by index) to the embedded mode.
"""

from __future__ import annotations

import dataclasses
from typing import NamedTuple

import numpy as np

from semuq.errors import DegeneracyError, ParameterError
from semuq.kme import AmplitudeGrid
from semuq.qtn.qcm import QcmMatrix, _fix_vector_phase
from semuq.qtn.spectrum import DEFAULT_DEGENERACY_TAU, Spectrum

DEFAULT_EPS_FLOOR = 1e-9


@dataclasses.dataclass
class UqFeatureMatrix:
    features: np.ndarray  # (D modes, D grid points), row minima are zero
    energy_offsets: np.ndarray  # (D,) shift applied to each mode row
    sigma: float
    grid: AmplitudeGrid
    perturbation: np.ndarray | None = None  # the weight-space direction applied
    zero_modes: tuple[int, ...] = ()  # rows whose mode correction vanished


class BoundCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def _grid_laplacian(rows: np.ndarray, spacing: float) -> np.ndarray:
    """Second difference along the grid axis; 3-point stencil shifted inward at the ends."""
    if rows.shape[1] < 3:
        raise ParameterError("grid must have at least 3 points for a second difference")
    lap = np.empty_like(rows)
    lap[:, 1:-1] = rows[:, 2:] - 2.0 * rows[:, 1:-1] + rows[:, :-2]
    lap[:, 0] = rows[:, 0] - 2.0 * rows[:, 1] + rows[:, 2]
    lap[:, -1] = rows[:, -1] - 2.0 * rows[:, -2] + rows[:, -3]
    return lap / (spacing * spacing)


def uncertainty_features(
    spectrum: Spectrum,
    modes1: np.ndarray,
    sigma: float,
    grid: AmplitudeGrid,
    eps_floor: float = DEFAULT_EPS_FLOOR,
    perturbation: np.ndarray | None = None,
) -> UqFeatureMatrix:
    """Per-mode feature rows over the grid.

    Row m is (sigma^2 / 2) * Lap|mode_m|(x) / max(|mode_m(x)|, eps_floor)
    shifted by its own negated minimum, so every row minimum is exactly
    zero.  Modes whose correction vanished produce all-zero rows and are
    flagged in ``zero_modes`` rather than treated as errors.
    """
    modes1 = np.asarray(modes1)
    if modes1.shape != (spectrum.dim, spectrum.dim):
        raise ParameterError(
            f"mode corrections must have shape ({spectrum.dim}, {spectrum.dim}), got {modes1.shape}"
        )
    if grid.size != spectrum.dim:
        raise ParameterError(
            f"grid size {grid.size} must match the Hilbert dimension {spectrum.dim}"
        )
    magnitudes = np.abs(modes1).T  # row m = |mode correction m| over the grid
    laplacian = _grid_laplacian(magnitudes, grid.spacing)
    ratios = (0.5 * sigma * sigma) * laplacian / np.maximum(magnitudes, eps_floor)
    offsets = -ratios.min(axis=1)
    features = ratios + offsets[:, np.newaxis]
    zero_modes = tuple(int(m) for m in np.flatnonzero(~magnitudes.any(axis=1)))
    return UqFeatureMatrix(
        features=features,
        energy_offsets=offsets,
        sigma=sigma,
        grid=grid,
        perturbation=None if perturbation is None else np.asarray(perturbation),
        zero_modes=zero_modes,
    )


def uq_score(
    features: UqFeatureMatrix,
    spectrum: Spectrum,
    x_query: float,
    m_adj: int = 8,
    eps_floor: float = DEFAULT_EPS_FLOOR,
) -> float:
    """Average feature value at the query point over modes adjacent to the embedded mode.

    The window of ``m_adj`` mode indices is centered on the embedded mode and
    shifted (never shrunk) at the spectrum edges; the floor keeps the score
    strictly positive because it later divides a penalty.
    """
    if not (0.0 <= x_query <= 1.0):
        raise ParameterError(f"query probability must lie in [0, 1], got {x_query}")
    n_modes = features.features.shape[0]
    if not (1 <= m_adj <= n_modes):
        raise ParameterError(f"adjacent-mode count must lie in [1, {n_modes}], got {m_adj}")
    grid_index = int(np.argmin(np.abs(features.grid.points - x_query)))
    start = min(max(spectrum.kme_mode_index - m_adj // 2, 0), n_modes - m_adj)
    window = features.features[start : start + m_adj, grid_index]
    return float(window.mean() + eps_floor)


def nullspace_perturbation_bound_check(
    qcm: QcmMatrix,
    delta: np.ndarray,
    tau: float = DEFAULT_DEGENERACY_TAU,
) -> BoundCheck:
    """Cosine-similarity lower bound for the perturbed bottom eigenvector.

    lhs is the overlap between the unperturbed bottom eigenvector and its
    normalized first-order correction under ``delta``; rhs is
    1 - 0.5 * sum((c_m / g_m)^2) with c_m the coupling to mode m and g_m the
    spectral gap above the bottom mode (for a true null mode the bottom
    eigenvalue is zero, making the gaps the raw upper eigenvalues).
    """
    delta = np.asarray(delta, dtype=float)
    entries = qcm.entries
    if delta.shape != entries.shape:
        raise ParameterError(f"perturbation shape {delta.shape} must match {entries.shape}")
    asym = float(np.max(np.abs(delta - delta.T)))
    if asym > 1e-10:
        raise ParameterError(f"perturbation must be symmetric; asymmetry {asym}")
    eigenvalues, eigenvectors = np.linalg.eigh(entries)
    guard = tau * max(float(np.max(np.abs(eigenvalues))), np.finfo(float).tiny)
    bottom_gap = float(eigenvalues[1] - eigenvalues[0])
    if bottom_gap < guard:
        raise DegeneracyError(
            f"smallest eigenvalue is not simple: gap {bottom_gap} below guard {guard}"
        )
    w0 = _fix_vector_phase(eigenvectors[:, 0].copy())
    upper = eigenvectors[:, 1:]
    couplings = upper.T @ (delta @ w0)
    gaps = eigenvalues[1:] - eigenvalues[0]
    coefficients = couplings / gaps
    correction = -upper @ coefficients
    corrected = w0 + correction
    lhs = float(w0 @ (corrected / np.linalg.norm(corrected)))
    rhs = 1.0 - 0.5 * float(coefficients @ coefficients)
    return BoundCheck(lhs=lhs, rhs=rhs, holds=lhs >= rhs - 1e-10)
