"""Kernel mean embedding of sequence-probability samples on a dyadic grid.

The embedding evaluates a Gaussian-kernel sum over the R samples at
D = 2^L uniformly spaced points covering [0, 1], producing the nonnegative
amplitude vector that the spin-chain module later treats as a state.  By
default each kernel term is weighted by its sample value; the plain Parzen
estimate is available behind ``weighted=False`` for comparison.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, TextIO

import numpy as np

from semuq import _accel
from semuq.errors import DegenerateInputError, ParameterError, ValidationError


@dataclasses.dataclass(frozen=True)
class AmplitudeGrid:
    """D = 2^L uniformly spaced evaluation points over [0, 1]."""

    points: np.ndarray
    L: int
    spacing: float

    @property
    def size(self) -> int:
        return self.points.size


def dyadic_grid(L: int) -> AmplitudeGrid:
    if not isinstance(L, int) or L < 1:
        raise ParameterError(f"spin count must be a positive integer, got {L!r}")
    d = 2**L
    points = np.linspace(0.0, 1.0, d)
    points.setflags(write=False)
    return AmplitudeGrid(points=points, L=L, spacing=float(points[1] - points[0]))


@dataclasses.dataclass
class WaveFunction:
    """Grid-sampled embedding amplitudes."""

    grid: AmplitudeGrid
    values: np.ndarray
    sigma: float
    l2_normalized: bool = False


def gaussian_kernel(x, xi, sigma: float):
    """Gaussian kernel value(s); symmetric in (x, xi), broadcasts like numpy."""
    if sigma <= 0:
        raise ParameterError(f"kernel bandwidth must be positive, got {sigma}")
    diff = np.asarray(x, dtype=float) - np.asarray(xi, dtype=float)
    out = np.exp(-(diff**2) / (2.0 * sigma * sigma)) / math.sqrt(2.0 * math.pi * sigma * sigma)
    if np.ndim(out) == 0:
        return float(out)
    return out


def empirical_kme(
    samples: Iterable[float],
    grid: AmplitudeGrid,
    sigma: float,
    weighted: bool = True,
) -> WaveFunction:
    """Sampled kernel embedding: values[j] = (1/R) sum_r k(s_r; x_j) * s_r.

    With ``weighted=False`` the trailing s_r factor is dropped, giving the
    unweighted Parzen density estimate.
    """
    if sigma <= 0:
        raise ParameterError(f"kernel bandwidth must be positive, got {sigma}")
    sample_array = np.asarray(list(samples), dtype=float)
    if sample_array.size == 0:
        raise DegenerateInputError("cannot embed an empty sample list")
    if np.any(~np.isfinite(sample_array)) or np.any(sample_array < 0) or np.any(sample_array > 1):
        raise ValidationError("samples must be finite values within [0, 1]")
    values = _accel.kme_grid(sample_array, np.asarray(grid.points, dtype=float), sigma, weighted)
    return WaveFunction(grid=grid, values=values, sigma=sigma, l2_normalized=False)


def l2_normalize(wf: WaveFunction) -> WaveFunction:
    """Scale the amplitude vector to unit Euclidean norm."""
    norm = float(np.linalg.norm(wf.values))
    if norm == 0.0:
        raise DegenerateInputError("cannot normalize an all-zero wave function")
    return WaveFunction(
        grid=wf.grid, values=wf.values / norm, sigma=wf.sigma, l2_normalized=True
    )


def wavefunction_to_csv(wf: WaveFunction, handle: TextIO) -> None:
    """Debug dump: one `grid_point,value` row per grid point."""
    handle.write("grid_point,value\n")
    for x, v in zip(wf.grid.points, wf.values):
        handle.write(f"{float(x)!r},{float(v)!r}\n")
