"""Pauli-string operator basis for an L-site spin chain.

The family contains every string acting as one Pauli on a single site and
every string acting as a Pauli pair on two sites within the coupling
radius (identity elsewhere), each scaled by 1/sqrt(D) so distinct strings
are orthonormal under the Hilbert-Schmidt inner product tr(Hi Hj).

Each string has exactly one nonzero entry per row, so operators are stored
compressed: per row i the nonzero sits at column ``cols[i]`` with value
``phases[i]``.  Applying an operator to a vector is then O(D), and dense
matrices are materialized only on demand.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools

import numpy as np

from semuq.errors import ParameterError

_PAULIS = "XYZ"


@dataclasses.dataclass(frozen=True)
class OperatorBasis:
    L: int
    locality: int
    labels: tuple[str, ...]
    cols: np.ndarray  # (T, D) int column index of the row's nonzero entry
    phases: np.ndarray  # (T, D) complex value of that entry

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.cols.shape[1]

    def apply(self, k: int, vec: np.ndarray) -> np.ndarray:
        """Matrix-vector product with operator k."""
        return self.phases[k] * vec[self.cols[k]]

    def apply_all(self, vec: np.ndarray) -> np.ndarray:
        """Stack of H_k @ vec for every operator, shape (T, D)."""
        return self.phases * vec[self.cols]

    def dense(self, k: int) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[np.arange(self.dim), self.cols[k]] = self.phases[k]
        return out


def _site_bits(site: int, dim: int) -> np.ndarray:
    return (np.arange(dim) >> site) & 1


def _string_action(placements: dict[int, str], L: int) -> tuple[np.ndarray, np.ndarray]:
    """Column indices and entry values for a Pauli string, rows 0..D-1.

    Site s corresponds to bit s of the basis-state index.  Per site: X flips
    the bit with factor 1; Y flips it with factor -i (bit 0) / +i (bit 1);
    Z keeps it with factor (-1)^bit.
    """
    dim = 2**L
    flip_mask = 0
    phases = np.ones(dim, dtype=complex)
    for site, pauli in placements.items():
        bits = _site_bits(site, dim)
        if pauli == "X":
            flip_mask |= 1 << site
        elif pauli == "Y":
            flip_mask |= 1 << site
            phases = phases * (1j * (2 * bits - 1))
        elif pauli == "Z":
            phases = phases * (1 - 2 * bits)
        else:
            raise ParameterError(f"unknown Pauli letter {pauli!r}")
    cols = np.arange(dim) ^ flip_mask
    return cols, phases


def build_operator_basis(L: int, locality: int = 1) -> OperatorBasis:
    """All 1-site strings plus 2-site strings within the coupling radius."""
    if not isinstance(L, int) or L < 2:
        raise ParameterError(f"spin count must be an integer >= 2, got {L!r}")
    if not isinstance(locality, int) or locality < 1 or locality > L - 1:
        raise ParameterError(
            f"coupling radius must lie in [1, {L - 1}] for {L} sites, got {locality!r}"
        )
    dim = 2**L
    scale = 1.0 / np.sqrt(dim)
    labels: list[str] = []
    cols_rows: list[np.ndarray] = []
    phase_rows: list[np.ndarray] = []

    def add(placements: dict[int, str], label: str) -> None:
        cols, phases = _string_action(placements, L)
        labels.append(label)
        cols_rows.append(cols)
        phase_rows.append(phases * scale)

    for site in range(L):
        for pauli in _PAULIS:
            add({site: pauli}, f"{pauli}{site}")
    for distance in range(1, locality + 1):
        for site in range(L - distance):
            for p1, p2 in itertools.product(_PAULIS, _PAULIS):
                add({site: p1, site + distance: p2}, f"{p1}{site} {p2}{site + distance}")

    cols = np.array(cols_rows, dtype=np.intp)
    phases = np.array(phase_rows, dtype=complex)
    cols.setflags(write=False)
    phases.setflags(write=False)
    return OperatorBasis(L=L, locality=locality, labels=tuple(labels), cols=cols, phases=phases)


@functools.lru_cache(maxsize=None)
def operator_basis(L: int, locality: int = 1) -> OperatorBasis:
    """Cached basis; safe to share because the arrays are frozen read-only."""
    return build_operator_basis(L, locality)
