"""Pauli-string operator family: counts, orthonormality, compressed storage."""

import numpy as np
import pytest

from semuq.errors import ParameterError
from semuq.qtn import build_operator_basis, operator_basis

SIGMA = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_from_label(label: str, L: int) -> np.ndarray:
    """Independent construction by explicit Kronecker products.

    Site s is bit s of the index, so the site-0 factor is the rightmost
    Kronecker operand.
    """
    factors = [np.eye(2, dtype=complex) for _ in range(L)]
    for token in label.split():
        letter, site = token[0], int(token[1:])
        factors[site] = SIGMA[letter]
    out = np.array([[1.0 + 0j]])
    for site in reversed(range(L)):
        out = np.kron(out, factors[site])
    return out / np.sqrt(2**L)


class TestFamilySize:
    def test_two_sites_has_fifteen_operators(self):
        assert build_operator_basis(2).size == 15

    def test_eight_sites_has_eighty_seven_operators(self):
        assert build_operator_basis(8).size == 87

    def test_size_formula_with_radius(self):
        # 3L singles plus 9 pairs per ordered site pair within the radius
        basis = build_operator_basis(4, locality=2)
        assert basis.size == 3 * 4 + 9 * 3 + 9 * 2

    def test_labels_unique(self):
        basis = build_operator_basis(5)
        assert len(set(basis.labels)) == basis.size


class TestMatrixStructure:
    def test_dense_matches_kronecker_construction(self):
        basis = build_operator_basis(3)
        for k in range(basis.size):
            expected = dense_from_label(basis.labels[k], 3)
            assert np.max(np.abs(basis.dense(k) - expected)) < 1e-14

    def test_hermitian_at_eight_sites(self, rng):
        basis = build_operator_basis(8)
        for k in rng.choice(basis.size, size=12, replace=False):
            dense = basis.dense(int(k))
            assert np.max(np.abs(dense - dense.conj().T)) < 1e-14

    def test_exhaustive_orthonormality_two_sites(self):
        basis = build_operator_basis(2)
        dense = [basis.dense(k) for k in range(basis.size)]
        for i in range(basis.size):
            for j in range(basis.size):
                inner = np.trace(dense[i].conj().T @ dense[j]).real
                expected = 1.0 if i == j else 0.0
                assert abs(inner - expected) < 1e-12

    def test_unit_hilbert_schmidt_norm_larger_chain(self, rng):
        basis = build_operator_basis(6)
        for k in rng.choice(basis.size, size=10, replace=False):
            dense = basis.dense(int(k))
            assert np.trace(dense.conj().T @ dense).real == pytest.approx(1.0, abs=1e-12)

    def test_traceless(self):
        basis = build_operator_basis(3)
        for k in range(basis.size):
            assert abs(np.trace(basis.dense(k))) < 1e-14


class TestCompressedApplication:
    def test_apply_matches_dense(self, rng):
        basis = build_operator_basis(4)
        vec = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        for k in range(basis.size):
            assert np.max(np.abs(basis.apply(k, vec) - basis.dense(k) @ vec)) < 1e-13

    def test_apply_all_stacks_every_operator(self, rng):
        basis = build_operator_basis(3)
        vec = rng.standard_normal(8) + 0j
        stacked = basis.apply_all(vec)
        assert stacked.shape == (basis.size, 8)
        for k in range(basis.size):
            assert np.allclose(stacked[k], basis.apply(k, vec), atol=1e-14)

    def test_one_nonzero_per_row(self):
        basis = build_operator_basis(3)
        for k in range(basis.size):
            dense = basis.dense(k)
            assert np.all(np.count_nonzero(dense, axis=1) == 1)


class TestParameters:
    def test_single_site_rejected(self):
        with pytest.raises(ParameterError):
            build_operator_basis(1)

    def test_zero_radius_rejected(self):
        with pytest.raises(ParameterError):
            build_operator_basis(4, locality=0)

    def test_radius_beyond_chain_rejected(self):
        with pytest.raises(ParameterError, match=r"\[1, 3\]"):
            build_operator_basis(4, locality=4)

    def test_cached_accessor_reuses_instances(self):
        assert operator_basis(4, 1) is operator_basis(4, 1)

    def test_cached_arrays_are_read_only(self):
        basis = operator_basis(4, 1)
        with pytest.raises(ValueError):
            basis.cols[0, 0] = 1
