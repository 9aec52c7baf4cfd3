"""Shared fixtures: an independent dense-matrix oracle built from Kronecker
products of explicit 2x2 spin matrices (never touching the package's
matrix-free kernel), plus small reusable models."""

import numpy as np
import pytest

from spinbath.hamiltonian import _local_terms

SX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
SY = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)


def site_operator(n_bits: int, bit: int, op: np.ndarray) -> np.ndarray:
    """Embed a 2x2 operator on one bit (bit 0 is the fastest index)."""
    out = np.array([[1.0 + 0j]])
    for b in range(n_bits):
        out = np.kron(op if b == bit else np.eye(2), out)
    return out


def dense_oracle(model, part) -> np.ndarray:
    """Dense Hamiltonian of a part, assembled bond by bond via np.kron."""
    n_bits, terms = _local_terms(model, part)
    dim = 2**n_bits
    h = np.zeros((dim, dim), dtype=complex)
    for (bi, bj, cx, cy, cz, scale) in terms:
        for op, c in ((SX, cx), (SY, cy), (SZ, cz)):
            if c:
                h -= scale * c * site_operator(n_bits, bi, op) @ site_operator(n_bits, bj, op)
    return h


@pytest.fixture(scope="session")
def oracle():
    return dense_oracle


@pytest.fixture(scope="session")
def fig8_model():
    from spinbath.hamiltonian import build_chain_model

    return build_chain_model(4, 8, 1.0, 1.0, 1.0, 0.0)
