import numpy as np
import pytest

from probframes.errors import NonSymmetric, Singular
from probframes.numerics import (
    eig_sym,
    inverse,
    numeric_rank,
    spectral_norm,
)


def test_eig_sym_known_matrix():
    # eigenvalues of [[2, 1], [1, 2]] are 1 and 3
    spec = eig_sym([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(spec.eigenvalues, [1.0, 3.0], atol=1e-12)
    assert spec.smallest == spec.eigenvalues[0]
    assert spec.largest == spec.eigenvalues[-1]


def test_eig_sym_reconstruction_and_orthogonality():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = rng.integers(1, 7)
        m = rng.standard_normal((n, n))
        s = m + m.T
        spec = eig_sym(s)
        assert np.abs(spec.reconstruct() - s).max() < 1e-10
        gram = spec.eigenvectors.T @ spec.eigenvectors
        assert np.abs(gram - np.eye(n)).max() < 1e-12
        assert np.all(np.diff(spec.eigenvalues) >= 0)


def test_eig_sym_rejects_asymmetric():
    with pytest.raises(NonSymmetric):
        eig_sym([[0.0, 1.0], [0.0, 0.0]])


def test_inverse_round_trip():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = rng.integers(1, 6)
        m = rng.standard_normal((n, n)) + 3.0 * np.eye(n)
        inv = inverse(m)
        assert np.abs(m @ inv - np.eye(n)).max() < 1e-9


def test_inverse_rejects_singular():
    with pytest.raises(Singular):
        inverse([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(Singular):
        inverse(np.zeros((3, 3)))


def test_spectral_norm_oracle():
    # rank-one uv^T has spectral norm |u| |v|
    u = np.array([3.0, 4.0])
    v = np.array([1.0, 2.0, 2.0])
    assert abs(spectral_norm(np.outer(u, v)) - 15.0) < 1e-12
    assert spectral_norm(np.eye(4)) == 1.0


def test_spectral_norm_vs_power_iteration():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = rng.standard_normal((4, 4))
        # independent oracle: largest eigenvalue of m^T m
        expect = np.sqrt(np.linalg.eigvalsh(m.T @ m)[-1])
        assert abs(spectral_norm(m) - expect) < 1e-10


def test_numeric_rank():
    rng = np.random.default_rng(11)
    for _ in range(30):
        rows, cols = int(rng.integers(2, 8)), int(rng.integers(2, 8))
        r = int(rng.integers(1, min(rows, cols) + 1))
        m = rng.standard_normal((rows, r)) @ rng.standard_normal((r, cols))
        assert numeric_rank(m) == r
    assert numeric_rank(np.zeros((3, 5))) == 0
