import numpy as np
import pytest

from dilation_forge.errors import DimensionMismatch, GramMismatch, NonSquare, NotPSD
from dilation_forge.linalg import (SubspaceBasis, adj, direct_sum, isometry_from_frames, kron,
                                   orthogonal_complement, psd_check, psd_sqrt, range_basis,
                                   unitary_completion)


def crandn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def test_psd_check_identity():
    ok, min_eig, defect = psd_check(np.eye(2), 1e-10)
    assert ok and min_eig == pytest.approx(1.0) and defect == 0.0


def test_psd_check_indefinite_diagonal():
    ok, min_eig, defect = psd_check(np.diag([1.0, -2.0]), 1e-10)
    assert not ok
    assert min_eig == pytest.approx(-2.0)
    assert defect == 0.0


def test_psd_check_parrott_full_szego():
    # I - sum T_i T_i* for the Parrott tuple is diag(I_2, -2 I_2)
    from dilation_forge.generators import parrott_tuple
    spec = parrott_tuple()
    s = np.eye(4, dtype=complex)
    for i in range(1, 4):
        t = spec.op(i)
        s -= t @ adj(t)
    assert np.allclose(s, np.diag([1, 1, -2, -2]))
    ok, min_eig, defect = psd_check(s, 1e-10)
    assert not ok and min_eig == pytest.approx(-2.0) and defect < 1e-15


def test_psd_check_rejects_nonsquare():
    with pytest.raises(NonSquare):
        psd_check(np.zeros((2, 3)))


def test_psd_sqrt_diagonal():
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_psd_sqrt_zero():
    assert np.allclose(psd_sqrt(np.zeros((3, 3))), np.zeros((3, 3)))


def test_psd_sqrt_hand_eigendecomposition():
    # [[2,1],[1,2]] has eigenpairs (1, (1,-1)/sqrt2) and (3, (1,1)/sqrt2)
    r3 = np.sqrt(3.0)
    expected = 0.5 * np.array([[r3 + 1, r3 - 1], [r3 - 1, r3 + 1]])
    got = psd_sqrt(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(got, expected, atol=1e-14)


def test_psd_sqrt_clamps_tiny_negatives():
    a = np.diag([1.0, -1e-15])
    b = psd_sqrt(a)
    assert np.all(np.isfinite(b))
    assert b[1, 1] == 0.0


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(NotPSD):
        psd_sqrt(np.diag([1.0, -0.5]))


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(0)
    for _ in range(5):
        m = crandn(rng, (4, 4))
        a = m @ adj(m)
        b = psd_sqrt(a)
        assert np.linalg.norm(b @ b - a) <= 1e-10 * max(1.0, np.linalg.norm(a))
        assert np.linalg.norm(b - adj(b)) < 1e-12


def test_range_basis_identity_and_zero():
    rb = range_basis(np.eye(3))
    assert rb.dim == 3 and np.allclose(rb.basis, np.eye(3))
    assert range_basis(np.zeros((3, 3))).dim == 0


def test_range_basis_rank_one():
    rb = range_basis(np.ones((2, 2)))
    assert rb.dim == 1
    assert np.allclose(rb.basis[:, 0], np.array([1.0, 1.0]) / np.sqrt(2))


def test_range_basis_properties():
    rng = np.random.default_rng(1)
    for _ in range(5):
        a = crandn(rng, (5, 3)) @ crandn(rng, (3, 5))
        rb = range_basis(a)
        assert rb.orthonormality_defect() < 1e-12
        resid = (np.eye(5) - rb.projector()) @ a
        assert np.linalg.norm(resid, 2) <= 1e-10 * np.linalg.norm(a, 2)


def test_range_basis_deterministic_phase():
    rng = np.random.default_rng(2)
    a = crandn(rng, (4, 4))
    b1, b2 = range_basis(a), range_basis(a.copy())
    assert np.array_equal(b1.basis, b2.basis)
    for j in range(b1.dim):
        col = b1.basis[:, j]
        lead = np.flatnonzero(np.abs(col) > 0.5 * np.abs(col).max())[0]
        assert abs(col[lead].imag) < 1e-14 and col[lead].real > 0


def test_isometry_from_frames_trivial():
    e1 = np.array([[1.0], [0.0]])
    w = isometry_from_frames(e1, e1)
    assert np.allclose(w, np.array([[1, 0], [0, 0]]))


def test_isometry_from_frames_rank_one_rotation():
    e1 = np.array([[1.0], [0.0]])
    e2 = np.array([[0.0], [1.0]])
    w = isometry_from_frames(e1, e2)
    assert np.allclose(w, np.array([[0, 0], [1, 0]]))


def test_isometry_from_frames_hadamard():
    x = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    y = np.eye(2)
    w = isometry_from_frames(x, y)
    assert np.allclose(w, np.array([[1, 1], [1, -1]]) / np.sqrt(2))


def test_isometry_from_frames_partial_isometry_property():
    rng = np.random.default_rng(3)
    x = crandn(rng, (5, 3))
    q = np.linalg.qr(crandn(rng, (5, 5)))[0]
    y = q[:, :5] @ x  # unitary image keeps the Gram matrix
    w = isometry_from_frames(x, y)
    p = range_basis(x).projector()
    assert np.linalg.norm(adj(w) @ w - p) < 1e-10
    assert np.linalg.norm(w @ x - y) < 1e-10


def test_isometry_from_frames_gram_mismatch():
    with pytest.raises(GramMismatch):
        isometry_from_frames(np.array([[1.0], [0.0]]), np.array([[2.0], [0.0]]))


def test_unitary_completion_identity():
    w = np.diag([1.0, 0.0]).astype(complex)
    comp = SubspaceBasis(2, np.array([[0.0], [1.0]]))
    assert np.allclose(unitary_completion(w, comp, comp), np.eye(2))


def test_unitary_completion_swap():
    w = np.array([[0.0, 0.0], [1.0, 0.0]])
    dom = SubspaceBasis(2, np.array([[0.0], [1.0]]))
    cod = SubspaceBasis(2, np.array([[1.0], [0.0]]))
    assert np.allclose(unitary_completion(w, dom, cod), np.array([[0, 1], [1, 0]]))


def test_unitary_completion_empty_initial_space():
    w = np.zeros((2, 2))
    full = SubspaceBasis(2, np.eye(2))
    assert np.allclose(unitary_completion(w, full, full), np.eye(2))


def test_unitary_completion_dimension_mismatch():
    w = np.zeros((2, 2))
    with pytest.raises(DimensionMismatch):
        unitary_completion(w, SubspaceBasis(2, np.eye(2)), SubspaceBasis(2, np.eye(2)[:, :1]))


def test_orthogonal_complement():
    rng = np.random.default_rng(4)
    b = range_basis(crandn(rng, (5, 2)))
    c = orthogonal_complement(b)
    assert c.dim == 5 - b.dim
    assert np.linalg.norm(adj(c.basis) @ b.basis) < 1e-12


def test_kron_and_direct_sum_basics():
    assert np.allclose(kron(np.eye(2), np.eye(3)), np.eye(6))
    assert np.allclose(direct_sum(np.array([[2.0]]), np.array([[3.0]])), np.diag([2.0, 3.0]))
    shift = np.array([[0.0, 1.0], [0.0, 0.0]])
    block_shift = kron(shift, np.eye(2))
    expected = np.zeros((4, 4))
    expected[0, 2] = expected[1, 3] = 1.0
    assert np.allclose(block_shift, expected)


def test_kron_mixed_product_and_associativity():
    rng = np.random.default_rng(5)
    a, b, c, d = (crandn(rng, (2, 2)) for _ in range(4))
    e = crandn(rng, (3, 3))
    assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-13)
    assert np.allclose(kron(kron(a, b), e), kron(a, kron(b, e)), atol=1e-13)
