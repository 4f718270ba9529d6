"""Dense complex-matrix calculus used by the dilation pipeline.

Everything here is deterministic: basis orderings follow singular values in
descending order, sign/phase ambiguities are resolved by rotating each basis
vector so its first significantly-nonzero entry is positive real, and unitary
completions pair complement bases column by column.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, GramMismatch, IdentityResidualExceeded, NonSquare, NotPSD

DEFAULT_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Coerce input to a 2-d complex ndarray and reject non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got array of ndim {m.ndim}")
    if m.size and not np.isfinite(m).all():
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def adj(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a)) if a.size else 0.0


def rel_residual(delta: np.ndarray, reference: np.ndarray) -> float:
    """Frobenius norm of ``delta`` relative to max(1, ||reference||_F)."""
    return frob(delta) / max(1.0, frob(reference))


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


class PsdReport(NamedTuple):
    is_psd: bool
    min_eig: float
    hermitian_defect: float


def psd_check(a, tol: float = DEFAULT_TOL) -> PsdReport:
    """Test positive semidefiniteness of a Hermitian-intended matrix.

    Returns ``(is_psd, min_eig, hermitian_defect)`` where ``min_eig`` is the
    smallest eigenvalue of the Hermitian part (A + A*)/2 and
    ``hermitian_defect`` = ||A - A*||_F / max(1, ||A||_F).  The verdict uses
    the scale-aware cutoff ``min_eig >= -tol * max(1, ||A||_2)``.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"psd_check needs a square matrix, got {a.shape}")
    if a.shape[0] == 0:
        return PsdReport(True, 0.0, 0.0)
    defect = rel_residual(a - adj(a), a)
    h = 0.5 * (a + adj(a))
    eigs = np.linalg.eigvalsh(h)
    min_eig = float(eigs[0])
    scale = max(1.0, float(eigs[-1]), abs(min_eig))
    return PsdReport(min_eig >= -tol * scale, min_eig, defect)


def psd_sqrt(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in [-tol*scale, 0) are clamped to zero; anything more negative
    raises :class:`NotPSD`.  A Hermitian defect above 1e-8 (relative) also
    raises, since the input is then not a meaningful Szego operator.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"psd_sqrt needs a square matrix, got {a.shape}")
    if a.shape[0] == 0:
        return a.copy()
    report = psd_check(a, tol)
    if report.hermitian_defect > 1e-8:
        raise NotPSD(f"matrix is not Hermitian (defect {report.hermitian_defect:.3e})")
    if not report.is_psd:
        raise NotPSD(f"matrix has eigenvalue {report.min_eig:.6e} below tolerance")
    h = 0.5 * (a + adj(a))
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ adj(v)


@dataclass
class SubspaceBasis:
    """Orthonormal column basis of a subspace of C^ambient_dim."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=complex).reshape(self.ambient_dim, -1)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ adj(self.basis)

    def orthonormality_defect(self) -> float:
        return frob(adj(self.basis) @ self.basis - eye(self.dim))


def _normalize_column_phases(b: np.ndarray) -> np.ndarray:
    """Rotate each column so its first entry of near-maximal modulus is positive real."""
    b = b.copy()
    for j in range(b.shape[1]):
        col = b[:, j]
        mags = np.abs(col)
        top = mags.max()
        if top == 0.0:
            continue
        lead = int(np.argmax(mags > 0.5 * top))
        phase = col[lead] / abs(col[lead])
        b[:, j] = col * np.conj(phase)
    return b


def range_basis(a, rank_tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Orthonormal basis of range(A), rank decided by singular values.

    Columns are ordered by descending singular value and phase-normalized so
    repeated runs give identical output.
    """
    a = as_matrix(a)
    if a.size == 0 or frob(a) == 0.0:
        return SubspaceBasis(a.shape[0], np.zeros((a.shape[0], 0)))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > rank_tol * s[0]))
    return SubspaceBasis(a.shape[0], _normalize_column_phases(u[:, :rank]))


def orthogonal_complement(space: SubspaceBasis) -> SubspaceBasis:
    """Deterministic orthonormal basis of the orthogonal complement."""
    n, r = space.ambient_dim, space.dim
    if r == 0:
        return SubspaceBasis(n, eye(n))
    if r >= n:
        return SubspaceBasis(n, np.zeros((n, 0)))
    u, _, _ = np.linalg.svd(space.basis, full_matrices=True)
    return SubspaceBasis(n, _normalize_column_phases(u[:, r:]))


def isometry_from_frames(x, y, tol: float = 1e-8,
                         rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Partial isometry W with W x_j = y_j for the frame columns of x and y.

    Requires the Gram matrices to agree (x* x == y* y); otherwise no such
    partial isometry exists and :class:`GramMismatch` is raised.  The initial
    space is span(x), the final space span(y).
    """
    x = as_matrix(x)
    y = as_matrix(y)
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch("frames must have the same number of vectors")
    gx = adj(x) @ x
    gram_resid = rel_residual(gx - adj(y) @ y, gx)
    if gram_resid > tol:
        raise GramMismatch(f"frame Gram matrices differ by {gram_resid:.3e} (tol {tol:.1e})")
    if x.shape[1] == 0 or frob(x) == 0.0:
        return np.zeros((y.shape[0], x.shape[0]), dtype=complex)
    u, s, vh = np.linalg.svd(x, full_matrices=False)
    rank = int(np.sum(s > rank_tol * s[0]))
    u, s, vh = u[:, :rank], s[:rank], vh[:rank]
    # W = y @ pinv(x) restricted to the numerical range; Gram equality makes it isometric there.
    return (y @ adj(vh)) @ np.diag(1.0 / s).astype(complex) @ adj(u)


def unitary_completion(w, domain_complement: SubspaceBasis,
                       codomain_complement: SubspaceBasis,
                       tol: float = DEFAULT_TOL) -> np.ndarray:
    """Extend a partial isometry to a unitary by pairing complement bases.

    The j-th column of ``domain_complement`` is mapped to the j-th column of
    ``codomain_complement``.  The complements must be orthogonal to the
    initial/final spaces of ``w`` and have equal dimension.
    """
    w = as_matrix(w)
    if domain_complement.dim != codomain_complement.dim:
        raise DimensionMismatch(
            f"complement dimensions differ: {domain_complement.dim} vs {codomain_complement.dim}"
            " (auxiliary padding needed)")
    u = w + codomain_complement.basis @ adj(domain_complement.basis)
    if u.shape[0] != u.shape[1]:
        raise DimensionMismatch(f"completion is not square: {u.shape}")
    resid = frob(adj(u) @ u - eye(u.shape[0]))
    if resid > max(tol, 1e-10) * max(1.0, u.shape[0]):
        raise IdentityResidualExceeded("unitary_completion", resid, tol)
    return u


def kron(a, b) -> np.ndarray:
    """Kronecker product, left factor owning the coarse index: (A(x)B)(u(x)v) = Au (x) Bv."""
    return np.kron(as_matrix(a), as_matrix(b))


def direct_sum(a, b) -> np.ndarray:
    """Block-diagonal sum diag(A, B)."""
    a, b = as_matrix(a), as_matrix(b)
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    out[:a.shape[0], :a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out
