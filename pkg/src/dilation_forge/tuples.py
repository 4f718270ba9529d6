"""Input tuples of contraction blocks and their class membership.

A tuple holds, for each index i in {1..n}, a row of d matrices
T_{i,1}..T_{i,d} on C^dimH.  For d = 1 the single matrices t_i may u-commute
(t_i t_j = u_{ij} t_j t_i with |u_{ij}| = 1) and may additionally be covariant
for a diagonal algebra C^k acting blockwise on C^dimH with commuting
permutation automorphisms.

Class membership (the dilatable class): the sub-tuples obtained by deleting
index 1 and index n must both have a PSD Szego operator, and the sub-tuple
without index n must be pure (every completely positive map
X -> sum_j T_{i,j} X T_{i,j}* has spectral radius < 1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import MalformedSpec, UnsupportedMultiplicity
from .linalg import PsdReport, adj, as_matrix, frob, kron, psd_check

PURITY_TOL = 1e-8
CONTRACTION_TOL = 1e-10


def compose_perm(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Array of the permutation q -> a[b[q]]."""
    return [a[b[q]] for q in range(len(a))]


def invert_perm(a: Sequence[int]) -> list[int]:
    inv = [0] * len(a)
    for q, v in enumerate(a):
        inv[v] = q
    return inv


@dataclass
class AlgebraStructure:
    """Diagonal algebra C^k acting on H, with a commuting permutation per index.

    ``block_of[j]`` is the algebra component (0-based) of the j-th basis vector
    of H.  ``automorphisms[i]`` is a permutation array a with the convention
    (alpha_i(x))_q = x_{a[q]}, equivalently alpha_i(e_p) = e_{a^{-1}(p)}.
    Covariance t_i sigma(alpha_i(a)) = sigma(a) t_i then forces t_i to map the
    coordinates of block a^{-1}(p) into block p only.
    """

    k: int
    block_of: list[int]
    automorphisms: list[list[int]]

    def __post_init__(self):
        self.block_of = [int(b) for b in self.block_of]
        self.automorphisms = [[int(v) for v in a] for a in self.automorphisms]
        if any(not 0 <= b < self.k for b in self.block_of):
            raise MalformedSpec("block_of entries must lie in 0..k-1")
        for i, a in enumerate(self.automorphisms):
            if sorted(a) != list(range(self.k)):
                raise MalformedSpec(f"automorphism {i} is not a permutation of 0..k-1")
        for a, b in itertools.combinations(self.automorphisms, 2):
            if compose_perm(a, b) != compose_perm(b, a):
                raise MalformedSpec("automorphisms must pairwise commute")

    def projection(self, p: int, dimH: int) -> np.ndarray:
        """Matrix of sigma(e_p): diagonal indicator of block p."""
        d = np.asarray([1.0 if b == p else 0.0 for b in self.block_of], dtype=complex)
        return np.diag(d)

    def labels(self) -> np.ndarray:
        return np.asarray(self.block_of, dtype=int)


@dataclass
class TupleSpec:
    """A tuple of contraction blocks with optional phases and algebra."""

    n: int
    dimH: int
    d: int
    blocks: list[list[np.ndarray]]
    phases: np.ndarray | None = None
    algebra: AlgebraStructure | None = None

    def __post_init__(self):
        if self.n < 1 or self.dimH < 1 or self.d < 1:
            raise MalformedSpec("n, dimH and d must be positive")
        if len(self.blocks) != self.n:
            raise MalformedSpec(f"expected {self.n} block rows, got {len(self.blocks)}")
        rows = []
        for i, row in enumerate(self.blocks):
            if len(row) != self.d:
                raise MalformedSpec(f"block row {i + 1} has {len(row)} matrices, expected d={self.d}")
            mats = []
            for j, m in enumerate(row):
                m = as_matrix(m)
                if m.shape != (self.dimH, self.dimH):
                    raise MalformedSpec(
                        f"matrix ({i + 1},{j + 1}) has shape {m.shape}, expected ({self.dimH},{self.dimH})")
                mats.append(m)
            rows.append(mats)
        self.blocks = rows
        if self.phases is None:
            self.phases = np.ones((self.n, self.n), dtype=complex)
        else:
            self.phases = as_matrix(self.phases)
            if self.phases.shape != (self.n, self.n):
                raise MalformedSpec(f"phase table must be {self.n}x{self.n}")
            if self.d > 1 and frob(self.phases - np.ones((self.n, self.n))) > 1e-14:
                raise MalformedSpec("u-phases are only supported for multiplicity d = 1")
            if np.max(np.abs(np.abs(self.phases) - 1.0)) > 1e-12:
                raise MalformedSpec("phases must be unimodular")
            if np.max(np.abs(np.diag(self.phases) - 1.0)) > 1e-12:
                raise MalformedSpec("diagonal phases must equal 1")
            if frob(self.phases - adj(self.phases)) > 1e-12:
                raise MalformedSpec("phase table must satisfy u[j,i] = conj(u[i,j])")
        if self.algebra is not None:
            if self.d != 1:
                raise MalformedSpec("algebra covariance is only supported for d = 1")
            if len(self.algebra.block_of) != self.dimH:
                raise MalformedSpec("algebra.block_of must have length dimH")
            if len(self.algebra.automorphisms) != self.n:
                raise MalformedSpec("algebra needs one automorphism per tuple index")

    @classmethod
    def from_operators(cls, ops: Sequence, phases=None, algebra: AlgebraStructure | None = None) -> "TupleSpec":
        """Build a d = 1 spec from plain matrices (scalars allowed for dimH = 1)."""
        mats = [as_matrix(np.atleast_2d(np.asarray(t, dtype=complex))) for t in ops]
        dim = mats[0].shape[0]
        return cls(n=len(mats), dimH=dim, d=1, blocks=[[m] for m in mats],
                   phases=None if phases is None else np.asarray(phases, dtype=complex),
                   algebra=algebra)

    def op(self, i: int) -> np.ndarray:
        """The single operator t_i (1-based index), for d = 1."""
        if self.d != 1:
            raise UnsupportedMultiplicity("op() requires d = 1")
        return self.blocks[i - 1][0]

    def row(self, i: int) -> np.ndarray:
        """The row operator (T_{i,1} ... T_{i,d}) of shape dimH x d*dimH, 1-based."""
        return np.hstack(self.blocks[i - 1])

    def u(self, i: int, j: int) -> complex:
        """Phase with t_i t_j = u(i,j) t_j t_i (1-based, all pairs)."""
        return complex(self.phases[i - 1, j - 1])


@dataclass
class ClassReport:
    """Outcome of structural validation and class membership tests."""

    is_contraction_tuple: bool = False
    row_norms: list[float] = field(default_factory=list)
    commutation_residual: float = 0.0
    covariance_residual: Optional[float] = None
    szego_full: Optional[PsdReport] = None
    szego_hat1: Optional[PsdReport] = None
    szego_hatn: Optional[PsdReport] = None
    pure_flags: list[bool] = field(default_factory=list)
    purity_radii: list[float] = field(default_factory=list)
    purity_indeterminate: list[bool] = field(default_factory=list)
    hatn_pure: bool = False
    in_T1n: bool = False
    gkvw: dict = field(default_factory=dict)

    def failing_conditions(self) -> list[str]:
        fails = []
        if self.szego_hat1 is not None and not self.szego_hat1.is_psd:
            fails.append(f"szego_hat1 not PSD (min_eig {self.szego_hat1.min_eig:.6g})")
        if self.szego_hatn is not None and not self.szego_hatn.is_psd:
            fails.append(f"szego_hatn not PSD (min_eig {self.szego_hatn.min_eig:.6g})")
        if self.purity_radii and not self.hatn_pure:
            bad = [str(i + 1) for i, ok in enumerate(self.pure_flags[:-1]) if not ok]
            fails.append(f"hatn not pure (indices {','.join(bad)})")
        if not self.is_contraction_tuple:
            fails.append("row operators exceed norm 1")
        return fails

    def to_dict(self) -> dict:
        def psd(r):
            return None if r is None else {"is_psd": bool(r.is_psd), "min_eig": r.min_eig,
                                           "hermitian_defect": r.hermitian_defect}
        return {
            "is_contraction_tuple": bool(self.is_contraction_tuple),
            "row_norms": self.row_norms,
            "commutation_residual": self.commutation_residual,
            "covariance_residual": self.covariance_residual,
            "szego_full": psd(self.szego_full),
            "szego_hat1": psd(self.szego_hat1),
            "szego_hatn": psd(self.szego_hatn),
            "pure_flags": [bool(f) for f in self.pure_flags],
            "purity_radii": self.purity_radii,
            "purity_indeterminate": [bool(f) for f in self.purity_indeterminate],
            "hatn_pure": bool(self.hatn_pure),
            "in_T1n": bool(self.in_T1n),
            "gkvw": {f"{p},{q}": {"c1": bool(v[0]), "c2": bool(v[1])} for (p, q), v in self.gkvw.items()},
            "failing_conditions": self.failing_conditions(),
        }


def validate(spec: TupleSpec, tol: float = CONTRACTION_TOL) -> ClassReport:
    """Structural checks: row contractivity, (u-)commutation, covariance."""
    report = ClassReport()
    report.row_norms = [float(np.linalg.norm(spec.row(i), 2)) for i in range(1, spec.n + 1)]
    report.is_contraction_tuple = all(nrm <= 1.0 + tol for nrm in report.row_norms)

    resid = 0.0
    if spec.d == 1:
        for i in range(1, spec.n + 1):
            for j in range(1, spec.n + 1):
                if i == j:
                    continue
                ti, tj = spec.op(i), spec.op(j)
                resid = max(resid, frob(ti @ tj - spec.u(i, j) * (tj @ ti)))
    else:
        for i, j in itertools.combinations(range(1, spec.n + 1), 2):
            for a in spec.blocks[i - 1]:
                for b in spec.blocks[j - 1]:
                    resid = max(resid, frob(a @ b - b @ a))
    report.commutation_residual = resid

    if spec.algebra is not None:
        alg = spec.algebra
        resid = 0.0
        for i in range(1, spec.n + 1):
            t = spec.op(i)
            inv = invert_perm(alg.automorphisms[i - 1])
            for p in range(alg.k):
                # sigma(alpha_i(e_p)) = sigma(e_{a^{-1}(p)})
                lhs = t @ alg.projection(inv[p], spec.dimH)
                rhs = alg.projection(p, spec.dimH) @ t
                resid = max(resid, frob(lhs - rhs))
        report.covariance_residual = resid
    return report


def subset_product(spec: TupleSpec, G: Sequence[int]) -> np.ndarray:
    """The product operator for an ordered subset G of {1..n}.

    Returns the dimH x d^{|G|}*dimH matrix built right-to-left as
    T_{g1} (I (x) T_{g2}) ... ; for d = 1 this is the plain matrix product.
    """
    result = np.eye(spec.dimH, dtype=complex)
    for g in reversed(list(G)):
        row = spec.row(g)
        result = row @ kron(np.eye(spec.d), result) if spec.d > 1 else row @ result
    return result


def szego_operator(spec: TupleSpec, S: Sequence[int]) -> np.ndarray:
    """Inclusion-exclusion operator sum_{G subset S} (-1)^|G| T_G T_G*."""
    S = sorted(set(S))
    out = np.zeros((spec.dimH, spec.dimH), dtype=complex)
    for r in range(len(S) + 1):
        sign = (-1.0) ** r
        for G in itertools.combinations(S, r):
            tg = subset_product(spec, G)
            out += sign * (tg @ adj(tg))
    return out


def cp_map_matrix(spec: TupleSpec, i: int) -> np.ndarray:
    """Matrix of X -> sum_j T_{i,j} X T_{i,j}* on column-stacked X."""
    phi = np.zeros((spec.dimH ** 2, spec.dimH ** 2), dtype=complex)
    for t in spec.blocks[i - 1]:
        phi += kron(t.conj(), t)
    return phi


def is_pure(spec: TupleSpec, i: int, tol: float = PURITY_TOL) -> tuple[bool, float]:
    """Purity of index i via the spectral radius of its completely positive map.

    In finite dimension the powers of the CP map applied to the identity tend
    to zero exactly when the spectral radius is below one, which is the
    weak-operator purity condition.
    """
    radius = float(np.max(np.abs(np.linalg.eigvals(cp_map_matrix(spec, i)))))
    return radius < 1.0 - tol, radius


def classify(spec: TupleSpec, tol: float = 1e-10) -> ClassReport:
    """Full class membership report for the dilatable class."""
    report = validate(spec)
    all_idx = list(range(1, spec.n + 1))
    report.szego_full = psd_check(szego_operator(spec, all_idx), tol)
    report.szego_hat1 = psd_check(szego_operator(spec, all_idx[1:]), tol)
    report.szego_hatn = psd_check(szego_operator(spec, all_idx[:-1]), tol)

    for i in all_idx:
        pure, radius = is_pure(spec, i)
        report.pure_flags.append(pure)
        report.purity_radii.append(radius)
        report.purity_indeterminate.append(abs(radius - 1.0) <= PURITY_TOL)
    report.hatn_pure = all(report.pure_flags[:-1]) if spec.n > 1 else True

    psd_without = {p: psd_check(szego_operator(spec, [i for i in all_idx if i != p]), tol).is_psd
                   for p in all_idx}
    report.gkvw = {(p, q): (psd_without[p], psd_without[q])
                   for p, q in itertools.combinations(all_idx, 2)}

    report.in_T1n = (report.is_contraction_tuple
                     and bool(report.szego_hat1.is_psd)
                     and bool(report.szego_hatn.is_psd)
                     and report.hatn_pure)
    return report


def merge_1n(spec: TupleSpec) -> TupleSpec:
    """Fuse indices 1 and n into the (n-1)-tuple (t_1 t_n, t_2, ..., t_{n-1}).

    The merged generator sits in slot 1; moving any other generator past it
    crosses both original factors, so the merged phase toward index i is
    u(i,1)*u(i,n).  With an algebra present the merged slot carries the
    composed automorphism.
    """
    if spec.d != 1:
        raise UnsupportedMultiplicity("merge_1n requires d = 1")
    if spec.n < 2:
        raise MalformedSpec("merge_1n needs n >= 2")
    m = spec.n - 1
    ops = [spec.op(1) @ spec.op(spec.n)] + [spec.op(i) for i in range(2, spec.n)]
    phases = np.ones((m, m), dtype=complex)
    for s in range(1, m):
        i = s + 1  # original index in slot s
        phases[s, 0] = spec.u(i, 1) * spec.u(i, spec.n)
        phases[0, s] = np.conj(phases[s, 0])
    for s in range(1, m):
        for t in range(1, m):
            phases[s, t] = spec.u(s + 1, t + 1)
    algebra = None
    if spec.algebra is not None:
        alg = spec.algebra
        merged_auto = [compose_perm(alg.automorphisms[0], alg.automorphisms[spec.n - 1])]
        merged_auto += [alg.automorphisms[i - 1] for i in range(2, spec.n)]
        algebra = AlgebraStructure(alg.k, list(alg.block_of), merged_auto)
    return TupleSpec(n=m, dimH=spec.dimH, d=1, blocks=[[t] for t in ops],
                     phases=phases, algebra=algebra)


def ordered_power_products(spec: TupleSpec, indices: list[tuple[int, ...]]) -> dict:
    """Memoized adjoint products T^{*(alpha)} for d = 1 multi-indices.

    T^{(alpha)} = t_1^{a_1} t_2^{a_2} ... with slot-1 powers leftmost; the
    returned map holds the adjoints (T^{(alpha)})*.
    """
    if spec.d != 1:
        raise UnsupportedMultiplicity("power products require d = 1")
    ops = [spec.op(i) for i in range(1, spec.n + 1)]
    memo: dict[tuple[int, ...], np.ndarray] = {tuple([0] * spec.n): np.eye(spec.dimH, dtype=complex)}

    def fill(alpha: tuple[int, ...]) -> np.ndarray:
        if alpha in memo:
            return memo[alpha]
        s = next(k for k, v in enumerate(alpha) if v > 0)
        prev = tuple(v - (1 if k == s else 0) for k, v in enumerate(alpha))
        memo[alpha] = fill(prev) @ adj(ops[s])
        return memo[alpha]

    for alpha in indices:
        fill(tuple(int(v) for v in alpha))
    return memo
