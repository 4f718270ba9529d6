"""Truncated Fock-space machinery for the merged (n-1)-generator system.

The model space is the direct sum of cells indexed by multi-indices alpha in
Z_+^m with total degree |alpha| <= N, each cell a copy of the coefficient
space.  The canonical tensor-slot order inside a cell monomial is generator
order: the merged generator's factors first, then generator 2, and so on.

Phase bookkeeping: the generators u-commute via the merged table, so moving a
tensor factor across the monomial picks up phases.  Two insertion conventions
appear:

* front insertion (creation): a new generator-s factor enters at the front
  and crosses the factors of generators before it; phase
  prod_{s' < s} u(s, s')^{alpha_{s'}}.
* coefficient-end insertion (embed_shift): a new merged-slot factor enters
  next to the coefficient space and crosses every factor after slot s; phase
  prod_{s' > s} u(s', s)^{alpha_{s'}}.  This is the identification used to
  view F(E) (x) E_merged (x) D inside F(E) (x) D when assembling transfer
  operators.

With an all-ones table both conventions are the plain shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .linalg import as_matrix

from math import comb


def enumerate_indices(m: int, N: int) -> list[tuple[int, ...]]:
    """All alpha in Z_+^m with |alpha| <= N, ordered by degree then colex.

    Within a degree the order is (k,0,..) before (k-1,1,0,..) etc., i.e.
    ascending in the reversed tuple, so m=2, N=1 yields [(0,0),(1,0),(0,1)].
    """
    if m < 1 or N < 0:
        raise DimensionMismatch("need m >= 1 and N >= 0")
    out: list[tuple[int, ...]] = []

    def compositions(total, slots):
        if slots == 1:
            yield (total,)
            return
        for last in range(total + 1):
            for head in compositions(total - last, slots - 1):
                yield head + (last,)

    for deg in range(N + 1):
        level = sorted(compositions(deg, m), key=lambda a: tuple(reversed(a)))
        out.extend(level)
    return out


@dataclass
class FockModel:
    """Index bookkeeping for the truncated Fock space F_N(E) (x) D."""

    m: int
    N: int
    coeff_dim: int
    merged_phases: np.ndarray
    index_list: list[tuple[int, ...]] = field(init=False)
    index_of: dict = field(init=False)

    def __post_init__(self):
        self.merged_phases = as_matrix(self.merged_phases)
        if self.merged_phases.shape != (self.m, self.m):
            raise DimensionMismatch("merged phase table must be m x m")
        self.index_list = enumerate_indices(self.m, self.N)
        self.index_of = {alpha: i for i, alpha in enumerate(self.index_list)}
        assert len(self.index_list) == comb(self.m + self.N, self.m)

    @property
    def cell_count(self) -> int:
        return len(self.index_list)

    @property
    def dim(self) -> int:
        return self.cell_count * self.coeff_dim

    def u(self, s: int, t: int) -> complex:
        return complex(self.merged_phases[s, t])

    def phase_front(self, s: int, alpha: tuple[int, ...]) -> complex:
        out = 1.0 + 0.0j
        for t in range(s):
            out *= self.u(s, t) ** alpha[t]
        return out

    def phase_back(self, s: int, alpha: tuple[int, ...]) -> complex:
        out = 1.0 + 0.0j
        for t in range(s + 1, self.m):
            out *= self.u(t, s) ** alpha[t]
        return out

    def cell_shift(self, s: int, phase_fn) -> np.ndarray:
        """Cell-level shift alpha -> alpha + e_s weighted by phase_fn(alpha)."""
        mat = np.zeros((self.cell_count, self.cell_count), dtype=complex)
        for src, alpha in enumerate(self.index_list):
            if sum(alpha) == self.N:
                continue
            dst = self.index_of[tuple(v + (1 if k == s else 0) for k, v in enumerate(alpha))]
            mat[dst, src] = phase_fn(alpha)
        return mat

    def cell_diag(self, values) -> np.ndarray:
        """Block-diagonal matrix acting as values[cell] * I_coeff on each cell."""
        vals = np.asarray(values, dtype=complex)
        if vals.shape != (self.cell_count,):
            raise DimensionMismatch("need one value per cell")
        return np.kron(np.diag(vals), np.eye(self.coeff_dim, dtype=complex))

    def cellwise(self, block) -> np.ndarray:
        """The same coefficient-space map applied on every cell."""
        return np.kron(np.eye(self.cell_count, dtype=complex), as_matrix(block))


def creation_matrix(model: FockModel, s: int) -> np.ndarray:
    """Left creation operator of generator s (0-based slot) on F_N(E) (x) D.

    Maps cell (alpha, v) to phase_front(s, alpha) * (alpha + e_s, v); cells at
    the truncation boundary |alpha| = N map to zero.
    """
    if not 0 <= s < model.m:
        raise DimensionMismatch(f"generator index {s} out of range")
    cell = model.cell_shift(s, lambda alpha: model.phase_front(s, alpha))
    return np.kron(cell, np.eye(model.coeff_dim, dtype=complex))


def interior_projector(model: FockModel, margin: int) -> np.ndarray:
    """Orthogonal projection onto cells with |alpha| <= N - margin."""
    if margin < 0 or margin > model.N:
        raise DimensionMismatch(f"margin {margin} outside 0..N")
    keep = np.asarray([1.0 if sum(a) <= model.N - margin else 0.0 for a in model.index_list])
    return model.cell_diag(keep)


def embed_shift(model: FockModel, block, s: int = 0) -> np.ndarray:
    """Embed cellwise-applied ``block`` through the coefficient-end slot-s shift.

    ``block`` maps some q-dimensional space into the coefficient space; the
    result maps the cell-indexed sum of those q-spaces into the model, landing
    in cells with alpha_s >= 1 and applying phase_back.  Cells at |alpha| = N
    are dropped (truncation boundary); the adjoint therefore annihilates cells
    with alpha_s = 0.
    """
    block = as_matrix(block)
    if block.shape[0] != model.coeff_dim:
        raise DimensionMismatch(
            f"block has {block.shape[0]} rows, coefficient dimension is {model.coeff_dim}")
    cell = model.cell_shift(s, lambda alpha: model.phase_back(s, alpha))
    return np.kron(cell, block)
