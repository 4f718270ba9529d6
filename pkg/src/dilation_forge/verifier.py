"""Independent numerical verification of the dilation identities.

Every check recomputes both sides of a proved identity from the assembled
model and reports a relative residual.  Interior restrictions make the
truncation error exactly zero on the compared subspace: margin 1 for
single-operator identities, margin 2 where two operators compose.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .builder import DilationModel, simplex_mass
from .fock import creation_matrix, interior_projector
from .linalg import adj, eye, frob
from .tuples import invert_perm

DEFAULT_TOLERANCES = {
    "linear": 1e-10,   # single-operator intertwinings, isometries, equivariance
    "product": 1e-9,   # two-factor factorizations and commutation
    "pi": 1e-12,       # exact telescoping of the dilation map
    "moment": 1e-10,   # brute-force moment oracle (plus computed allowance)
}


@dataclass
class VerificationReport:
    residuals: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    tail_bounds: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def failures(self) -> list[str]:
        return [k for k, ok in self.verdicts.items() if not ok]

    def to_dict(self) -> dict:
        return {"residuals": {k: float(v) for k, v in self.residuals.items()},
                "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
                "tail_bounds": [float(t) for t in self.tail_bounds],
                "config": self.config,
                "passed": bool(self.passed),
                "failures": self.failures()}


def _rel(delta: np.ndarray, reference: np.ndarray) -> float:
    return frob(delta) / max(1.0, frob(reference))


def verify_pi(model: DilationModel) -> dict:
    """Exact telescoping: ||Pi h||^2 + tail(h) = ||h||^2 per basis vector.

    ``pi_isometry`` uses the assembled matrix (so it also exercises V);
    ``pi_tail_match`` recomputes the partial mass directly from defect
    products, independent of every dilation matrix.
    """
    col_mass = np.sum(np.abs(model.Pi) ** 2, axis=0)
    pi_isometry = float(np.max(np.abs(col_mass + model.tails - 1.0)))
    direct = simplex_mass(model.merged, model.defects["hat1n"].root, model.N)
    pi_tail_match = float(np.max(np.abs(direct + model.tails - 1.0)))
    return {"pi_isometry": pi_isometry, "pi_tail_match": pi_tail_match}


def verify_intertwining(model: DilationModel) -> dict:
    """Coextension identities (I_i x Pi) T_i* = V_i* Pi on interior cells."""
    spec, fock, pi = model.spec, model.fock, model.Pi
    p_int = interior_projector(fock, 1)
    out = {}

    def entry(name, w, t):
        lhs = p_int @ (adj(w) @ pi)
        rhs = p_int @ (pi @ adj(t))
        out[name] = _rel(lhs - rhs, rhs)

    entry("dilation1_tau1", model.isometries[0], spec.op(1))
    for i in range(2, spec.n):
        entry(f"dilation_L{i}", model.isometries[i - 1], spec.op(i))
    entry("dilation2_taun", model.isometries[-1], spec.op(spec.n))
    entry("dilationV_L1", creation_matrix(fock, 0), model.merged.op(1))
    return out


def verify_factorization(model: DilationModel) -> dict:
    """Transfer products against the merged creation operator.

    tau1 (I x taun) equals the merged creation; the reversed product equals it
    up to the flip phase u(n,1) that re-orders the two fused factors.
    """
    fock = model.fock
    p2 = interior_projector(fock, min(2, fock.N))
    l1 = creation_matrix(fock, 0)
    v1, vn = model.isometries[0], model.isometries[-1]
    flip = model.spec.u(model.spec.n, 1)
    return {
        "factor_tau12": _rel((v1 @ vn - l1) @ p2, l1 @ p2),
        "factor_tau21": _rel((vn @ v1 - flip * l1) @ p2, l1 @ p2),
    }


def verify_isometric_representation(model: DilationModel) -> dict:
    """Each dilated operator is isometric on interior cells and the family
    u-commutes with the original phase table."""
    spec, fock = model.spec, model.fock
    p1 = interior_projector(fock, 1)
    p2 = interior_projector(fock, min(2, fock.N))
    out = {}
    for i, w in zip(range(1, spec.n + 1), model.isometries):
        delta = p1 @ (adj(w) @ w - eye(fock.dim)) @ p1
        out[f"isometry_v{i}"] = _rel(delta, p1)
    for i in range(1, spec.n + 1):
        for j in range(i + 1, spec.n + 1):
            vi, vj = model.isometries[i - 1], model.isometries[j - 1]
            delta = (vi @ vj - spec.u(i, j) * (vj @ vi)) @ p2
            out[f"commute_{i}_{j}"] = _rel(delta, vj @ vi @ p2)
    return out


def _power_products(mats: list, indices: list) -> dict:
    dim = mats[0].shape[0]
    memo = {tuple([0] * len(mats)): np.eye(dim, dtype=complex)}

    def fill(beta):
        if beta in memo:
            return memo[beta]
        s = next(k for k, v in enumerate(beta) if v > 0)
        prev = tuple(v - (1 if k == s else 0) for k, v in enumerate(beta))
        memo[beta] = mats[s] @ fill(prev)
        return memo[beta]

    for beta in indices:
        fill(tuple(beta))
    return memo


def moment_indices(n: int, maxdeg: int) -> list:
    out = [tuple([0] * n)]
    frontier = list(out)
    for _ in range(maxdeg):
        nxt = []
        for beta in frontier:
            for s in range(n):
                cand = tuple(v + (1 if k == s else 0) for k, v in enumerate(beta))
                if cand not in nxt:
                    nxt.append(cand)
        frontier = sorted(set(nxt))
        out.extend(frontier)
    return sorted(set(out))


def verify_moments(model: DilationModel, maxdeg: int = 3) -> dict:
    """Brute-force oracle <Pi h, V^beta Pi g> = <h, T^beta g> over all basis pairs.

    At finite truncation the identity can only hold up to the dropped mass, so
    the entry comes with a computed ``moment_allowance``: the spectral defect
    of Pi*Pi plus the largest operator-norm gap between V^beta* Pi and
    Pi T^beta*.  Both vanish when the tuple is nilpotent enough for the
    truncation to be exact.
    """
    spec = model.spec
    maxdeg = min(maxdeg, max(model.N - 1, 0))
    betas = moment_indices(spec.n, maxdeg)
    vmemo = _power_products(model.isometries, betas)
    tmemo = _power_products([spec.op(i) for i in range(1, spec.n + 1)], betas)
    residual = 0.0
    gap = 0.0
    for beta in betas:
        lhs = adj(model.Pi) @ vmemo[beta] @ model.Pi
        rhs = tmemo[beta]
        residual = max(residual, float(np.max(np.abs(lhs - rhs))))
        if sum(beta) > 0:
            diff = adj(vmemo[beta]) @ model.Pi - model.Pi @ adj(tmemo[beta])
            gap = max(gap, float(np.linalg.norm(diff, 2)))
    gram_defect = eye(spec.dimH) - adj(model.Pi) @ model.Pi
    lam = float(max(0.0, np.max(np.linalg.eigvalsh(0.5 * (gram_defect + adj(gram_defect))))))
    return {"moment_match": residual, "moment_allowance": gap + lam}


def verify_equivariance(model: DilationModel) -> dict:
    """Algebra covariance of U1, Un and of the dilated isometries."""
    spec = model.spec
    if spec.algebra is None:
        return {}
    alg = spec.algebra
    merged_alg = model.merged.algebra
    coupling = model.coupling
    rho = model.rho_matrices()
    labels_d = coupling.Dspace.labels
    labels_dp = coupling.Dprime.labels
    labels_q1 = model.defects["hat1"].labels
    a1 = alg.automorphisms[0]
    an = alg.automorphisms[spec.n - 1]
    g1n = merged_alg.automorphisms[0]

    def ind(labels, perm, p):
        twisted = np.asarray([perm[int(b)] for b in labels])
        return np.diag((twisted == p).astype(complex))

    ident = list(range(alg.k))
    out = {}
    r_u1 = r_un = 0.0
    for p in range(alg.k):
        dom = np.block([[ind(labels_d, ident, p), np.zeros((labels_d.size, labels_dp.size))],
                        [np.zeros((labels_dp.size, labels_d.size)), ind(labels_dp, g1n, p)]])
        cod = np.block([[ind(labels_d, a1, p), np.zeros((labels_d.size, labels_dp.size))],
                        [np.zeros((labels_dp.size, labels_d.size)), ind(labels_dp, ident, p)]])
        r_u1 = max(r_u1, _rel(model.transfer.U1 @ dom - cod @ model.transfer.U1,
                              model.transfer.U1))
        dom_n = np.block([[ind(labels_d, ident, p), np.zeros((labels_d.size, labels_q1.size))],
                          [np.zeros((labels_q1.size, labels_d.size)), ind(labels_q1, g1n, p)]])
        cod_n = np.block([[ind(labels_d, an, p), np.zeros((labels_d.size, labels_q1.size))],
                          [np.zeros((labels_q1.size, labels_d.size)), ind(labels_q1, ident, p)]])
        r_un = max(r_un, _rel(model.transfer.Un @ dom_n - cod_n @ model.transfer.Un,
                              model.transfer.Un))
    out["equiv_U1"] = r_u1
    out["equiv_Un"] = r_un

    perms = [a1] + [alg.automorphisms[i - 1] for i in range(2, spec.n)] + [an]
    for i, (w, perm) in enumerate(zip(model.isometries, perms), start=1):
        inv = invert_perm(perm)
        resid = max(_rel(w @ rho[inv[p]] - rho[p] @ w, rho[p] @ w) for p in range(alg.k))
        out[f"equiv_v{i}"] = resid
    inv_g = invert_perm(g1n)
    l1 = creation_matrix(model.fock, 0)
    out["equiv_L1"] = max(_rel(l1 @ rho[inv_g[p]] - rho[p] @ l1, rho[p] @ l1)
                          for p in range(alg.k))
    return out


def full_report(model: DilationModel, tolerances: dict | None = None,
                moment_maxdeg: int = 3) -> VerificationReport:
    """Run every verifier and aggregate residuals with per-identity verdicts."""
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    report = VerificationReport(config={"tolerances": tol, "N": model.N,
                                        "moment_maxdeg": moment_maxdeg})
    report.tail_bounds = [float(t) for t in model.tails]

    groups = [
        (verify_pi(model), "pi"),
        (verify_intertwining(model), "linear"),
        (verify_isometric_representation(model), "linear"),
        (verify_factorization(model), "product"),
        (verify_equivariance(model), "linear"),
    ]
    for entries, kind in groups:
        for name, value in entries.items():
            report.residuals[name] = value
            report.verdicts[name] = value <= tol[kind]

    moments = verify_moments(model, moment_maxdeg)
    report.residuals.update(moments)
    report.verdicts["moment_match"] = (
        moments["moment_match"] <= tol["moment"] + moments["moment_allowance"])
    return report
