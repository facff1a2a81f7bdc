"""Kernel-based differentiation stencils from the saddle-point system.

For a kernel ``K`` of order ``s``, nodes ``x_1..x_N`` and an operator ``D``
frozen at ``z``, the weights ``w`` and auxiliary coefficients ``v`` solve::

    sum_j w_j K(x_i, x_j) + sum_l v_l p_l(x_i) = D'K(z, x_i)    (i <= N)
    sum_j w_j p_l(x_j)                        = D p_l(z)        (l <= M)

with ``p_l`` a basis of polynomials of degree below ``s``.  The second block
only has to be consistent; the node set need not be unisolvent.  ``w`` is
then unique while ``v`` may not be.

All linear algebra is done on a dimensionless version of the system: the
polynomial basis is scaled by the stencil radius ``h`` and the unknown
weights by ``h**k``, and the kernel block by its largest entry.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import InconsistentMomentsError, SingularSystemError
from .geometry import PointSet, stencil_radius
from .kernels import (
    DiffOperator,
    KernelSpec,
    check_operator_admissible,
    kernel_matrix,
    operator_apply_kernel,
)
from .polyspace import PolyBasis, operator_moments, vandermonde

logger = logging.getLogger(__name__)

CONSISTENCY_RTOL = 1e-8
RANK_RTOL = 1e-10
KKT_COND_MAX = 1e12
SPD_RTOL = 1e-13


@dataclass(frozen=True)
class StencilProblem:
    kernel: KernelSpec
    D: DiffOperator
    ps: PointSet
    s: int | None = None

    def __post_init__(self):
        s = self.kernel.s if self.s is None else int(self.s)
        if s < self.kernel.s_min:
            raise ValueError(f"s={s} is below the kernel's minimum order {self.kernel.s_min}")
        object.__setattr__(self, "s", s)
        if self.D.dim != self.ps.dim:
            raise ValueError("operator and point set dimensions differ")
        check_operator_admissible(self.kernel, self.D)

    @property
    def scale(self) -> float:
        """Stencil radius, or 1 when every node sits on the center."""
        h = stencil_radius(self.ps)
        return h if h > 0 else 1.0


@dataclass(frozen=True)
class MomentAnalysis:
    """Rank-revealing analysis of ``V^T w = b`` in dimensionless form.

    ``particular`` is the minimum-norm solution (or least-squares solution
    when inconsistent) and ``nullspace`` an orthonormal basis of
    ``ker(V^T)``, both in the dimensionless weight variable ``w * h**k``.
    """

    V: np.ndarray
    b: np.ndarray
    rank: int
    augmented_rank: int
    residual: float
    consistent: bool
    particular: np.ndarray
    nullspace: np.ndarray
    range_basis: np.ndarray


def _numerical_rank(R: np.ndarray) -> int:
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0:
        return 0
    return int(np.sum(diag > RANK_RTOL * diag[0]))


def analyze_moments(V: np.ndarray, b: np.ndarray) -> MomentAnalysis:
    """Decide solvability of ``V^T w = b`` with a pivoted QR factorization of ``V``."""
    N, M = V.shape
    if M == 0:
        return MomentAnalysis(V, b, 0, 0, 0.0, True, np.zeros(N), np.eye(N), np.zeros((N, 0)))
    Q, R, piv = sla.qr(V, pivoting=True, mode="full")
    rank = _numerical_rank(R)
    Q1 = Q[:, :rank]
    R1 = R[:rank, :]
    bp = b[piv]
    if rank:
        y, *_ = np.linalg.lstsq(R1.T, bp, rcond=None)
        resid = float(np.linalg.norm(R1.T @ y - bp))
        particular = Q1 @ y
    else:
        resid = float(np.linalg.norm(b))
        particular = np.zeros(N)
    aug = np.column_stack([V.T, b])
    _, Ra, _ = sla.qr(aug, pivoting=True, mode="economic")
    aug_rank = _numerical_rank(Ra)
    consistent = resid <= CONSISTENCY_RTOL * (1.0 + float(np.linalg.norm(b)))
    return MomentAnalysis(V, b, rank, aug_rank, resid, consistent, particular, Q[:, rank:], Q1)


def moment_system(problem: StencilProblem, q: int | None = None, basis_center=None):
    """Dimensionless Vandermonde ``V``, right-hand side ``b`` and the basis used.

    ``b`` is ``D p_l(z) * h**k``, so that ``V^T (w * h**k) = b``.
    """
    q = problem.s if q is None else q
    h = problem.scale
    center = problem.ps.center if basis_center is None else basis_center
    basis = PolyBasis(problem.ps.dim, q, center, h)
    V = vandermonde(basis, problem.ps)
    b = operator_moments(basis, problem.D, problem.ps.center) * h**problem.D.order
    return basis, V, b


def moment_residual(problem: StencilProblem, w, q: int | None = None) -> tuple[float, float]:
    """``(||V^T w h^k - b||, tolerance)`` in dimensionless units."""
    _, V, b = moment_system(problem, q)
    wt = np.asarray(w, dtype=float) * problem.scale**problem.D.order
    res = float(np.linalg.norm(V.T @ wt - b))
    return res, CONSISTENCY_RTOL * (1.0 + float(np.linalg.norm(b)))


def check_consistency(problem: StencilProblem, q: int | None = None) -> dict:
    """Whether the moment equations over ``Pi_q`` (default ``q = s``) are solvable."""
    _, V, b = moment_system(problem, q)
    an = analyze_moments(V, b)
    return {
        "consistent": an.consistent,
        "residual": an.residual,
        "rank": an.rank,
        "augmented_rank": an.augmented_rank,
    }


def _violated_moment(basis: PolyBasis, an: MomentAnalysis) -> str:
    r = an.V.T @ an.particular - an.b
    i = int(np.argmax(np.abs(r)))
    alpha = basis.members[i]
    return f"moment equation for (x - z)^{alpha} cannot be satisfied (residual {abs(r[i]):.3g})"


@dataclass(frozen=True)
class StencilResult:
    """Weights ``w*``, one valid ``v`` and solver diagnostics.

    ``aux`` holds ``v`` for the basis ``(x - z)**alpha`` (unscaled, centered
    at ``z``) unless a different basis center was requested.
    """

    weights: np.ndarray
    aux: np.ndarray
    kernel_rhs: np.ndarray
    moments: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def compute_weights(problem: StencilProblem, basis_center=None) -> StencilResult:
    """Solve the saddle-point system for the stencil weights.

    Raises
    ------
    InconsistentMomentsError
        The polynomial moment equations have no solution.
    SingularSystemError
        Duplicate nodes, or the kernel block is singular on ``ker(V^T)``.
    """
    ps, kernel, D = problem.ps, problem.kernel, problem.D
    h = problem.scale
    k = D.order
    basis, V, m = moment_system(problem, basis_center=basis_center)
    an = analyze_moments(V, m)
    if not an.consistent:
        raise InconsistentMomentsError("inconsistent moment system: " + _violated_moment(basis, an))
    if ps.duplicates:
        i, j = ps.duplicates[0]
        raise SingularSystemError(
            f"numerically singular saddle system: nodes {i} and {j} coincide"
        )

    A = kernel_matrix(kernel, ps.nodes, ps.nodes)
    bK = np.asarray(operator_apply_kernel(kernel, D, ps.center, ps.nodes), dtype=float)
    c = float(np.max(np.abs(A)))
    if c == 0.0:
        c = 1.0
    At = A / c
    bt = bK * h**k / c
    N, M = V.shape

    diag = {
        "vandermonde_rank": an.rank,
        "augmented_rank": an.augmented_rank,
        "consistency_residual": an.residual,
        "n_nodes": N,
        "n_moments": M,
    }

    wt = vt = None
    if an.rank == M:
        kkt = np.block([[At, V], [V.T, np.zeros((M, M))]])
        cond = float(np.linalg.cond(kkt))
        diag["condition"] = cond
        if np.isfinite(cond) and cond < KKT_COND_MAX:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("error", sla.LinAlgWarning)
                    sol = sla.solve(kkt, np.concatenate([bt, m]), assume_a="sym")
                wt, vt = sol[:N], sol[N:]
                diag["method"] = "symmetric-indefinite"
            except (sla.LinAlgError, sla.LinAlgWarning):
                logger.debug("KKT factorization failed, using nullspace method")
    if wt is None:
        wt, cond_h = _nullspace_solve(At, bt, an)
        diag["method"] = "nullspace"
        diag["condition"] = cond_h
        vt, *_ = np.linalg.lstsq(V, bt - At @ wt, rcond=None)

    w = wt / h**k
    degrees = np.array([sum(a) for a in basis.members], dtype=float)
    v = vt * c / h**k / h**degrees
    return StencilResult(
        weights=w,
        aux=v,
        kernel_rhs=bK,
        moments=m / h**k * h**degrees,
        diagnostics=diag,
    )


def _nullspace_solve(At: np.ndarray, bt: np.ndarray, an: MomentAnalysis) -> tuple[np.ndarray, float]:
    Z = an.nullspace
    wp = an.particular
    if Z.shape[1] == 0:
        return wp, 1.0
    H = Z.T @ At @ Z
    H = 0.5 * (H + H.T)
    eig = np.linalg.eigvalsh(H)
    top = float(np.max(np.abs(eig)))
    if top == 0.0 or eig[0] <= SPD_RTOL * top:
        raise SingularSystemError(
            "numerically singular saddle system: kernel block is not positive "
            "definite on the moment-free subspace"
        )
    u = sla.solve(H, Z.T @ (bt - At @ wp), assume_a="pos")
    return wp + Z @ u, top / float(eig[0])


def apply_stencil(w, fvals) -> float:
    """``sum_j w_j f(x_j)``."""
    w = np.asarray(w, dtype=float)
    fvals = np.asarray(fvals, dtype=float)
    if w.shape != fvals.shape:
        raise ValueError(f"length mismatch: {w.shape[0]} weights, {fvals.shape[0]} values")
    return float(w @ fvals)
