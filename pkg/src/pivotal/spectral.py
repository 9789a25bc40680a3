"""Efficiency against multinomial sampling: ``B = (phi_ij / phi_j)`` and its second eigenvalue.

``B`` equals ``Pi D^-1`` with ``Pi`` the second-order inclusion matrix and
``D = diag(phi)``, so it is similar to the symmetric ``D^-1/2 Pi D^-1/2``. The
eigenproblem is solved on that symmetric form with a cyclic Jacobi method.

For a study variable whose expanded values ``Y / phi`` are ``D^-1/2 z`` with
``z`` orthogonal to ``sqrt(phi)``, the design variance is ``z' S z`` and the
multinomial variance is ``z' z``, so the largest variance ratio over all
variables is the second eigenvalue of ``S``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateEigenspace, NoConvergence, ZeroProbabilityCluster
from .exact import InclusionMatrix

OFF_TOL = 1e-13
MAX_SWEEPS = 100
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class GablerMatrix:
    B: np.ndarray
    phi: np.ndarray
    kept: tuple  # 1-based labels of the positive-probability clusters
    size: int  # dimension before dropping zero-probability clusters


@dataclass(frozen=True)
class GablerSummary:
    B: np.ndarray
    phi: np.ndarray
    kept: tuple
    size: int
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns, of the symmetrized matrix
    lambda2: float
    sweeps: int


def gabler_matrix(im: InclusionMatrix) -> GablerMatrix:
    """Build ``B[i, j] = phi_ij / phi_j`` over the clusters with ``phi_j > 0``."""
    kept = tuple(i + 1 for i, f in enumerate(im.first) if f > 0)
    idx = [i - 1 for i in kept]
    phi = [im.first[j] for j in idx]
    if any(not f > 0 for f in phi):
        raise ZeroProbabilityCluster("zero-probability cluster survived filtering")
    B = np.array([[float(im.second[i][j] / im.first[j]) for j in idx] for i in idx])
    return GablerMatrix(B, np.array([float(f) for f in phi]), kept, im.size)


def jacobi_eigh(A, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors, sweeps)`` with eigenvalues in
    descending order and eigenvectors as matching columns.

    Raises
    ------
    NoConvergence
        If the off-diagonal Frobenius norm is still above ``tol`` after
        ``max_sweeps`` sweeps.
    """
    M = np.array(A, dtype=float)
    M = 0.5 * (M + M.T)
    m = M.shape[0]
    # plain lists: rotations on matrices this small are dominated by numpy call overhead
    A = M.tolist()
    V = np.eye(m).tolist()
    sweeps = 0
    while True:
        off = math.sqrt(sum(A[i][j] ** 2 for i in range(m) for j in range(m) if i != j))
        if off <= tol:
            break
        if sweeps >= max_sweeps:
            raise NoConvergence(f"off-diagonal norm {off:.3e} after {sweeps} sweeps")
        sweeps += 1
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p][q]
                if apq == 0.0:
                    continue
                diff = A[q][q] - A[p][p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for row in A:
                    x, y = row[p], row[q]
                    row[p] = c * x - s * y
                    row[q] = s * x + c * y
                Ap, Aq = A[p], A[q]
                for j in range(m):
                    x, y = Ap[j], Aq[j]
                    Ap[j] = c * x - s * y
                    Aq[j] = s * x + c * y
                Ap[q] = Aq[p] = 0.0
                for row in V:
                    x, y = row[p], row[q]
                    row[p] = c * x - s * y
                    row[q] = s * x + c * y
    A = np.array(A)
    V = np.array(V)
    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], V[:, order], sweeps


def lambda2(
    B,
    phi: Optional[Sequence[float]] = None,
    kept: Optional[tuple] = None,
    size: Optional[int] = None,
) -> GablerSummary:
    """Eigenvalues of ``B`` via its symmetrized form; ``lambda2`` is the second largest.

    ``lambda2`` is ``nan`` for a single cluster.
    """
    if isinstance(B, GablerMatrix):
        B, phi, kept, size = B.B, B.phi, B.kept, B.size
    B = np.asarray(B, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if kept is None:
        kept = tuple(range(1, len(phi) + 1))
    root = np.sqrt(phi)
    S = (B * root) / root[:, None]
    vals, vecs, sweeps = jacobi_eigh(S)
    l2 = float(vals[1]) if len(vals) > 1 else float("nan")
    return GablerSummary(
        B=B, phi=phi, kept=tuple(kept), size=size or len(phi),
        eigenvalues=vals, eigenvectors=vecs, lambda2=l2, sweeps=sweeps,
    )


def gabler_summary(im: InclusionMatrix) -> GablerSummary:
    return lambda2(gabler_matrix(im))


def worst_case_variable(summary: GablerSummary) -> np.ndarray:
    """Cluster totals ``Y`` maximising the design-to-multinomial variance ratio.

    The ratio attained is ``summary.lambda2``. Dropped zero-probability clusters
    get ``Y = 0``. When the second eigenvalue is repeated a
    :class:`DegenerateEigenspace` warning is issued and one vector of the
    eigenspace is returned.
    """
    vals, vecs, phi = summary.eigenvalues, summary.eigenvectors, summary.phi
    l2 = summary.lambda2
    same = [j for j in range(len(vals)) if j > 0 and abs(vals[j] - l2) <= DEGENERACY_TOL]
    if len(same) > 1 or abs(vals[0] - l2) <= DEGENERACY_TOL:
        warnings.warn(f"second eigenvalue {l2} is repeated", DegenerateEigenspace)
        same = [j for j in range(len(vals)) if abs(vals[j] - l2) <= DEGENERACY_TOL]
    s = np.sqrt(phi) / math.sqrt(phi.sum())
    best = None
    for j in same:
        z = vecs[:, j] - (vecs[:, j] @ s) * s
        if best is None or np.linalg.norm(z) > np.linalg.norm(best):
            best = z
    Y_kept = np.sqrt(phi) * best
    Y = np.zeros(summary.size)
    for i, c in enumerate(summary.kept):
        Y[c - 1] = Y_kept[i]
    return Y
