"""Dense linear algebra for small matrices.

Everything here works on float64 numpy arrays of modest size (dimensions up
to a few dozen). The routines that matter for the decomposability test are
written out by hand: a cyclic Jacobi eigensolver for symmetric matrices,
Householder QR with optional column pivoting, and an orthonormal complement
built from a single Householder reflection.

Singular values come from the eigendecomposition of the small Gram matrix
``B @ B.T``: each ``sigma_i`` is the length of ``B.T @ q_i`` for the Gram
eigenvector ``q_i``. Taking plain square roots of the eigenvalues would square
the condition number (relative error ``eps * (sigma_max / sigma_i)**2``);
going through the eigenvectors brings that down to about
``eps * sigma_max / sigma_i``. Singular values near zero are still only
accurate to ``eps * sigma_max`` in absolute terms; ``numerical_rank`` uses a
one-sided Jacobi SVD instead.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

Matrix = np.ndarray
Vector = np.ndarray

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 64
# negative Gram eigenvalues down to -CLAMP_TOL * lambda_max are rounding noise
CLAMP_TOL = 1e-10


class NumericalError(ArithmeticError):
    """An iterative routine failed on input that passed validation."""


class SingularMatrixError(NumericalError):
    pass


class SymmetricEigen(NamedTuple):
    eigenvalues: Vector
    eigenvectors: Matrix


def as_matrix(a, name: str = "matrix") -> Matrix:
    m = np.array(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_vector(v, name: str = "vector") -> Vector:
    x = np.array(v, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


def multiply(a, b) -> Matrix:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def gram(b) -> Matrix:
    """Return ``b @ b.T``, symmetric to the bit."""
    b = as_matrix(b, "b")
    g = b @ b.T
    upper = np.triu(g)
    return upper + np.triu(g, 1).T


def jacobi_symmetric_eigen(
    s, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> SymmetricEigen:
    """Eigen-decompose a symmetric matrix with cyclic Jacobi rotations.

    Sweeps run over all pairs ``p < q`` in row order until the Frobenius norm
    of the off-diagonal part drops to ``tol * ||s||_F``. Eigenvalues come back
    in descending order, eigenvectors as the matching columns.

    Raises ``NumericalError`` if ``max_sweeps`` sweeps do not converge.
    """
    a = as_matrix(s, "s")
    n, k = a.shape
    if n != k:
        raise ValueError(f"matrix must be square, got {a.shape}")
    scale_max = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * scale_max:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    target = tol * np.linalg.norm(a)

    sweep = 0
    while True:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        if sweep == max_sweeps:
            raise NumericalError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e})"
            )
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app, aqq = a[p, p], a[q, q]
                diff = aqq - app
                if abs(apq) < abs(diff) * 1e-36:
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                rp = a[p].copy()
                rq = a[q].copy()
                new_p = c * rp - sn * rq
                new_q = sn * rp + c * rq
                a[p], a[q] = new_p, new_q
                a[:, p], a[:, q] = new_p, new_q
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - sn * vq
                v[:, q] = sn * vp + c * vq

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return SymmetricEigen(w[order], v[:, order])


def singular_values(b) -> Vector:
    """Singular values of ``b`` in descending order.

    Uses the smaller of the two Gram matrices, so the result has
    ``min(rows, cols)`` entries.
    """
    b = as_matrix(b, "b")
    if b.shape[0] > b.shape[1]:
        b = b.T
    if b.shape[0] == 0:
        return np.zeros(0)
    w, q = jacobi_symmetric_eigen(gram(b))
    lam_max = max(w[0], 0.0)
    if w[-1] < -CLAMP_TOL * lam_max:
        raise NumericalError(f"Gram matrix has eigenvalue {w[-1]:.3e} < 0")
    # ||B^T q_i|| instead of sqrt(lambda_i): absolute error eps * sigma_max
    # rather than sqrt(eps) * sigma_max for the small values
    sigma = np.linalg.norm(b.T @ q, axis=0)
    return np.sort(sigma)[::-1]


def _one_sided_jacobi_singular_values(
    b, tol: float = 1e-15, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> Vector:
    # Hestenes: rotate row pairs until mutually orthogonal; absolute error
    # ~eps * sigma_max, so zero singular values come out near 1e-16 * sigma_max
    r = as_matrix(b, "b")
    if r.shape[0] > r.shape[1]:
        r = r.T
    r = r.copy()
    n = r.shape[0]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = r[p] @ r[p]
                beta = r[q] @ r[q]
                gamma = r[p] @ r[q]
                if gamma == 0.0 or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = c * t
                rp = r[p].copy()
                r[p] = c * rp - sn * r[q]
                r[q] = sn * rp + c * r[q]
        if not rotated:
            return np.sort(np.linalg.norm(r, axis=1))[::-1]
    raise NumericalError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")


def numerical_rank(b, tau_rank: float) -> int:
    """Number of singular values above ``tau_rank * sigma_max``.

    The singular values here come from one-sided Jacobi rather than the Gram
    matrix: the Gram route cannot tell a zero singular value from one of
    about ``1e-8 * sigma_max``, far above useful rank thresholds.
    """
    if tau_rank <= 0:
        raise ValueError("tau_rank must be positive")
    sigma = _one_sided_jacobi_singular_values(b)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma > tau_rank * sigma[0]))


def _householder_vector(x: Vector) -> tuple[Vector, float]:
    # v, beta with (I - beta v v^T) x = -sign(x0) ||x|| e0
    v = x.copy()
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return v, 0.0
    alpha = -np.copysign(norm, x[0])
    v[0] = x[0] - alpha
    beta = 2.0 / np.dot(v, v)
    return v, beta


def householder_qr(a, pivoting: bool = False) -> tuple[Matrix, Matrix, np.ndarray]:
    """Full QR factorization ``a[:, perm] = Q @ R``.

    With ``pivoting`` the column of largest remaining norm is moved to the
    front at each step (Businger-Golub), so ``|R[k, k]|`` is non-increasing.
    """
    r = as_matrix(a, "a").copy()
    rows, cols = r.shape
    perm = np.arange(cols)
    reflectors = []
    for k in range(min(rows - 1, cols)):
        if pivoting:
            norms = np.sum(r[k:, k:] ** 2, axis=0)
            j = k + int(np.argmax(norms))
            if j != k:
                r[:, [k, j]] = r[:, [j, k]]
                perm[[k, j]] = perm[[j, k]]
        v, beta = _householder_vector(r[k:, k])
        reflectors.append((k, v, beta))
        if beta == 0.0:
            continue
        r[k:, k:] -= beta * np.outer(v, v @ r[k:, k:])
        r[k + 1 :, k] = 0.0
    q = np.eye(rows)
    for k, v, beta in reversed(reflectors):
        if beta:
            q[k:, :] -= beta * np.outer(v, v @ q[k:, :])
    return q, r, perm


def solve_upper(r: Matrix, b: Matrix) -> Matrix:
    n = r.shape[0]
    x = np.array(b, dtype=np.float64)
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - r[i, i + 1 :] @ x[i + 1 :]) / r[i, i]
    return x


def invert(a, tau_rank: float) -> Matrix:
    """Inverse of a square matrix through column-pivoted QR.

    Raises ``SingularMatrixError`` when the pivoted ``R`` has a diagonal entry
    at or below ``tau_rank * |R[0, 0]|``, or when the computed inverse leaves a
    residual ``||A A^-1 - I||_max`` above 1e-10.
    """
    a = as_matrix(a, "a")
    n, k = a.shape
    if n != k:
        raise ValueError(f"matrix must be square, got {a.shape}")
    q, r, perm = householder_qr(a, pivoting=True)
    d = np.abs(np.diag(r))
    if n == 0:
        return np.zeros((0, 0))
    if d[0] == 0.0 or np.any(d <= tau_rank * d[0]):
        raise SingularMatrixError("matrix is singular within tau_rank")
    inv = np.empty_like(a)
    inv[perm] = solve_upper(r, q.T)
    if np.max(np.abs(a @ inv - np.eye(n))) > 1e-10:
        raise SingularMatrixError("matrix is too ill-conditioned to invert")
    return inv


def orthonormal_kernel_basis(a0) -> Matrix:
    """Orthonormal basis (as rows) of the hyperplane perpendicular to ``a0``.

    A Householder reflection ``H`` sends ``a0 / ||a0||`` to the coordinate
    axis ``e_k`` where ``k`` is the largest component; the rows of ``H`` other
    than ``k`` are the basis. Deterministic in ``a0``.
    """
    a0 = as_vector(a0, "a0")
    norm = np.linalg.norm(a0)
    if norm == 0.0:
        raise ValueError("a0 must be nonzero")
    k = int(np.argmax(np.abs(a0)))
    u = a0 / norm
    if u[k] < 0:
        u = -u
    v = u.copy()
    rest = np.sum(np.delete(u, k) ** 2)
    # u[k] - 1 without cancellation
    v[k] = -rest / (1.0 + u[k])
    vv = np.dot(v, v)
    h = np.eye(a0.size)
    if vv > 0.0:
        h -= (2.0 / vv) * np.outer(v, v)
    return np.delete(h, k, axis=0)
