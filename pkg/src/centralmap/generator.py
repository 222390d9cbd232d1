"""Ground-truth instances for the decomposability test.

Geometric instances are built the long way round: choose a complement ``T``
of the kernel, map ``T`` isometrically onto the target, follow with a
similarity. The resulting matrix is decomposable by construction, whatever
``analyze`` says about it.

All randomness comes from numpy's ``PCG64`` bit generator seeded with the
integer seed argument. Streams are identical across platforms for a given
numpy release, so every generator here is a pure function of its arguments.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg
from .criterion import CoordinateMatrix, DEFAULT_TOLERANCES, validate_preconditions
from .linalg import Matrix, SingularMatrixError, Vector

MAX_RETRIES = 16
RATIO_RANGE = (0.5, 2.0)


class Label(str, enum.Enum):
    CENTRAL_SIMILARITY = "CentralSimilarity"
    ORTHOGONAL_SIMILARITY = "OrthogonalSimilarity"
    PRESCRIBED_SPECTRUM = "PrescribedSpectrum"
    RANDOM_VALID = "RandomValid"


class RetryLimitExceeded(linalg.NumericalError):
    pass


@dataclass(frozen=True)
class Similarity:
    """``x -> ratio * rotation @ x + shift`` on the target space."""

    ratio: float
    rotation: Matrix
    shift: Vector

    def matrix(self) -> Matrix:
        m = self.rotation.shape[0]
        s = np.zeros((m + 1, m + 1))
        s[0, 0] = 1.0
        s[1:, 0] = self.shift
        s[1:, 1:] = self.ratio * self.rotation
        return s


@dataclass(frozen=True)
class Witness:
    # rows (1, z), (0, w_2), ..., (0, w_{n-m})
    kernel_basis: Matrix
    flat_point_q: Vector
    flat_frame_u: Matrix
    similarity: Similarity

    def flat_basis(self) -> Matrix:
        """Rows ``(1, q), (0, u_1), ..., (0, u_m)`` spanning the complement."""
        m, n = self.flat_frame_u.shape
        rows = np.zeros((m + 1, n + 1))
        rows[0, 0] = 1.0
        rows[0, 1:] = self.flat_point_q
        rows[1:, 1:] = self.flat_frame_u
        return rows


@dataclass(frozen=True)
class GeneratedInstance:
    cm: CoordinateMatrix
    label: Label
    seed: int | None = None
    witness: Witness | None = None


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _orthonormal(dim: int, rng: np.random.Generator) -> Matrix:
    if dim == 1:
        return np.ones((1, 1))
    q, r, _ = linalg.householder_qr(rng.standard_normal((dim, dim)))
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs


def random_orthonormal(dim: int, seed: int) -> Matrix:
    """Orthogonal ``dim x dim`` matrix from the QR factorization of a seeded
    Gaussian draw, with the signs fixed so that ``R`` has a positive diagonal.

    ``dim == 1`` always gives ``[[1.0]]``.
    """
    if dim < 1:
        raise ValueError("dim must be at least 1")
    return _orthonormal(dim, _rng(seed))


def compose_central(
    q, u, z, w, similarity: Similarity, tau_rank: float = DEFAULT_TOLERANCES.tau_rank
) -> tuple[CoordinateMatrix, Witness]:
    """Coordinate matrix of (similarity) o (central projection).

    The projection has centre spanned by ``(1, z)`` and the directions ``w``
    (rows), and maps onto the flat through ``q`` with orthonormal frame ``u``
    (rows). Points ``q + sum x_i u_i`` of the flat go to ``x`` before the
    similarity is applied.

    Raises ``SingularMatrixError`` when centre and flat do not span the space.
    """
    q = linalg.as_vector(q, "q")
    u = linalg.as_matrix(u, "u")
    z = linalg.as_vector(z, "z")
    n = q.size
    m = u.shape[0]
    w = np.asarray(w, dtype=np.float64).reshape(-1, n)
    if w.shape[0] != n - m - 1:
        raise ValueError(f"need {n - m - 1} kernel directions, got {w.shape[0]}")

    kernel = np.zeros((n - m, n + 1))
    kernel[0, 0] = 1.0
    kernel[0, 1:] = z
    kernel[1:, 1:] = w
    witness = Witness(kernel_basis=kernel, flat_point_q=q, flat_frame_u=u, similarity=similarity)

    basis = np.vstack([witness.flat_basis(), kernel]).T
    projection = linalg.invert(basis, tau_rank)[: m + 1]
    return CoordinateMatrix(similarity.matrix() @ projection), witness


def _similarity(m: int, rng: np.random.Generator) -> Similarity:
    lo, hi = np.log(RATIO_RANGE[0]), np.log(RATIO_RANGE[1])
    ratio = float(np.exp(rng.uniform(lo, hi)))
    rotation = _orthonormal(m, rng)
    shift = rng.uniform(-1.0, 1.0, size=m)
    return Similarity(ratio=ratio, rotation=rotation, shift=shift)


def _check_dims(n: int, m: int) -> None:
    if not 2 <= m < n:
        raise ValueError(f"need 2 <= m < n, got n={n}, m={m}")


def _gen_geometric(n: int, m: int, seed: int, orthogonal: bool) -> GeneratedInstance:
    _check_dims(n, m)
    rng = _rng(seed)
    for _ in range(MAX_RETRIES):
        frame = _orthonormal(n, rng)
        u = frame[:, :m].T
        q = rng.uniform(-1.0, 1.0, size=n)
        z = q + rng.standard_normal(n)
        k = n - m - 1
        if orthogonal:
            # directions inside the orthogonal complement of the flat
            mix = _orthonormal(n - m, rng)[:, :k]
            w = (frame[:, m:] @ mix).T
        else:
            w = rng.standard_normal((k, n))
            w /= np.linalg.norm(w, axis=1, keepdims=True)
        sim = _similarity(m, rng)
        try:
            cm, witness = compose_central(q, u, z, w, sim)
        except SingularMatrixError:
            continue
        label = Label.ORTHOGONAL_SIMILARITY if orthogonal else Label.CENTRAL_SIMILARITY
        return GeneratedInstance(cm=cm, label=label, seed=seed, witness=witness)
    raise RetryLimitExceeded(f"no nonsingular basis in {MAX_RETRIES} draws")


def gen_geometric_central(n: int, m: int, seed: int) -> GeneratedInstance:
    return _gen_geometric(n, m, seed, orthogonal=False)


def gen_geometric_orthogonal(n: int, m: int, seed: int) -> GeneratedInstance:
    return _gen_geometric(n, m, seed, orthogonal=True)


def gen_prescribed_spectrum(n: int, m: int, sigma, seed: int) -> GeneratedInstance:
    """Random instance whose reduced matrix has singular values ``sigma``.

    The reduced matrix is assembled directly as ``U diag(sigma) E^T`` with
    ``E`` an orthonormal frame perpendicular to a random top row ``a0``; the
    rows of ``A`` then add random multiples of ``a0`` back in.
    """
    _check_dims(n, m)
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (m,):
        raise ValueError(f"need {m} singular values, got {sigma.size}")
    if not np.all(sigma > 0) or not np.all(np.isfinite(sigma)):
        raise ValueError("singular values must be positive and finite")
    rng = _rng(seed)
    a0 = rng.standard_normal(n)
    complement = linalg.orthonormal_kernel_basis(a0)
    e = (_orthonormal(n - 1, rng)[:, :m].T @ complement).T
    u = _orthonormal(m, rng)
    a_tilde = u @ np.diag(np.sort(sigma)[::-1]) @ e.T
    gamma = rng.standard_normal(m)

    a = np.empty((m + 1, n + 1))
    a[:, 0] = rng.standard_normal(m + 1)
    a[0, 1:] = a0
    a[1:, 1:] = a_tilde + np.outer(gamma, a0)
    return GeneratedInstance(cm=CoordinateMatrix(a), label=Label.PRESCRIBED_SPECTRUM, seed=seed)


def gen_random_valid(n: int, m: int, seed: int) -> GeneratedInstance:
    _check_dims(n, m)
    rng = _rng(seed)
    for _ in range(MAX_RETRIES):
        cm = CoordinateMatrix(rng.standard_normal((m + 1, n + 1)))
        pre = validate_preconditions(cm)
        if pre.central and pre.surjective:
            return GeneratedInstance(cm=cm, label=Label.RANDOM_VALID, seed=seed)
    raise RetryLimitExceeded(f"no valid matrix in {MAX_RETRIES} draws")


def perturb(cm: CoordinateMatrix, epsilon: float, seed: int) -> CoordinateMatrix:
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if epsilon == 0:
        return cm
    noise = _rng(seed).standard_normal(cm.a.shape)
    return CoordinateMatrix(cm.a + epsilon * np.max(np.abs(cm.a)) * noise)
