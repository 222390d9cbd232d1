"""Decomposability test for central linear mappings.

A mapping of projective ``n``-space onto projective ``m``-space is given by
its ``(m+1) x (n+1)`` coordinate matrix ``A`` in homogeneous Cartesian
coordinates: column 0 and row 0 belong to the origin vectors, the remaining
basis vectors are orthonormal in the hyperplanes at infinity. Write
``a_i = A[i, 1:]``. The top row is the equation of the hyperplane sent to
infinity; the mapping is central when ``a_0 != 0``.

From ``A`` we form the reduced ``m x n`` matrix with rows

    a_i - (a_0 . a_i) / (a_0 . a_0) * a_0,      i = 1..m

and then

* the mapping is a central projection followed by a similarity exactly when
  the least singular value of the reduced matrix has multiplicity at least
  ``2m - n + 1``;
* it is an orthogonal central projection followed by a similarity exactly
  when the reduced matrix times its transpose is ``v * I`` for some ``v > 0``.

Both statements assume the mapping is central and maps the hyperplane at
infinity onto the target's hyperplane at infinity. Numerically this becomes
``rank [a_0; a_1; ...; a_m] = m + 1``. Note the rows ``a_1..a_m`` alone being
independent is weaker: it also holds when ``a_0`` lies in their span, in which
case the image of the hyperplane at infinity is a proper subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import Matrix, Vector


class NotCentral(ValueError):
    """The top row's infinite part vanishes, so there is no reduced matrix."""


@dataclass(frozen=True)
class ToleranceConfig:
    tau_rel: float = 1e-9
    tau_abs: float = 1e-12
    tau_rank: float = 1e-10

    def __post_init__(self):
        for name in ("tau_rel", "tau_abs", "tau_rank"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")


DEFAULT_TOLERANCES = ToleranceConfig()


def _readonly(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    x.setflags(write=False)
    return x


@dataclass(frozen=True)
class CoordinateMatrix:
    """Homogeneous Cartesian coordinate matrix, shape ``(m+1, n+1)``."""

    a: Matrix

    def __post_init__(self):
        a = linalg.as_matrix(self.a, "coordinate matrix")
        rows, cols = a.shape
        if rows < 3 or cols < 4 or rows >= cols:
            raise ValueError(
                f"coordinate matrix must have shape (m+1, n+1) with 2 <= m < n, "
                f"got {a.shape}"
            )
        object.__setattr__(self, "a", _readonly(a))

    @property
    def m(self) -> int:
        return self.a.shape[0] - 1

    @property
    def n(self) -> int:
        return self.a.shape[1] - 1

    @property
    def threshold(self) -> int:
        return 2 * self.m - self.n + 1

    def __eq__(self, other):
        if not isinstance(other, CoordinateMatrix):
            return NotImplemented
        return self.a.shape == other.a.shape and bool(np.all(self.a == other.a))

    __hash__ = None


@dataclass(frozen=True)
class ReducedMatrix:
    a0: Vector
    a_tilde: Matrix
    a0_norm_sq: float

    def __post_init__(self):
        if not self.a0_norm_sq > 0:
            raise NotCentral("a0 . a0 must be positive")
        object.__setattr__(self, "a0", _readonly(self.a0))
        object.__setattr__(self, "a_tilde", _readonly(self.a_tilde))


@dataclass(frozen=True)
class Preconditions:
    central: bool
    surjective: bool


@dataclass(frozen=True)
class SpectrumReport:
    sigma: Vector
    least_multiplicity: int
    threshold: int

    def __post_init__(self):
        object.__setattr__(self, "sigma", _readonly(self.sigma))

    @property
    def all_equal(self) -> bool:
        return self.least_multiplicity == len(self.sigma)


@dataclass(frozen=True)
class AnalysisReport:
    """Everything ``analyze`` learns about one coordinate matrix.

    Verdicts are ``None`` whenever the hypothesis of the test fails (mapping
    not central, or hyperplane at infinity not mapped onto the target's).
    ``spectrum``, ``reduced`` and ``principal_point`` are ``None`` only when
    the mapping is not central.
    """

    n: int
    m: int
    preconditions: Preconditions
    vanishing_hyperplane: Vector
    tolerances: ToleranceConfig
    reduced: ReducedMatrix | None = None
    spectrum: SpectrumReport | None = None
    central_similarity: bool | None = None
    orthogonal_similarity: bool | None = None
    v_hat: float | None = None
    principal_point: Vector | None = None

    def __post_init__(self):
        if self.orthogonal_similarity and not self.central_similarity:
            raise AssertionError("orthogonal similarity verdict without central similarity")
        if (self.v_hat is not None) != bool(self.orthogonal_similarity):
            raise AssertionError("v_hat must be present exactly when orthogonal_similarity holds")

    @property
    def threshold(self) -> int:
        return 2 * self.m - self.n + 1


def validate_preconditions(
    cm: CoordinateMatrix, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> Preconditions:
    a = cm.a
    a0 = a[0, 1:]
    scale = np.max(np.abs(a))
    central = bool(np.linalg.norm(a0) > tol.tau_rank * scale * np.sqrt(cm.n))
    # rank m+1 of the infinite parts means f(I) = W, which already forces a0 != 0;
    # requiring `central` as well keeps the two flags consistent at the tolerance edge
    full_rank = linalg.numerical_rank(a[:, 1:], tol.tau_rank) == cm.m + 1
    return Preconditions(central=central, surjective=central and full_rank)


def reduce(cm: CoordinateMatrix) -> ReducedMatrix:
    a0 = cm.a[0, 1:]
    rows = cm.a[1:, 1:]
    nsq = float(a0 @ a0)
    if nsq == 0.0:
        raise NotCentral("top row has vanishing infinite part; the mapping is not central")
    coeffs = (rows @ a0) / nsq
    a_tilde = rows - np.outer(coeffs, a0)
    return ReducedMatrix(a0=a0, a_tilde=a_tilde, a0_norm_sq=nsq)


def least_multiplicity(sigma, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> int:
    """Size of the cluster at the bottom of a descending spectrum.

    ``sigma[i]`` belongs to the least value's cluster when it exceeds
    ``sigma[-1]`` by at most ``tau_rel * sigma[0] + tau_abs``.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.size == 0:
        raise ValueError("empty spectrum")
    width = tol.tau_rel * sigma[0] + tol.tau_abs
    return int(np.sum(sigma - sigma[-1] <= width))


def spectrum(rm: ReducedMatrix, n: int, m: int, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> SpectrumReport:
    sigma = linalg.singular_values(rm.a_tilde)
    return SpectrumReport(
        sigma=sigma,
        least_multiplicity=least_multiplicity(sigma, tol),
        threshold=2 * m - n + 1,
    )


def check_central_similarity(
    rm: ReducedMatrix, n: int, m: int, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> tuple[bool, SpectrumReport]:
    spec = spectrum(rm, n, m, tol)
    return spec.least_multiplicity >= spec.threshold, spec


def check_orthogonal_similarity(
    rm: ReducedMatrix, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> tuple[bool, float]:
    """Test ``A~ A~^T == v_hat * I`` with ``v_hat = trace / m``.

    Returns the verdict and ``v_hat`` (reported whatever the verdict).
    """
    g = linalg.gram(rm.a_tilde)
    m = g.shape[0]
    v_hat = float(np.trace(g) / m)
    ok = v_hat > tol.tau_abs and np.max(np.abs(g - v_hat * np.eye(m))) <= tol.tau_rel * v_hat
    return bool(ok), v_hat


def principal_point(cm: CoordinateMatrix) -> Vector:
    """Homogeneous coordinates ``(a0.a0, a0.a1, ..., a0.am)`` of the image of
    the direction perpendicular to the vanishing hyperplane."""
    a0 = cm.a[0, 1:]
    if not np.any(a0):
        raise NotCentral("principal point is undefined for a non-central mapping")
    return cm.a[:, 1:] @ a0


def vanishing_hyperplane(cm: CoordinateMatrix) -> Vector:
    return cm.a[0].copy()


def restricted_matrix(cm: CoordinateMatrix) -> Matrix:
    """Matrix of the mapping restricted to the infinite part of the vanishing
    hyperplane, in the orthonormal basis ``orthonormal_kernel_basis(a0)``.

    Shape ``m x (n-1)``. Its singular values agree with those of the reduced
    matrix; this is computed without any projection step, so it serves as an
    independent check on ``reduce``.
    """
    a0 = cm.a[0, 1:]
    if not np.any(a0):
        raise NotCentral("restricted mapping is undefined for a non-central mapping")
    basis = linalg.orthonormal_kernel_basis(a0)
    return cm.a[1:, 1:] @ basis.T


def analyze(cm: CoordinateMatrix, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> AnalysisReport:
    pre = validate_preconditions(cm, tol)
    base = dict(
        n=cm.n,
        m=cm.m,
        preconditions=pre,
        vanishing_hyperplane=_readonly(vanishing_hyperplane(cm)),
        tolerances=tol,
    )
    if not pre.central:
        return AnalysisReport(**base)
    rm = reduce(cm)
    central_ok, spec = check_central_similarity(rm, cm.n, cm.m, tol)
    pp = _readonly(principal_point(cm))
    if not pre.surjective:
        return AnalysisReport(**base, reduced=rm, spectrum=spec, principal_point=pp)
    ortho_ok, v_hat = check_orthogonal_similarity(rm, tol)
    return AnalysisReport(
        **base,
        reduced=rm,
        spectrum=spec,
        central_similarity=central_ok,
        orthogonal_similarity=ortho_ok,
        v_hat=v_hat if ortho_ok else None,
        principal_point=pp,
    )
