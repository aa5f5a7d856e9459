"""
Hyperbolicity tests and stable/unstable splittings of a single real matrix.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import linalg

logger = logging.getLogger(__name__)

RealMatrix = npt.NDArray[np.float64]
ComplexMatrix = npt.NDArray[np.complex128]

MAX_DIMENSION = 32
DEFAULT_HYPERBOLICITY_TOL = 1e-8
DEFAULT_CONTOUR_NODES = 256


class DichotomyError(RuntimeError):
    """Base class of every error raised by dichotomy."""


class MatrixShapeError(DichotomyError, ValueError):
    """Raised when an input is not a finite square real matrix of
    dimension at most MAX_DIMENSION."""


class NotInvertibleError(DichotomyError):
    """Raised when the smallest singular value of a matrix does not
    exceed the tolerance."""


class HyperbolicityViolation(DichotomyError):
    """Raised when an eigenvalue lies within the tolerance of the unit circle.

    :param margin: The observed distance of the eigenvalue moduli to 1.
    """

    def __init__(self, margin: float, message: str = "") -> None:
        self.margin = margin
        super().__init__(
            message or f"eigenvalue within {margin:.3e} of the unit circle"
        )


def as_real_matrix(a: Any) -> RealMatrix:
    """Returns a float64 copy of ``a`` after checking it is square, finite
    and of dimension at most MAX_DIMENSION."""
    matrix = np.array(a, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise MatrixShapeError(f"expected a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] > MAX_DIMENSION:
        raise MatrixShapeError(f"dimension {matrix.shape[0]} exceeds {MAX_DIMENSION}")
    if not np.all(np.isfinite(matrix)):
        raise MatrixShapeError("matrix has non-finite entries")
    return matrix


@dataclass(frozen=True)
class HyperbolicSplitting:
    """Stable/unstable splitting of one hyperbolic matrix.

    ``Ps`` projects onto ``span(Vs)`` along ``span(Vu)``; ``Pu = I - Ps``.
    ``Vs`` and ``Vu`` have orthonormal columns with deterministic signs.
    """

    Ps: RealMatrix
    Pu: RealMatrix
    Vs: RealMatrix
    Vu: RealMatrix
    margin: float

    @property
    def N(self) -> int:
        return int(self.Ps.shape[0])

    @property
    def k_s(self) -> int:
        return int(self.Vs.shape[1])

    @property
    def k_u(self) -> int:
        return int(self.Vu.shape[1])


def is_hyperbolic(a: Any, tol: float = DEFAULT_HYPERBOLICITY_TOL) -> float:
    """Returns the hyperbolicity margin min_i ||mu_i| - 1| of ``a``.

    Raises NotInvertibleError if the smallest singular value is not above
    ``tol`` and HyperbolicityViolation if the margin is below ``tol``.
    """
    matrix = as_real_matrix(a)
    sigma_min = float(linalg.svdvals(matrix)[-1])
    if sigma_min <= tol:
        raise NotInvertibleError(
            f"smallest singular value {sigma_min:.3e} <= {tol:.1e}"
        )
    moduli = np.abs(linalg.eigvals(matrix))
    margin = float(np.min(np.abs(moduli - 1.0)))
    if margin < tol:
        raise HyperbolicityViolation(margin)
    return margin


def recommended_nodes(margin: float, target: float = 1e-12) -> int:
    """Returns a trapezoid node count for spectral_projector_contour whose
    quadrature error, which decays like rho**nodes with
    rho = max(1 - margin, 1 / (1 + margin)), stays below ``target``.
    Never less than DEFAULT_CONTOUR_NODES."""
    rho = max(1.0 - margin, 1.0 / (1.0 + margin))
    if rho <= 0.0:
        return DEFAULT_CONTOUR_NODES
    needed = math.ceil(math.log(target) / math.log(rho))
    return max(DEFAULT_CONTOUR_NODES, needed)


def spectral_projector_contour(
    a: Any,
    nodes: int = DEFAULT_CONTOUR_NODES,
    tol: float = DEFAULT_HYPERBOLICITY_TOL,
) -> ComplexMatrix:
    """Trapezoid approximation of the Riesz projection onto the spectrum
    inside the unit circle,

    P ~ (1/nodes) * sum_j z_j (z_j I - a)^{-1},  z_j = exp(2 pi i j / nodes).

    Kept as an independent oracle for hyperbolic_splitting.
    """
    if nodes < 16:
        raise ValueError(f"nodes must be at least 16, got {nodes}")
    matrix = as_real_matrix(a)
    is_hyperbolic(matrix, tol)
    n = matrix.shape[0]
    identity = np.eye(n, dtype=np.complex128)
    projector = np.zeros((n, n), dtype=np.complex128)
    for j in range(nodes):
        z = complex(np.exp(2j * np.pi * j / nodes))
        projector += z * np.linalg.solve(z * identity - matrix, identity)
    return projector / nodes


def canonical_signs(basis: RealMatrix) -> RealMatrix:
    """Flips column signs so that the largest-magnitude entry of every
    column is positive (ties resolved by the lowest row index)."""
    fixed = np.array(basis, dtype=np.float64, copy=True)
    for j in range(fixed.shape[1]):
        column = fixed[:, j]
        pivot = int(np.argmax(np.abs(column)))
        if column[pivot] < 0.0:
            fixed[:, j] = -column
    return fixed


def _ordered_schur_basis(matrix: RealMatrix, inside: bool) -> RealMatrix:
    def select(re: float, im: float) -> bool:
        modulus_sq = re * re + im * im
        return bool(modulus_sq < 1.0) if inside else bool(modulus_sq > 1.0)

    _, Z, sdim = linalg.schur(matrix, output="real", sort=select)
    leading = np.asarray(Z[:, :sdim], dtype=np.float64)
    if sdim == 0:
        return leading
    q, _ = np.linalg.qr(leading)
    return canonical_signs(q)


def hyperbolic_splitting(
    a: Any, tol: float = DEFAULT_HYPERBOLICITY_TOL
) -> HyperbolicSplitting:
    """Splits R^N into the stable and unstable subspaces of ``a``.

    The bases come from two ordered real Schur decompositions, one with the
    eigenvalues inside the unit circle leading and one with those outside
    leading. ``Ps`` is the projection onto ``span(Vs)`` along ``span(Vu)``.
    """
    matrix = as_real_matrix(a)
    margin = is_hyperbolic(matrix, tol)
    n = matrix.shape[0]
    Vs = _ordered_schur_basis(matrix, inside=True)
    Vu = _ordered_schur_basis(matrix, inside=False)
    if Vs.shape[1] + Vu.shape[1] != n:
        raise HyperbolicityViolation(
            margin, f"Schur ordering split {Vs.shape[1]} + {Vu.shape[1]} != {n}"
        )

    if Vs.shape[1] == 0:
        Ps = np.zeros((n, n))
    elif Vu.shape[1] == 0:
        Ps = np.eye(n)
    else:
        coordinates = np.linalg.inv(np.hstack([Vs, Vu]))
        Ps = Vs @ coordinates[: Vs.shape[1], :]
    Pu = np.eye(n) - Ps
    logger.debug(
        "split N=%d into k_s=%d, k_u=%d (margin %.3e)",
        n,
        Vs.shape[1],
        Vu.shape[1],
        margin,
    )
    return HyperbolicSplitting(Ps=Ps, Pu=Pu, Vs=Vs, Vu=Vu, margin=margin)


def restricted_map(a: RealMatrix, basis: RealMatrix) -> RealMatrix:
    """Returns the matrix of ``a`` restricted to the invariant subspace
    spanned by the orthonormal columns of ``basis``."""
    return np.asarray(basis.T @ a @ basis, dtype=np.float64)


def decay_check(split: HyperbolicSplitting, a: Any, n_max: int) -> bool:
    """Checks the dynamical characterisation of the splitting: every stable
    basis vector decays below 1e-6 of its norm under forward iteration of
    ``a`` within ``n_max`` steps, and every unstable one under ``a^{-1}``."""
    if n_max < 1:
        raise ValueError(f"n_max must be positive, got {n_max}")
    matrix = as_real_matrix(a)
    inverse = np.linalg.inv(matrix)

    def decays(step: RealMatrix, v: RealMatrix) -> bool:
        threshold = 1e-6 * float(np.linalg.norm(v))
        w = v
        for _ in range(n_max):
            w = step @ w
            if float(np.linalg.norm(w)) < threshold:
                return True
        return False

    stable = all(decays(matrix, split.Vs[:, j]) for j in range(split.k_s))
    unstable = all(decays(inverse, split.Vu[:, j]) for j in range(split.k_u))
    return stable and unstable
