"""
Finite-section analysis of the linear difference operators

    (L_lambda x)_n = x_{n+1} - a_n(lambda) x_n.

Windows hold the unknowns x_{-M}, ..., x_M as a ``(2M + 1, N)`` array.
The truncated operator closes the window with dichotomy boundary rows:
the unstable coordinates of x_M at +inf and the stable coordinates of
x_{-M} at -inf are forced to vanish.
"""
import logging
from dataclasses import dataclass
from dataclasses import replace
from typing import Any
from typing import Callable
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg

from dichotomy.mesh import ParameterMesh
from dichotomy.mesh import ParameterPoint
from dichotomy.parallel import parallel_map
from dichotomy.spectral import as_real_matrix
from dichotomy.spectral import DEFAULT_HYPERBOLICITY_TOL
from dichotomy.spectral import DichotomyError
from dichotomy.spectral import hyperbolic_splitting
from dichotomy.spectral import HyperbolicSplitting
from dichotomy.spectral import RealMatrix
from dichotomy.spectral import restricted_map

logger = logging.getLogger(__name__)

Window = npt.NDArray[np.float64]
MatrixEvaluator = Callable[[int, ParameterPoint], RealMatrix]
LimitEvaluator = Callable[[ParameterPoint], RealMatrix]

DEFAULT_WINDOW = 50
DEFAULT_RANK_TOL = 1e-8


class WindowTooSmallError(DichotomyError, ValueError):
    """Raised when the truncation window does not reach the decay probe."""


@dataclass(frozen=True)
class LinearFamily:
    """Asymptotically hyperbolic family a_n(lambda) with limits a_+, a_-.

    :param decay_probe: Index n_0 beyond which |a_n - a_+-| is measured;
        truncation windows must reach it.
    """

    N: int
    k: int
    a_n: MatrixEvaluator
    a_plus: LimitEvaluator
    a_minus: LimitEvaluator
    decay_probe: int

    def piecewise(self) -> "LinearFamily":
        """The compact perturbation with a_n = a_+ for n >= 0 and a_-
        for n < 0."""
        a_plus, a_minus = self.a_plus, self.a_minus

        def limits_only(n: int, lam: ParameterPoint) -> RealMatrix:
            return a_plus(lam) if n >= 0 else a_minus(lam)

        return replace(self, a_n=limits_only)

    def splittings(
        self, lam: ParameterPoint, tol: float = DEFAULT_HYPERBOLICITY_TOL
    ) -> Tuple[HyperbolicSplitting, HyperbolicSplitting]:
        """Splittings of a(lambda, +inf) and a(lambda, -inf)."""
        return (
            hyperbolic_splitting(self.a_plus(lam), tol),
            hyperbolic_splitting(self.a_minus(lam), tol),
        )


@dataclass(frozen=True)
class DecayProfile:
    """Result of the asymptotic hyperbolicity check at one parameter."""

    deviation: float
    margin_plus: float
    margin_minus: float
    k_s_plus: int
    k_s_minus: int
    passed: bool


@dataclass(frozen=True)
class TruncatedOperator:
    """Finite section of L_lambda on the window [-M, M].

    Rows: 2M dynamic block rows, then ``bc_plus_rank`` rows Vu(+inf)^T x_M,
    then ``bc_minus_rank`` rows Vs(-inf)^T x_{-M}.
    """

    window: int
    matrix: RealMatrix
    bc_plus_rank: int
    bc_minus_rank: int
    lam: ParameterPoint

    @property
    def rows(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def cols(self) -> int:
        return int(self.matrix.shape[1])


@dataclass(frozen=True)
class KernelDiagnostics:
    """Numerical kernel of a truncated operator.

    ``gap_ratio`` is sigma_{r+1} / sigma_r at the rank cut, infinite when the
    kernel is empty.
    """

    kernel_dim: int
    sigma_min: float
    sigma_max: float
    gap_ratio: float
    kernel_basis: RealMatrix
    singular_values: npt.NDArray[np.float64]


def _deviation(a: Any, limit: RealMatrix) -> float:
    """Spectral-norm distance to ``limit``; inf when ``a`` is not finite."""
    matrix = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(matrix)):
        return float("inf")
    return float(np.linalg.norm(matrix - limit, 2))


def check_A3(
    fam: LinearFamily,
    lam: ParameterPoint,
    horizon: int,
    tol: float = DEFAULT_HYPERBOLICITY_TOL,
) -> DecayProfile:
    """Measures max |a_n(lambda) - a(lambda, +-inf)| over n_0 <= |n| <= horizon
    together with the hyperbolicity margins of both limits. A non-finite
    a_n counts as an infinite deviation.

    Raises HyperbolicityViolation when a limit is not hyperbolic.
    """
    if horizon < fam.decay_probe:
        raise WindowTooSmallError(f"horizon {horizon} < decay probe {fam.decay_probe}")
    plus, minus = fam.splittings(lam, tol)
    a_plus = as_real_matrix(fam.a_plus(lam))
    a_minus = as_real_matrix(fam.a_minus(lam))
    deviations = [
        _deviation(fam.a_n(sign * n, lam), limit)
        for n in range(fam.decay_probe, horizon + 1)
        for sign, limit in ((1, a_plus), (-1, a_minus))
    ]
    deviation = max(deviations)
    passed = deviation <= tol and plus.margin >= tol and minus.margin >= tol
    return DecayProfile(
        deviation=deviation,
        margin_plus=plus.margin,
        margin_minus=minus.margin,
        k_s_plus=plus.k_s,
        k_s_minus=minus.k_s,
        passed=passed,
    )


def fredholm_index(
    fam: LinearFamily, lam: ParameterPoint, tol: float = DEFAULT_HYPERBOLICITY_TOL
) -> int:
    """Fredholm index of L_lambda on c_0: dim E^s(+inf) - dim E^s(-inf)."""
    plus, minus = fam.splittings(lam, tol)
    return plus.k_s - minus.k_s


def assemble_blocks(
    diagonal: Sequence[RealMatrix],
    plus: HyperbolicSplitting,
    minus: HyperbolicSplitting,
    window: int,
    lam: ParameterPoint,
) -> TruncatedOperator:
    """Assembles the block bidiagonal finite section with rows
    x_{n+1} - diagonal[n + M] x_n for n = -M..M-1 and the dichotomy
    boundary rows. Shared by the linear operator and the nonlinear Jacobian."""
    N = plus.N
    M = window
    size = 2 * M + 1
    bc_plus = plus.k_u
    bc_minus = minus.k_s
    matrix = np.zeros((2 * M * N + bc_plus + bc_minus, size * N))
    identity = np.eye(N)
    for i, block in enumerate(diagonal):
        rows = slice(i * N, (i + 1) * N)
        matrix[rows, i * N : (i + 1) * N] = -block
        matrix[rows, (i + 1) * N : (i + 2) * N] = identity
    offset = 2 * M * N
    matrix[offset : offset + bc_plus, (size - 1) * N :] = plus.Vu.T
    matrix[offset + bc_plus :, :N] = minus.Vs.T
    return TruncatedOperator(
        window=M, matrix=matrix, bc_plus_rank=bc_plus, bc_minus_rank=bc_minus, lam=lam
    )


def assemble_truncated(
    fam: LinearFamily,
    lam: ParameterPoint,
    M: int = DEFAULT_WINDOW,
    tol: float = DEFAULT_HYPERBOLICITY_TOL,
) -> TruncatedOperator:
    """Finite section of L_lambda on [-M, M]; cols - rows equals the
    Fredholm index."""
    if M < fam.decay_probe:
        raise WindowTooSmallError(f"window {M} < decay probe {fam.decay_probe}")
    plus, minus = fam.splittings(lam, tol)
    blocks = [as_real_matrix(fam.a_n(n, lam)) for n in range(-M, M)]
    return assemble_blocks(blocks, plus, minus, M, lam)


def kernel_diagnostics(
    op: TruncatedOperator, rank_tol: float = DEFAULT_RANK_TOL
) -> KernelDiagnostics:
    """Kernel of a truncated operator from a full SVD: singular values below
    ``rank_tol * sigma_max`` count as zero, as do the extra columns of a
    wide matrix."""
    if not 0.0 < rank_tol <= 1e-2:
        raise ValueError(f"rank_tol must lie in (0, 1e-2], got {rank_tol}")
    _, singular_values, vh = linalg.svd(op.matrix, full_matrices=True)
    sigma_max = float(singular_values[0]) if singular_values.size else 0.0
    threshold = rank_tol * sigma_max
    rank = int(np.count_nonzero(singular_values >= threshold)) if sigma_max > 0.0 else 0
    kernel_dim = op.cols - rank
    wide = op.cols > op.rows
    sigma_min = 0.0 if wide or not singular_values.size else float(singular_values[-1])

    small = singular_values.size - rank
    if small == 0:
        gap_ratio = float("inf")
    elif rank == 0:
        gap_ratio = 1.0
    else:
        gap_ratio = float(singular_values[rank] / singular_values[rank - 1])
    if small and gap_ratio > 1e-3:
        logger.warning(
            "borderline rank decision: gap ratio %.3e at %s", gap_ratio, op.lam.theta
        )

    kernel_basis = np.asarray(vh[rank:, :].T, dtype=np.float64)
    return KernelDiagnostics(
        kernel_dim=kernel_dim,
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        gap_ratio=gap_ratio,
        kernel_basis=kernel_basis,
        singular_values=np.asarray(singular_values, dtype=np.float64),
    )


def _is_regular(diag: KernelDiagnostics, rank_tol: float) -> bool:
    return diag.kernel_dim == 0 and diag.sigma_min >= 10.0 * rank_tol * diag.sigma_max


def check_A5(
    fam: LinearFamily,
    mesh: ParameterMesh,
    M: int = DEFAULT_WINDOW,
    rank_tol: float = DEFAULT_RANK_TOL,
    tol: float = DEFAULT_HYPERBOLICITY_TOL,
) -> Optional[ParameterPoint]:
    """Returns the first mesh vertex whose linearisation has only the
    trivial solution with a clear singular-value margin, or None."""

    def regular(point: ParameterPoint) -> bool:
        diag = kernel_diagnostics(assemble_truncated(fam, point, M, tol), rank_tol)
        return _is_regular(diag, rank_tol)

    for point, ok in zip(mesh.vertices, parallel_map(regular, list(mesh.vertices))):
        if ok:
            return point
    return None


def apply_operator(fam: LinearFamily, lam: ParameterPoint, x: Window) -> Window:
    """Returns (L_lambda x)_n for n = -M..M-1 as a ``(2M, N)`` array."""
    M = (x.shape[0] - 1) // 2
    out = np.empty((2 * M, x.shape[1]))
    for i, n in enumerate(range(-M, M)):
        out[i] = x[i + 1] - fam.a_n(n, lam) @ x[i]
    return out


def half_line_apply(a: RealMatrix, x: Window) -> Window:
    """(L x)_n = x_{n+1} - a x_n for n = 0..K-1 on a half-line window."""
    return np.asarray(x[1:] - x[:-1] @ np.asarray(a).T, dtype=np.float64)


def right_inverse_apply(
    a: RealMatrix, x: Window, tol: float = DEFAULT_HYPERBOLICITY_TOL
) -> Window:
    """Applies the explicit right inverse of the half-line operator
    x_{n+1} - a x_n to ``x`` given on [0, K]:

        (Mx)_0 = - sum_{k>=0} a^{-1-k} P^u x_k
        (Mx)_n = sum_{k<n} a^{n-1-k} P^s x_k - sum_{k>=n} a^{n-1-k} P^u x_k

    The powers act only through the restricted maps a|E^s and (a|E^u)^{-1},
    so no power of ``a`` is ever formed.
    """
    matrix = as_real_matrix(a)
    split = hyperbolic_splitting(matrix, tol)
    K = x.shape[0] - 1
    basis = np.hstack([split.Vs, split.Vu])
    coordinates = np.linalg.solve(basis, np.asarray(x, dtype=np.float64).T).T
    c_s = coordinates[:, : split.k_s]
    c_u = coordinates[:, split.k_s :]
    T_s = restricted_map(matrix, split.Vs)
    T_u = restricted_map(matrix, split.Vu)

    stable = np.zeros((K + 1, split.k_s))
    for n in range(K):
        stable[n + 1] = T_s @ stable[n] + c_s[n]

    unstable = np.zeros((K + 2, split.k_u))
    if split.k_u:
        for n in range(K, -1, -1):
            unstable[n] = np.linalg.solve(T_u, c_u[n] + unstable[n + 1])

    solution = stable @ split.Vs.T - unstable[: K + 1] @ split.Vu.T
    return np.asarray(solution, dtype=np.float64)


def left_half_line_right_inverse(
    a: RealMatrix, x: Window, tol: float = DEFAULT_HYPERBOLICITY_TOL
) -> Window:
    """Right inverse on the negative half line, x given on [-K, 0] in
    increasing order, for (Lx)_n = x_{n-1} - a^{-1} x_n (n <= 0).

    Reduced to right_inverse_apply for a^{-1} by reversing time.
    """
    inverse = np.linalg.inv(as_real_matrix(a))
    reversed_solution = right_inverse_apply(inverse, np.asarray(x)[::-1], tol)
    return np.asarray(reversed_solution[::-1], dtype=np.float64)


def splice_check(fam: LinearFamily, lam: ParameterPoint, x: Window) -> float:
    """Max discrepancy between L_lambda x and I(L+ (+) L-)J x on the window.

    J restricts x to [0, M] and [-M, 0] (x_0 shared), L+ and L- are the
    half-line operators of a(lambda, +inf) and a(lambda, -inf) and I stacks
    their rows in window order. For a family with a_n equal to its limits the
    result vanishes up to rounding; otherwise it is the compact remainder
    max |(a_n - a(lambda, +-inf)) x_n|.
    """
    M = (x.shape[0] - 1) // 2
    if M < 1:
        return 0.0
    window = np.asarray(x, dtype=np.float64)
    spliced = np.vstack(
        [
            half_line_apply(as_real_matrix(fam.a_minus(lam)), window[: M + 1]),
            half_line_apply(as_real_matrix(fam.a_plus(lam)), window[M:]),
        ]
    )
    return float(np.max(np.abs(apply_operator(fam, lam, window) - spliced)))


def adjoint_apply(fam: LinearFamily, lam: ParameterPoint, y: Window) -> Window:
    """Dual operator (L'y)_n = y_n - a_{n+1}(lambda)^T y_{n+1}.

    ``y`` is given on n = -M..M-1 (the range of L on the window) and is
    taken to vanish outside. The result is returned for n = -M-1..M-1 as a
    ``(2M + 1, N)`` array; row j is paired with x_{j-M} so that
    <L x, y> = <x, L'y> holds exactly on the window.
    """
    M = y.shape[0] // 2
    padded = np.zeros((2 * M + 2, y.shape[1]))
    padded[1 : 2 * M + 1] = y
    out = np.empty((2 * M + 1, y.shape[1]))
    for j, n in enumerate(range(-M - 1, M)):
        out[j] = padded[j] - fam.a_n(n + 1, lam).T @ padded[j + 1]
    return out


def adjoint_recurrence(
    fam: LinearFamily, lam: ParameterPoint, y0: npt.ArrayLike, M: int
) -> Window:
    """Solves y_n = a_{n+1}(lambda)^T y_{n+1} on n = -M..M-1 from y_0 = y0,
    forward through (a_{n+1}^T)^{-1} and backward through a_{n+1}^T."""
    y = np.zeros((2 * M, fam.N))
    y[M] = np.asarray(y0, dtype=np.float64)
    for n in range(0, M - 1):
        y[M + n + 1] = np.linalg.solve(fam.a_n(n + 1, lam).T, y[M + n])
    for n in range(-1, -M - 1, -1):
        y[M + n] = fam.a_n(n + 1, lam).T @ y[M + n + 1]
    return y


def pairing(x: Window, y: Window) -> float:
    """Euclidean pairing sum_n <x_n, y_n> of two equally shaped windows."""
    return float(np.sum(np.asarray(x) * np.asarray(y)))
