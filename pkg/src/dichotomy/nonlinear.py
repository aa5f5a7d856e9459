"""
Homoclinic solutions of x_{n+1} = f_n(lambda, x_n) on truncated windows.

The map (F_lambda x)_n = x_{n+1} - f_n(lambda, x_n) is closed with the same
dichotomy boundary rows as the linear finite section, so that its Jacobian at
x = 0 is exactly the truncated linearisation.
"""
import logging
import math
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import Callable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg

from dichotomy.bundles import BifurcationCertificate
from dichotomy.bundles import certify
from dichotomy.bundles import End
from dichotomy.bundles import Kind
from dichotomy.bundles import sample_subbundle
from dichotomy.config import Tolerances
from dichotomy.linear import adjoint_apply
from dichotomy.linear import assemble_blocks
from dichotomy.linear import check_A3
from dichotomy.linear import check_A5
from dichotomy.linear import fredholm_index
from dichotomy.linear import kernel_diagnostics
from dichotomy.linear import KernelDiagnostics
from dichotomy.linear import LinearFamily
from dichotomy.linear import pairing
from dichotomy.linear import TruncatedOperator
from dichotomy.linear import Window
from dichotomy.linear import WindowTooSmallError
from dichotomy.mesh import ParameterMesh
from dichotomy.mesh import ParameterPoint
from dichotomy.parallel import parallel_map
from dichotomy.spectral import canonical_signs
from dichotomy.spectral import DichotomyError
from dichotomy.spectral import HyperbolicityViolation
from dichotomy.spectral import HyperbolicSplitting
from dichotomy.spectral import NotInvertibleError
from dichotomy.spectral import RealMatrix

logger = logging.getLogger(__name__)

Vector = npt.NDArray[np.float64]
StateMap = Callable[[int, ParameterPoint, Vector], Vector]
StateDerivative = Callable[[int, ParameterPoint, Vector], RealMatrix]

LINEARIZATION_TOL = 1e-10
BOUNDARY_DECAY = 1e-4


class SolverError(DichotomyError):
    """Base class for nonlinear solver failures."""


class EvaluatorFailure(SolverError):
    """Raised when f_n or Df_n fails or returns non-finite values."""


class NoConvergence(SolverError):
    """Raised when Newton's method exhausts its iteration budget."""


class SingularJacobian(SolverError):
    """Raised when the Jacobian is numerically singular mid-iteration."""


class EmptyKernel(SolverError):
    """Raised when a branch seed is requested from a trivial kernel."""


class Conclusion(str, Enum):
    CERTIFIED_BIFURCATION = "certified_bifurcation"
    NO_CERTIFICATE = "no_certificate"
    ASSUMPTIONS_VIOLATED = "assumptions_violated"
    NUMERICAL_FAILURE = "numerical_failure"


class Label(str, Enum):
    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"
    BORDERLINE = "borderline"


@dataclass(frozen=True)
class NonlinearFamily:
    """Family x_{n+1} = f_n(lambda, x_n) with f_n(lambda, 0) = 0 and
    Df_n(lambda, 0) = linearization.a_n(n, lambda)."""

    N: int
    k: int
    f_n: StateMap
    Df_n: StateDerivative
    linearization: LinearFamily
    name: str = "custom"

    @classmethod
    def from_linear(cls, fam: LinearFamily, name: str = "linear") -> "NonlinearFamily":
        """The family with f_n(lambda, x) = a_n(lambda) x."""

        def f_n(n: int, lam: ParameterPoint, x: Vector) -> Vector:
            return np.asarray(fam.a_n(n, lam) @ x, dtype=np.float64)

        def Df_n(n: int, lam: ParameterPoint, x: Vector) -> RealMatrix:
            return fam.a_n(n, lam)

        return cls(N=fam.N, k=fam.k, f_n=f_n, Df_n=Df_n, linearization=fam, name=name)


@dataclass(frozen=True)
class NewtonOptions:
    max_iter: int = 50
    tol: float = 1e-10
    damping: bool = True
    max_halvings: int = 8


@dataclass(frozen=True)
class WindowSolution:
    """A Newton result on the window [-M, M].

    ``x`` has shape ``(2M + 1, N)``; ``amplitude`` is max_n |x_n|.
    """

    lam: ParameterPoint
    window: int
    x: Window
    residual_norm: float
    amplitude: float
    iterations: int
    label: Label


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    detail: str
    failed_vertices: Tuple[int, ...] = ()


@dataclass(frozen=True)
class SweepRecord:
    vertex_index: int
    theta: Tuple[float, ...]
    sigma_min: float
    kernel_dim: int


@dataclass(frozen=True)
class SweepResult:
    """Per-vertex diagnostics of the linearisation, the sigma_min dips and
    the Newton results started from them."""

    records: Tuple[SweepRecord, ...]
    candidates: Tuple[int, ...]
    solutions: Tuple[WindowSolution, ...]


@dataclass(frozen=True)
class BifurcationReport:
    """Outcome of certify_bifurcation.

    ``conclusion`` is CERTIFIED_BIFURCATION only if every assumption check
    passed and the certificate has a w_1 mismatch.
    """

    model: str
    k: int
    window: int
    assumption_status: Tuple[AssumptionCheck, ...]
    certificate: Optional[BifurcationCertificate]
    sweep: Tuple[SweepRecord, ...]
    candidates: Tuple[int, ...]
    solutions: Tuple[WindowSolution, ...]
    conclusion: Conclusion
    notes: Tuple[str, ...] = field(default_factory=tuple)
    error: Optional[str] = None

    @property
    def dimension_bound(self) -> Optional[int]:
        certified = self.conclusion is Conclusion.CERTIFIED_BIFURCATION
        if self.certificate is None or not certified:
            return None
        return self.certificate.dimension_bound

    @property
    def assumptions_passed(self) -> bool:
        checks = self.assumption_status
        return bool(checks) and all(c.passed for c in checks)


def _evaluate_state(
    fam: NonlinearFamily, n: int, lam: ParameterPoint, x: Vector
) -> Vector:
    try:
        value = np.asarray(fam.f_n(n, lam, x), dtype=np.float64)
    except (ArithmeticError, ValueError, TypeError) as error:
        raise EvaluatorFailure(f"f_{n} failed at {lam.theta}: {error}") from error
    if value.shape != (fam.N,) or not np.all(np.isfinite(value)):
        raise EvaluatorFailure(f"f_{n} returned {value!r} at {lam.theta}")
    return value


def _evaluate_derivative(
    fam: NonlinearFamily, n: int, lam: ParameterPoint, x: Vector
) -> RealMatrix:
    try:
        value = np.asarray(fam.Df_n(n, lam, x), dtype=np.float64)
    except (ArithmeticError, ValueError, TypeError) as error:
        raise EvaluatorFailure(f"Df_{n} failed at {lam.theta}: {error}") from error
    if value.shape != (fam.N, fam.N) or not np.all(np.isfinite(value)):
        raise EvaluatorFailure(f"Df_{n} returned a bad matrix at {lam.theta}")
    return value


def _window_size(fam: NonlinearFamily, x: Window) -> int:
    if x.ndim != 2 or x.shape[1] != fam.N or x.shape[0] % 2 != 1:
        raise ValueError(f"expected a (2M + 1, {fam.N}) window, got shape {x.shape}")
    M = (x.shape[0] - 1) // 2
    probe = fam.linearization.decay_probe
    if M < probe:
        raise WindowTooSmallError(f"window {M} < decay probe {probe}")
    return M


def _boundary_rows(
    x: Window, plus: HyperbolicSplitting, minus: HyperbolicSplitting
) -> Vector:
    return np.concatenate([plus.Vu.T @ x[-1], minus.Vs.T @ x[0]])


def dynamic_residual(fam: NonlinearFamily, lam: ParameterPoint, x: Window) -> Window:
    """Returns x_{n+1} - f_n(lambda, x_n) for n = -M..M-1 as a ``(2M, N)``
    array."""
    M = (x.shape[0] - 1) // 2
    out = np.empty((2 * M, fam.N))
    for i, n in enumerate(range(-M, M)):
        out[i] = x[i + 1] - _evaluate_state(fam, n, lam, x[i])
    return out


def residual(
    fam: NonlinearFamily,
    lam: ParameterPoint,
    x: Window,
    tol: float = Tolerances().hyperbolicity,
) -> Vector:
    """F_lambda on the window: the dynamic rows followed by the boundary rows
    of the linearisation, flattened in the row order of the Jacobian."""
    _window_size(fam, x)
    plus, minus = fam.linearization.splittings(lam, tol)
    return _residual(fam, lam, x, plus, minus)


def _residual(
    fam: NonlinearFamily,
    lam: ParameterPoint,
    x: Window,
    plus: HyperbolicSplitting,
    minus: HyperbolicSplitting,
) -> Vector:
    dynamic = dynamic_residual(fam, lam, x).reshape(-1)
    return np.concatenate([dynamic, _boundary_rows(x, plus, minus)])


def _jacobian(
    fam: NonlinearFamily,
    lam: ParameterPoint,
    x: Window,
    plus: HyperbolicSplitting,
    minus: HyperbolicSplitting,
) -> TruncatedOperator:
    M = (x.shape[0] - 1) // 2
    blocks = [
        _evaluate_derivative(fam, n, lam, x[i]) for i, n in enumerate(range(-M, M))
    ]
    return assemble_blocks(blocks, plus, minus, M, lam)


def jacobian(
    fam: NonlinearFamily,
    lam: ParameterPoint,
    x: Window,
    tol: float = Tolerances().hyperbolicity,
) -> TruncatedOperator:
    """Block bidiagonal DF_lambda(x) with -Df_n(lambda, x_n) blocks; at
    x = 0 it coincides with assemble_truncated of the linearisation."""
    _window_size(fam, x)
    plus, minus = fam.linearization.splittings(lam, tol)
    return _jacobian(fam, lam, x, plus, minus)


def _amplitude(x: Window) -> float:
    return float(np.max(np.linalg.norm(x, axis=1))) if x.size else 0.0


def _label(x: Window, amplitude: float, tol: float) -> Label:
    if amplitude < 10.0 * tol:
        return Label.TRIVIAL
    edge = max(float(np.linalg.norm(x[0])), float(np.linalg.norm(x[-1])))
    if edge > BOUNDARY_DECAY * amplitude:
        return Label.BORDERLINE
    return Label.NONTRIVIAL


def newton_solve(
    fam: NonlinearFamily,
    lam: ParameterPoint,
    x0: Window,
    opts: NewtonOptions = NewtonOptions(),
    hyperbolicity_tol: float = Tolerances().hyperbolicity,
) -> WindowSolution:
    """Damped Newton iteration for F_lambda(x) = 0 started at ``x0``.

    Steps are minimum-norm least-squares solutions through the SVD of the
    Jacobian, halved at most ``opts.max_halvings`` times while the residual
    does not decrease. An iterate x is returned when |F_lambda(x)| <= opts.tol
    and either max_n |x_n| < 10 opts.tol or the Newton step from x is at most
    opts.tol. F and the step are measured in the max norm, x_n in the
    Euclidean norm. A small residual alone does not stop the iteration.

    Raises NoConvergence when the budget is exhausted and SingularJacobian
    when sigma_min drops below machine precision relative to sigma_max.
    """
    if opts.tol < 1e-13:
        raise ValueError(f"Newton tolerance must be at least 1e-13, got {opts.tol}")
    M = _window_size(fam, x0)
    plus, minus = fam.linearization.splittings(lam, hyperbolicity_tol)
    shape = x0.shape
    x = np.array(x0, dtype=np.float64, copy=True)

    def solution(iterations: int, norm: float) -> WindowSolution:
        amplitude = _amplitude(x)
        return WindowSolution(
            lam=lam,
            window=M,
            x=x.copy(),
            residual_norm=norm,
            amplitude=amplitude,
            iterations=iterations,
            label=_label(x, amplitude, opts.tol),
        )

    r = _residual(fam, lam, x, plus, minus)
    norm = float(np.max(np.abs(r)))
    for iteration in range(opts.max_iter):
        if norm <= opts.tol and _amplitude(x) < 10.0 * opts.tol:
            return solution(iteration, norm)

        matrix = _jacobian(fam, lam, x, plus, minus).matrix
        U, s, Vh = linalg.svd(matrix, full_matrices=False)
        if s[-1] < s[0] * max(matrix.shape) * np.finfo(np.float64).eps:
            raise SingularJacobian(
                f"sigma_min {s[-1]:.3e} at iteration {iteration}, {lam.theta}"
            )
        step = -(Vh.T @ ((U.T @ r) / s)).reshape(shape)
        step_size = float(np.max(np.abs(step)))
        if norm <= opts.tol and step_size <= opts.tol:
            return solution(iteration, norm)

        scale = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = x + scale * step
            trial_r = _residual(fam, lam, trial, plus, minus)
            trial_norm = float(np.max(np.abs(trial_r)))
            if not opts.damping or trial_norm < norm:
                break
            scale *= 0.5
        logger.debug(
            "newton %d: |F|=%.3e step=%.3e scale=%g", iteration, norm, step_size, scale
        )
        x, r, norm = trial, trial_r, trial_norm

    if norm <= opts.tol and _amplitude(x) < 10.0 * opts.tol:
        return solution(opts.max_iter, norm)
    raise NoConvergence(
        f"no convergence in {opts.max_iter} iterations at {lam.theta}, |F|={norm:.3e}"
    )


def branch_seed(diag: KernelDiagnostics, amplitude: float, N: int) -> Window:
    """Newton seed along the first kernel direction, scaled so that
    max_n |x_n| = amplitude."""
    if diag.kernel_dim < 1 or diag.kernel_basis.shape[1] < 1:
        raise EmptyKernel("kernel is trivial")
    direction = canonical_signs(diag.kernel_basis[:, :1])[:, 0].reshape(-1, N)
    return np.asarray(amplitude * direction / _amplitude(direction), dtype=np.float64)


def adjoint_balance(
    fam: NonlinearFamily, lam: ParameterPoint, u: Window, y: Window
) -> Tuple[float, float]:
    """Both sides of the identity <y, h(u)> = <u, L'y> - <y, F(u)>, where
    h_n(u) = f_n(lambda, u_n) - a_n(lambda) u_n and F(u) is the dynamic
    residual. ``u`` lives on [-M, M] and ``y`` on [-M, M-1]."""
    lin = fam.linearization
    M = (u.shape[0] - 1) // 2
    h = np.empty((2 * M, fam.N))
    for i, n in enumerate(range(-M, M)):
        h[i] = _evaluate_state(fam, n, lam, u[i]) - lin.a_n(n, lam) @ u[i]
    lhs = pairing(y, h)
    dual = pairing(u, adjoint_apply(lin, lam, y))
    rhs = dual - pairing(y, dynamic_residual(fam, lam, u))
    return lhs, rhs


def _zero_window(fam: NonlinearFamily, M: int) -> Window:
    return np.zeros((2 * M + 1, fam.N))


def _diagnose(
    fam: NonlinearFamily, lam: ParameterPoint, M: int, tolerances: Tolerances
) -> KernelDiagnostics:
    op = jacobian(fam, lam, _zero_window(fam, M), tolerances.hyperbolicity)
    return kernel_diagnostics(op, tolerances.rank)


def _scan(
    fam: NonlinearFamily, mesh: ParameterMesh, M: int, tolerances: Tolerances
) -> Tuple[List[KernelDiagnostics], Tuple[SweepRecord, ...], Tuple[int, ...]]:
    diagnostics = parallel_map(
        lambda point: _diagnose(fam, point, M, tolerances), list(mesh.vertices)
    )
    records = tuple(
        SweepRecord(
            vertex_index=i,
            theta=point.theta,
            sigma_min=diag.sigma_min,
            kernel_dim=diag.kernel_dim,
        )
        for i, (point, diag) in enumerate(zip(mesh.vertices, diagnostics))
    )
    median = float(np.median([r.sigma_min for r in records])) if records else 0.0
    candidates = tuple(
        r.vertex_index
        for r in records
        if r.kernel_dim >= 1 or r.sigma_min < tolerances.trigger * median
    )
    logger.info(
        "scan: %d vertices, median sigma_min %.3e, %d candidates",
        len(records),
        median,
        len(candidates),
    )
    return diagnostics, records, candidates


def scan(
    fam: NonlinearFamily,
    mesh: ParameterMesh,
    M: int,
    tolerances: Tolerances = Tolerances(),
) -> SweepResult:
    """The diagnostic part of sweep: per-vertex sigma_min and kernel_dim of
    the linearisation and the candidate vertices, without Newton runs."""
    _, records, candidates = _scan(fam, mesh, M, tolerances)
    return SweepResult(records=records, candidates=candidates, solutions=())


def sweep(
    fam: NonlinearFamily,
    mesh: ParameterMesh,
    M: int,
    tolerances: Tolerances = Tolerances(),
    opts: Optional[NewtonOptions] = None,
    amplitude: float = 0.05,
    seeds: int = 1,
    seed: int = 0,
) -> SweepResult:
    """Scans sigma_min of the linearisation at every vertex and runs Newton
    from the near-kernel direction of each candidate at its neighbours.

    Candidates are vertices with a numerical kernel or with
    sigma_min < trigger * median(sigma_min). Extra seeds beyond the first
    perturb the kernel seed randomly (deterministic in ``seed``).
    """
    opts = opts or NewtonOptions(tol=tolerances.newton)
    diagnostics, records, candidates = _scan(fam, mesh, M, tolerances)

    rng = np.random.default_rng(seed)
    tasks: List[Tuple[ParameterPoint, Window]] = []
    for index in candidates:
        diag = diagnostics[index]
        if diag.kernel_dim == 0:
            relaxed = min(1e-2, tolerances.trigger)
            zero = _zero_window(fam, M)
            op = jacobian(fam, mesh.vertices[index], zero, tolerances.hyperbolicity)
            diag = kernel_diagnostics(op, relaxed)
        try:
            base = branch_seed(diag, amplitude, fam.N)
        except EmptyKernel as error:
            logger.warning("candidate %d: %s", index, error)
            continue
        starts = [base]
        for _ in range(1, seeds):
            noise = rng.standard_normal(base.shape)
            starts.append(base + 0.1 * amplitude * noise / _amplitude(noise))
        for neighbour in mesh.neighbours(index):
            tasks.extend((mesh.vertices[neighbour], start) for start in starts)

    def attempt(task: Tuple[ParameterPoint, Window]) -> Optional[WindowSolution]:
        lam, start = task
        try:
            return newton_solve(fam, lam, start, opts, tolerances.hyperbolicity)
        except (NoConvergence, SingularJacobian, EvaluatorFailure) as error:
            logger.info("newton at %s: %s", lam.theta, error)
            return None

    solutions = tuple(s for s in parallel_map(attempt, tasks) if s is not None)
    return SweepResult(records=records, candidates=candidates, solutions=solutions)


def _sample_indices(fam: NonlinearFamily) -> range:
    span = fam.linearization.decay_probe + 2
    return range(-span, span + 1)


def _check_A1(fam: NonlinearFamily, mesh: ParameterMesh) -> AssumptionCheck:
    zero = np.zeros(fam.N)
    failed = tuple(
        i
        for i, point in enumerate(mesh.vertices)
        if any(
            np.any(_evaluate_state(fam, n, point, zero) != 0.0)
            for n in _sample_indices(fam)
        )
    )
    detail = "f_n(lambda, 0) = 0 on the sample grid"
    return AssumptionCheck("A1", not failed, detail, failed)


def _check_A2(fam: NonlinearFamily, mesh: ParameterMesh) -> AssumptionCheck:
    zero = np.zeros(fam.N)
    worst = 0.0
    failed: List[int] = []
    for i, point in enumerate(mesh.vertices):
        differences = [
            _evaluate_derivative(fam, n, point, zero) - fam.linearization.a_n(n, point)
            for n in _sample_indices(fam)
        ]
        deviation = float(np.max(np.abs(differences)))
        if not math.isfinite(deviation):
            deviation = float("inf")
        worst = max(worst, deviation)
        if deviation > LINEARIZATION_TOL:
            failed.append(i)
    detail = f"max |Df_n(lambda, 0) - a_n(lambda)| = {worst:.3e}"
    return AssumptionCheck("A2", not failed, detail, tuple(failed))


def _check_A3(
    fam: NonlinearFamily, mesh: ParameterMesh, M: int, tolerances: Tolerances
) -> AssumptionCheck:
    failed: List[int] = []
    worst_deviation = 0.0
    worst_margin = float("inf")
    for i, point in enumerate(mesh.vertices):
        try:
            profile = check_A3(fam.linearization, point, M, tolerances.hyperbolicity)
        except (HyperbolicityViolation, NotInvertibleError) as error:
            logger.info("A3 fails at vertex %d: %s", i, error)
            failed.append(i)
            continue
        worst_deviation = max(worst_deviation, profile.deviation)
        worst_margin = min(worst_margin, profile.margin_plus, profile.margin_minus)
        if not profile.deviation <= tolerances.asymptotic:
            failed.append(i)
    detail = f"max deviation {worst_deviation:.3e}, min margin {worst_margin:.3e}"
    return AssumptionCheck("A3", not failed, detail, tuple(failed))


def _check_A4(
    fam: NonlinearFamily, mesh: ParameterMesh, tolerances: Tolerances
) -> AssumptionCheck:
    indices = [
        fredholm_index(fam.linearization, point, tolerances.hyperbolicity)
        for point in mesh.vertices
    ]
    failed = tuple(i for i, index in enumerate(indices) if index != 0)
    detail = f"Fredholm indices {sorted(set(indices))}"
    return AssumptionCheck("A4", not failed, detail, failed)


def _check_A5(
    fam: NonlinearFamily, mesh: ParameterMesh, M: int, tolerances: Tolerances
) -> AssumptionCheck:
    point = check_A5(
        fam.linearization, mesh, M, tolerances.rank, tolerances.hyperbolicity
    )
    if point is None:
        return AssumptionCheck(
            "A5",
            False,
            "no vertex with an invertible linearisation",
            tuple(range(len(mesh.vertices))),
        )
    return AssumptionCheck(
        "A5", True, f"invertible linearisation at theta={point.theta}"
    )


def _not_evaluated(name: str, reason: str) -> AssumptionCheck:
    return AssumptionCheck(name, False, f"not evaluated: {reason}")


def _notes(
    k: int, certificate: BifurcationCertificate, conclusion: Conclusion, a5_passed: bool
) -> Tuple[str, ...]:
    notes: List[str] = []
    if conclusion is Conclusion.CERTIFIED_BIFURCATION:
        if k >= 2:
            notes.append(
                f"the bifurcation set has covering dimension at least {k - 1}"
                " and is not contractible"
            )
        else:
            notes.append("the bifurcation set is non-empty")
    elif certificate.any_mismatch and not a5_passed:
        notes.append(
            "w1 mismatch without an invertible linearisation does not imply bifurcation"
        )
    return tuple(notes)


def certify_bifurcation(
    fam: NonlinearFamily,
    mesh: ParameterMesh,
    M: int,
    tolerances: Tolerances = Tolerances(),
    opts: Optional[NewtonOptions] = None,
    amplitude: float = 0.05,
    seeds: int = 1,
    seed: int = 0,
) -> BifurcationReport:
    """Checks (A1)-(A5), compares w_1 of the stable bundles at +-inf and
    sweeps the mesh. Failures are encoded in the report, never raised."""

    def failure(message: str, checks: Sequence[AssumptionCheck]) -> BifurcationReport:
        logger.error("certification of %s failed: %s", fam.name, message)
        return BifurcationReport(
            model=fam.name,
            k=fam.k,
            window=M,
            assumption_status=tuple(checks),
            certificate=None,
            sweep=(),
            candidates=(),
            solutions=(),
            conclusion=Conclusion.NUMERICAL_FAILURE,
            error=message,
        )

    checks: List[AssumptionCheck] = []
    try:
        probe = fam.linearization.decay_probe
        if M < probe:
            raise WindowTooSmallError(f"window {M} < decay probe {probe}")
        checks.append(_check_A1(fam, mesh))
        checks.append(_check_A2(fam, mesh))
        a3 = _check_A3(fam, mesh, M, tolerances)
        checks.append(a3)
        if not a3.passed:
            checks.append(_not_evaluated("A4", "limits not hyperbolic"))
            checks.append(_not_evaluated("A5", "limits not hyperbolic"))
            return BifurcationReport(
                model=fam.name,
                k=fam.k,
                window=M,
                assumption_status=tuple(checks),
                certificate=None,
                sweep=(),
                candidates=(),
                solutions=(),
                conclusion=Conclusion.ASSUMPTIONS_VIOLATED,
            )
        a4 = _check_A4(fam, mesh, tolerances)
        checks.append(a4)
        checks.append(_check_A5(fam, mesh, M, tolerances))
        logger.info("assumptions: %s", {c.name: c.passed for c in checks})

        certificate: Optional[BifurcationCertificate] = None
        if a4.passed:
            tol = tolerances.hyperbolicity
            lin = fam.linearization
            plus = sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS, tol)
            minus = sample_subbundle(lin.a_minus, mesh, Kind.STABLE, End.MINUS, tol)
            certificate = certify(plus, minus, fam.k)

        result = SweepResult((), (), ())
        if all(c.passed for c in checks[:4]):
            result = sweep(fam, mesh, M, tolerances, opts, amplitude, seeds, seed)
    except (DichotomyError, np.linalg.LinAlgError) as error:
        return failure(f"{type(error).__name__}: {error}", checks)

    if not all(c.passed for c in checks) or certificate is None:
        conclusion = Conclusion.ASSUMPTIONS_VIOLATED
    elif certificate.any_mismatch:
        conclusion = Conclusion.CERTIFIED_BIFURCATION
    else:
        conclusion = Conclusion.NO_CERTIFICATE
    notes: Tuple[str, ...] = ()
    if certificate is not None:
        notes = _notes(fam.k, certificate, conclusion, checks[4].passed)
    logger.info("%s: %s", fam.name, conclusion.value)
    return BifurcationReport(
        model=fam.name,
        k=fam.k,
        window=M,
        assumption_status=tuple(checks),
        certificate=certificate,
        sweep=result.records,
        candidates=result.candidates,
        solutions=result.solutions,
        conclusion=conclusion,
        notes=notes,
    )
