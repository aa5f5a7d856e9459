"""
Oracle suites run against a seeded random corpus.

Every case derives its generator from its own seed, so a failure message
carries everything needed to reproduce it.
"""
import logging
from dataclasses import dataclass
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from dichotomy.linear import adjoint_apply
from dichotomy.linear import apply_operator
from dichotomy.linear import assemble_truncated
from dichotomy.linear import fredholm_index
from dichotomy.linear import half_line_apply
from dichotomy.linear import LinearFamily
from dichotomy.linear import pairing
from dichotomy.linear import right_inverse_apply
from dichotomy.linear import splice_check
from dichotomy.mesh import ParameterPoint
from dichotomy.models import build_counterexample
from dichotomy.models import build_random
from dichotomy.models import random_hyperbolic_matrix
from dichotomy.parallel import parallel_map
from dichotomy.spectral import DichotomyError
from dichotomy.spectral import hyperbolic_splitting
from dichotomy.spectral import recommended_nodes
from dichotomy.spectral import spectral_projector_contour

logger = logging.getLogger(__name__)

RIGHT_INVERSE_HORIZON = 40
RIGHT_INVERSE_CHECKED = 30
CORPUS_DECAY = 0.25
MAX_CORPUS_DIMENSION = 4

# Outcome of one case: None on success, otherwise a failure description.
CaseRunner = Callable[[int], Optional[str]]


class UnknownSuiteError(DichotomyError, ValueError):
    """Raised for a suite name outside SUITES."""


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    failures: Tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def _random_point(rng: np.random.Generator, k: int = 1) -> ParameterPoint:
    return ParameterPoint.from_angles(rng.uniform(-np.pi, np.pi, size=k))


def _random_family(rng: np.random.Generator, seed: int) -> LinearFamily:
    N = int(rng.integers(1, MAX_CORPUS_DIMENSION + 1))
    return build_random(
        seed=seed,
        N=N,
        k_plus=int(rng.integers(0, N + 1)),
        k_minus=int(rng.integers(0, N + 1)),
        decay=CORPUS_DECAY,
    )


def _corpus_family(rng: np.random.Generator, seed: int) -> LinearFamily:
    if seed % 2:
        return _random_family(rng, seed)
    return build_counterexample().linearization


def index_case(seed: int) -> Optional[str]:
    """cols - rows of the finite section equals dim E^s(+inf) - dim E^s(-inf),
    for the family and for its compact perturbation by the limits."""
    rng = np.random.default_rng(seed)
    fam = _random_family(rng, seed)
    lam = _random_point(rng)
    expected = fredholm_index(fam, lam)
    for variant in (fam, fam.piecewise()):
        op = assemble_truncated(variant, lam, fam.decay_probe)
        if op.cols - op.rows != expected:
            return f"seed {seed}: cols - rows = {op.cols - op.rows}, index {expected}"
    if fredholm_index(fam.piecewise(), lam) != expected:
        return f"seed {seed}: index changed under the compact perturbation"
    return None


def right_inverse_case(seed: int) -> Optional[str]:
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, MAX_CORPUS_DIMENSION + 1))
    a = random_hyperbolic_matrix(rng, N, int(rng.integers(0, N + 1)), non_normal=0.3)
    x = rng.standard_normal((RIGHT_INVERSE_HORIZON + 1, N))
    defect = half_line_apply(a, right_inverse_apply(a, x)) - x[:-1]
    error = float(np.max(np.abs(defect[:RIGHT_INVERSE_CHECKED])))
    if error > 1e-8:
        return f"seed {seed}: |L(Mx) - x| = {error:.3e} on [0, {RIGHT_INVERSE_CHECKED}]"
    return None


def splice_case(seed: int) -> Optional[str]:
    """The splice identity is exact for a_n equal to the limits, and for a
    decaying family its defect is the compact remainder (a_n - a(+-inf)) x_n."""
    rng = np.random.default_rng(seed)
    fam = _corpus_family(rng, seed)
    lam = _random_point(rng)
    M = int(rng.integers(2, 20))
    x = rng.standard_normal((2 * M + 1, fam.N))
    error = splice_check(fam.piecewise(), lam, x)
    if error > 1e-12:
        return f"seed {seed}: splice defect {error:.3e}"
    limits = {True: fam.a_plus(lam), False: fam.a_minus(lam)}
    remainder = max(
        float(np.max(np.abs((fam.a_n(n, lam) - limits[n >= 0]) @ x[n + M])))
        for n in range(-M, M)
    )
    defect = splice_check(fam, lam, x)
    if abs(defect - remainder) > 1e-10 * max(1.0, remainder):
        return (
            f"seed {seed}: splice defect {defect:.3e},"
            f" compact remainder {remainder:.3e}"
        )
    return None


def adjoint_case(seed: int) -> Optional[str]:
    """<L x, y> = <x, L'y> on windows, for random and counterexample families."""
    rng = np.random.default_rng(seed)
    fam = _corpus_family(rng, seed)
    lam = _random_point(rng)
    M = int(rng.integers(2, 20))
    x = rng.standard_normal((2 * M + 1, fam.N))
    y = rng.standard_normal((2 * M, fam.N))
    left = pairing(apply_operator(fam, lam, x), y)
    right = pairing(x, adjoint_apply(fam, lam, y))
    if abs(left - right) > 1e-10 * max(1.0, abs(left)):
        return f"seed {seed}: <Lx, y> = {left!r}, <x, L'y> = {right!r}"
    return None


def contour_case(seed: int) -> Optional[str]:
    """The trapezoid Riesz projection agrees with the Schur projector."""
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, MAX_CORPUS_DIMENSION + 3))
    a = random_hyperbolic_matrix(rng, N, int(rng.integers(0, N + 1)), non_normal=0.3)
    split = hyperbolic_splitting(a)
    contour = spectral_projector_contour(a, recommended_nodes(split.margin))
    error = float(np.max(np.abs(contour - split.Ps)))
    if error > 1e-8:
        return f"seed {seed}: |P_contour - P_schur| = {error:.3e}"
    return None


SUITES: Dict[str, Tuple[CaseRunner, int]] = {
    "index": (index_case, 200),
    "right_inverse": (right_inverse_case, 100),
    "splice": (splice_case, 50),
    "adjoint": (adjoint_case, 50),
    "contour": (contour_case, 200),
}


def _guarded(runner: CaseRunner, seed: int) -> Optional[str]:
    try:
        return runner(seed)
    except DichotomyError as error:
        return f"seed {seed}: {type(error).__name__}: {error}"


def run_suite(name: str, cases: Optional[int] = None, seed: int = 0) -> SuiteResult:
    """Runs suite ``name`` on seeds seed, seed + 1, ...; ``cases`` defaults
    to the suite's corpus size."""
    if name not in SUITES:
        raise UnknownSuiteError(
            f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'"
        )
    runner, default_cases = SUITES[name]
    count = default_cases if cases is None else cases
    seeds = list(range(seed, seed + count))
    outcomes = parallel_map(lambda s: _guarded(runner, s), seeds)
    failures = tuple(outcome for outcome in outcomes if outcome is not None)
    logger.info("suite %s: %d cases, %d failures", name, count, len(failures))
    return SuiteResult(name=name, cases=count, failures=failures)


def run_suites(
    name: str, cases: Optional[int] = None, seed: int = 0
) -> List[SuiteResult]:
    """Runs one suite, or every suite for ``name == "all"``."""
    names = list(SUITES) if name == "all" else [name]
    return [run_suite(suite, cases, seed) for suite in names]
