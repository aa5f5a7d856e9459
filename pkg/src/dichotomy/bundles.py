"""
Asymptotic stable/unstable bundles over a parameter mesh and their first
Stiefel-Whitney classes.

A bundle is carried as one orthonormal frame per mesh vertex. w_1 along a
generator loop is the orientation holonomy: the product of the signs of
det(F_i^T F_j) over consecutive loop edges. A product of -1 means the bundle
is non-orientable along the loop (w_1 = 1).
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from dichotomy.mesh import ParameterMesh
from dichotomy.mesh import ParameterPoint
from dichotomy.mesh import REFINEMENT_FACTORS
from dichotomy.mesh import refine_loop
from dichotomy.parallel import parallel_map
from dichotomy.spectral import DEFAULT_HYPERBOLICITY_TOL
from dichotomy.spectral import DichotomyError
from dichotomy.spectral import hyperbolic_splitting
from dichotomy.spectral import RealMatrix

logger = logging.getLogger(__name__)

LimitFamily = Callable[[ParameterPoint], RealMatrix]

MIN_OVERLAP_QUALITY = 0.5


class BundleError(DichotomyError):
    """Base class for bundle construction and holonomy failures."""


class RankDiscontinuityError(BundleError):
    """Raised when the stable dimension varies across the mesh."""


class RankMismatchError(BundleError):
    """Raised when the bundles at the two ends have different ranks, so
    the stable dimensions do not agree and no certificate can be issued."""


class FramesNotAdjacentError(BundleError):
    """Raised when two frames overlap with quality below
    MIN_OVERLAP_QUALITY; the mesh is too coarse there."""


class MeshUnresolvableError(BundleError):
    """Raised when a loop still has non-adjacent frames after the maximal
    refinement."""


class Kind(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


class End(str, Enum):
    PLUS = "plus_infinity"
    MINUS = "minus_infinity"


@dataclass(frozen=True)
class SubbundleFrames:
    """Per-vertex orthonormal frames of E^s or E^u at one end.

    ``limit_family`` and ``tol`` are kept so that loops can be resampled on a
    refined mesh; frames built by hand may leave ``limit_family`` unset.
    """

    mesh: ParameterMesh
    rank: int
    frames: Tuple[RealMatrix, ...]
    end: End
    kind: Kind
    limit_family: Optional[LimitFamily] = None
    tol: float = DEFAULT_HYPERBOLICITY_TOL


@dataclass(frozen=True)
class W1Vector:
    """First Stiefel-Whitney class as one Z_2 bit per generator loop."""

    bits: Tuple[int, ...]

    def __post_init__(self) -> None:
        if any(bit not in (0, 1) for bit in self.bits):
            raise ValueError(f"w1 bits must be 0 or 1, got {self.bits}")

    @property
    def is_zero(self) -> bool:
        return not any(self.bits)


@dataclass(frozen=True)
class BifurcationCertificate:
    """Comparison of w_1(E^s(+inf)) and w_1(E^s(-inf)).

    ``dimension_bound`` is k - 1 when k >= 2 and some generator bit differs.
    """

    w1_plus: W1Vector
    w1_minus: W1Vector
    mismatch: Tuple[bool, ...]
    any_mismatch: bool
    dimension_bound: Optional[int]


def _frame_at(
    limit_family: LimitFamily, point: ParameterPoint, kind: Kind, tol: float
) -> RealMatrix:
    split = hyperbolic_splitting(limit_family(point), tol)
    return split.Vs if kind is Kind.STABLE else split.Vu


def sample_subbundle(
    limit_family: LimitFamily,
    mesh: ParameterMesh,
    kind: Kind,
    end: End,
    tol: float = DEFAULT_HYPERBOLICITY_TOL,
) -> SubbundleFrames:
    """Samples the stable or unstable subspace of ``limit_family`` at every
    mesh vertex.

    Raises HyperbolicityViolation if some vertex is not hyperbolic and
    RankDiscontinuityError if the rank is not constant across the mesh.
    """
    frames = parallel_map(
        lambda point: _frame_at(limit_family, point, kind, tol), list(mesh.vertices)
    )
    ranks = sorted({frame.shape[1] for frame in frames})
    if len(ranks) != 1:
        raise RankDiscontinuityError(f"{kind.value} rank varies over the mesh: {ranks}")
    logger.debug(
        "sampled %s bundle at %s: rank %d on %d vertices",
        kind.value,
        end.value,
        ranks[0],
        len(frames),
    )
    return SubbundleFrames(
        mesh=mesh,
        rank=ranks[0],
        frames=tuple(frames),
        end=end,
        kind=kind,
        limit_family=limit_family,
        tol=tol,
    )


def transition_sign(F_i: RealMatrix, F_j: RealMatrix) -> Tuple[int, float]:
    """Returns the sign of det(F_i^T F_j) and the overlap quality
    q = |det(F_i^T F_j)|.

    Raises FramesNotAdjacentError when q < MIN_OVERLAP_QUALITY.
    """
    if F_i.shape != F_j.shape:
        raise BundleError(f"frame shapes differ: {F_i.shape} vs {F_j.shape}")
    determinant = float(np.linalg.det(F_i.T @ F_j))
    quality = abs(determinant)
    if quality < MIN_OVERLAP_QUALITY:
        raise FramesNotAdjacentError(
            f"overlap quality {quality:.3f} < {MIN_OVERLAP_QUALITY}"
        )
    return (1 if determinant > 0.0 else -1), min(quality, 1.0)


def _holonomy(frames: List[RealMatrix]) -> int:
    product = 1
    for position, frame in enumerate(frames):
        sign, _ = transition_sign(frame, frames[(position + 1) % len(frames)])
        product *= sign
    return product


def _loop_frames(
    frames: SubbundleFrames, loop_index: int, factor: int
) -> List[RealMatrix]:
    if factor == 1:
        return [frames.frames[i] for i in frames.mesh.loops[loop_index]]
    if frames.limit_family is None:
        raise MeshUnresolvableError(
            "frames carry no family to resample on a refined loop"
        )
    refined = refine_loop(frames.mesh, loop_index, factor)
    family = frames.limit_family
    points = refined.loop_points(loop_index)
    return parallel_map(
        lambda point: _frame_at(family, point, frames.kind, frames.tol), points
    )


def w1_along_loop(frames: SubbundleFrames, loop_index: int) -> int:
    """Returns w_1 of the bundle restricted to generator loop ``loop_index``.

    On non-adjacent frames the loop is refined dyadically up to 16 times
    before MeshUnresolvableError is raised.
    """
    frames.mesh.loop_points(loop_index)
    for factor in (1,) + REFINEMENT_FACTORS:
        try:
            product = _holonomy(_loop_frames(frames, loop_index, factor))
        except FramesNotAdjacentError as error:
            logger.warning("loop %d at refinement %dx: %s", loop_index, factor, error)
            if frames.limit_family is None:
                break
            continue
        return 1 if product < 0 else 0
    raise MeshUnresolvableError(
        f"loop {loop_index} has non-adjacent frames"
        f" after {REFINEMENT_FACTORS[-1]}x refinement"
    )


def w1_vector(frames: SubbundleFrames) -> W1Vector:
    """Returns w_1 of the bundle on every generator loop."""
    loops = range(len(frames.mesh.loops))
    return W1Vector(tuple(w1_along_loop(frames, j) for j in loops))


def certify(
    plus: SubbundleFrames, minus: SubbundleFrames, k: int
) -> BifurcationCertificate:
    """Compares w_1 of the stable bundles at +inf and -inf.

    Raises RankMismatchError if the ranks differ.
    """
    if plus.kind is not Kind.STABLE or minus.kind is not Kind.STABLE:
        raise BundleError("certify compares stable bundles")
    if plus.mesh != minus.mesh:
        raise BundleError("bundles live on different meshes")
    if plus.rank != minus.rank:
        raise RankMismatchError(
            f"stable ranks differ: {plus.rank} at +inf, {minus.rank} at -inf"
        )

    w1_plus = w1_vector(plus)
    w1_minus = w1_vector(minus)
    mismatch = tuple(p != m for p, m in zip(w1_plus.bits, w1_minus.bits))
    any_mismatch = any(mismatch)
    dimension_bound = k - 1 if k >= 2 and any_mismatch else None
    logger.info(
        "w1(+inf)=%s w1(-inf)=%s mismatch=%s", w1_plus.bits, w1_minus.bits, any_mismatch
    )
    return BifurcationCertificate(
        w1_plus=w1_plus,
        w1_minus=w1_minus,
        mismatch=mismatch,
        any_mismatch=any_mismatch,
        dimension_bound=dimension_bound,
    )
