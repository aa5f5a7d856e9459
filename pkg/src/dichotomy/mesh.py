"""
Discretisations of the parameter spaces S^1 and T^k.

A torus is represented by its generator circles through the base point
(Theta = 0, i.e. lambda = (1, ..., 1)); each generator loop varies exactly one
angle coordinate. This 1-skeleton is all that first Stiefel-Whitney classes
need, since H^1(T^k; Z_2) is detected on the generators.
"""
import math
from dataclasses import dataclass
from typing import Dict
from typing import List
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt

from dichotomy.spectral import DichotomyError

MIN_RESOLUTION = 8
REFINEMENT_FACTORS = (2, 4, 8, 16)

_KEY_DIGITS = 12


class MeshError(DichotomyError, ValueError):
    """Base class for invalid mesh requests."""


class MeshTooCoarseError(MeshError):
    """Raised when a loop resolution is below MIN_RESOLUTION."""


class BadLoopIndexError(MeshError):
    """Raised when a loop index does not name a generator loop."""


class BadRefinementFactorError(MeshError):
    """Raised when a refinement factor is not one of REFINEMENT_FACTORS."""


def wrap_angle(theta: float) -> float:
    """Maps an angle to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class ParameterPoint:
    """A point of T^k in angle coordinates, lambda_j = exp(i theta_j)."""

    theta: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.theta) < 1:
            raise MeshError("a parameter point needs at least one coordinate")
        for value in self.theta:
            if not -math.pi < value <= math.pi:
                raise MeshError(f"angle {value!r} outside (-pi, pi]")

    @classmethod
    def from_angles(cls, angles: Sequence[float]) -> "ParameterPoint":
        """Builds a point after wrapping every angle to (-pi, pi]."""
        return cls(tuple(wrap_angle(float(value)) for value in angles))

    @property
    def k(self) -> int:
        return len(self.theta)

    @property
    def theta_sum(self) -> float:
        return float(sum(self.theta))

    def as_array(self) -> npt.NDArray[np.float64]:
        return np.array(self.theta, dtype=np.float64)


@dataclass(frozen=True)
class ParameterMesh:
    """Generator-loop discretisation of T^k.

    :param k: Number of angle coordinates.
    :param vertices: Distinct mesh vertices.
    :param loops: One cyclic vertex-index sequence per generator; loop j
        varies only coordinate j. The closing edge from the last index back
        to the first is implicit.
    :param resolution: Number of vertices of each loop.
    """

    k: int
    vertices: Tuple[ParameterPoint, ...]
    loops: Tuple[Tuple[int, ...], ...]
    resolution: Tuple[int, ...]

    def loop_points(self, loop_index: int) -> List[ParameterPoint]:
        self._check_loop_index(loop_index)
        return [self.vertices[i] for i in self.loops[loop_index]]

    def loop_increments(self, loop_index: int) -> List[float]:
        """Angle increments of the varying coordinate along the loop,
        closing edge included."""
        points = self.loop_points(loop_index)
        increments = []
        for position, point in enumerate(points):
            following = points[(position + 1) % len(points)]
            step = following.theta[loop_index] - point.theta[loop_index]
            increments.append(step % (2.0 * math.pi))
        return increments

    def neighbours(self, vertex_index: int) -> List[int]:
        """Vertices adjacent to ``vertex_index`` along any loop through it."""
        found: List[int] = []
        for loop in self.loops:
            size = len(loop)
            for position, index in enumerate(loop):
                if index != vertex_index:
                    continue
                for other in (loop[(position - 1) % size], loop[(position + 1) % size]):
                    if other != vertex_index and other not in found:
                        found.append(other)
        return found

    def _check_loop_index(self, loop_index: int) -> None:
        if not 0 <= loop_index < len(self.loops):
            raise BadLoopIndexError(
                f"loop {loop_index} not in 0..{len(self.loops) - 1}"
            )


def _loop_angles(M: int) -> List[float]:
    return [wrap_angle(-math.pi + 2.0 * math.pi * i / M) for i in range(M)]


def _build_mesh(k: int, resolution: Sequence[int]) -> ParameterMesh:
    for M in resolution:
        if M < MIN_RESOLUTION:
            raise MeshTooCoarseError(f"loop resolution {M} < {MIN_RESOLUTION}")

    vertices: List[ParameterPoint] = []
    index_of: Dict[Tuple[float, ...], int] = {}
    loops: List[Tuple[int, ...]] = []
    for j, M in enumerate(resolution):
        loop: List[int] = []
        for angle in _loop_angles(M):
            theta = tuple(angle if i == j else 0.0 for i in range(k))
            key = tuple(round(value, _KEY_DIGITS) + 0.0 for value in theta)
            if key not in index_of:
                index_of[key] = len(vertices)
                vertices.append(ParameterPoint(theta))
            loop.append(index_of[key])
        loops.append(tuple(loop))
    return ParameterMesh(
        k=k, vertices=tuple(vertices), loops=tuple(loops), resolution=tuple(resolution)
    )


def make_circle_mesh(M: int) -> ParameterMesh:
    """Uniform mesh of S^1 with vertices Theta_i = -pi + 2 pi i / M
    (vertex 0 is stored as Theta = pi)."""
    return _build_mesh(1, [M])


def make_torus_mesh(k: int, M: int) -> ParameterMesh:
    """Union of the k generator circles of T^k through (1, ..., 1), each
    discretised with M vertices. The circles share the vertex Theta = 0 when M
    is even; for odd M the base point lies between two vertices of every loop."""
    if k < 1:
        raise MeshError(f"k must be positive, got {k}")
    return _build_mesh(k, [M] * k)


def refine_loop(mesh: ParameterMesh, loop_index: int, factor: int) -> ParameterMesh:
    """Subdivides loop ``loop_index`` uniformly by ``factor``; the original
    vertices are kept and the other loops are unchanged."""
    if factor not in REFINEMENT_FACTORS:
        raise BadRefinementFactorError(f"factor {factor} not in {REFINEMENT_FACTORS}")
    if not 0 <= loop_index < len(mesh.loops):
        raise BadLoopIndexError(f"loop {loop_index} not in 0..{len(mesh.loops) - 1}")
    resolution = list(mesh.resolution)
    resolution[loop_index] *= factor
    return _build_mesh(mesh.k, resolution)
