import math
from typing import Callable

import numpy as np
import pytest

from dichotomy.bundles import BundleError
from dichotomy.bundles import certify
from dichotomy.bundles import End
from dichotomy.bundles import FramesNotAdjacentError
from dichotomy.bundles import Kind
from dichotomy.bundles import MeshUnresolvableError
from dichotomy.bundles import RankDiscontinuityError
from dichotomy.bundles import RankMismatchError
from dichotomy.bundles import sample_subbundle
from dichotomy.bundles import SubbundleFrames
from dichotomy.bundles import transition_sign
from dichotomy.bundles import w1_along_loop
from dichotomy.bundles import w1_vector
from dichotomy.bundles import W1Vector
from dichotomy.mesh import make_circle_mesh
from dichotomy.mesh import make_torus_mesh
from dichotomy.mesh import ParameterPoint
from dichotomy.models import build_counterexample
from dichotomy.models import build_torus_example
from dichotomy.models import random_orthogonal
from dichotomy.spectral import RealMatrix


def rotation(angle: float) -> RealMatrix:
    cos, sin = math.cos(angle), math.sin(angle)
    return np.array([[cos, -sin], [sin, cos]])


def twisted_family(turns: int) -> Callable[[ParameterPoint], RealMatrix]:
    """Saddle whose stable line turns by turns * pi around the circle."""

    def a(point: ParameterPoint) -> RealMatrix:
        r = rotation(turns * point.theta_sum / 2.0)
        return np.asarray(r @ np.diag([0.5, 2.0]) @ r.T)

    return a


def test_transition_sign() -> None:
    frame = np.array([[1.0], [0.0]])
    tilted = np.array([[math.cos(0.3)], [math.sin(0.3)]])

    assert transition_sign(frame, tilted) == (1, pytest.approx(math.cos(0.3)))
    assert transition_sign(frame, -tilted)[0] == -1
    with pytest.raises(FramesNotAdjacentError):
        transition_sign(frame, np.array([[0.0], [1.0]]))
    with pytest.raises(BundleError):
        transition_sign(frame, np.eye(2))


def test_torus_stable_bundle_is_moebius() -> None:
    lin = build_torus_example().linearization
    mesh = make_circle_mesh(16)
    plus = sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS)
    minus = sample_subbundle(lin.a_minus, mesh, Kind.STABLE, End.MINUS)

    assert plus.rank == 1
    assert len(plus.frames) == 16
    assert w1_vector(plus) == W1Vector((1,))
    assert w1_vector(minus) == W1Vector((0,))


def test_unstable_bundle_matches_stable_bundle_on_trivial_total_space() -> None:
    lin = build_torus_example().linearization
    mesh = make_circle_mesh(16)
    stable = sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS)
    unstable = sample_subbundle(lin.a_plus, mesh, Kind.UNSTABLE, End.PLUS)

    assert w1_vector(unstable) == w1_vector(stable)


def test_certify_circle() -> None:
    lin = build_torus_example().linearization
    mesh = make_circle_mesh(16)
    certificate = certify(
        sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS),
        sample_subbundle(lin.a_minus, mesh, Kind.STABLE, End.MINUS),
        k=1,
    )

    assert certificate.any_mismatch
    assert certificate.mismatch == (True,)
    assert certificate.dimension_bound is None


def test_certify_three_torus_bounds_dimension() -> None:
    lin = build_torus_example(k=3).linearization
    mesh = make_torus_mesh(3, 8)
    certificate = certify(
        sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS),
        sample_subbundle(lin.a_minus, mesh, Kind.STABLE, End.MINUS),
        k=3,
    )

    assert certificate.w1_plus.bits == (1, 1, 1)
    assert certificate.w1_minus.is_zero
    assert certificate.dimension_bound == 2


def test_counterexample_stable_bundle_of_rank_two() -> None:
    lin = build_counterexample().linearization
    mesh = make_circle_mesh(8)
    plus = sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS)
    minus = sample_subbundle(lin.a_minus, mesh, Kind.STABLE, End.MINUS)
    certificate = certify(plus, minus, k=1)

    assert plus.rank == 2
    assert certificate.w1_plus.bits == (1,)
    assert certificate.w1_minus.bits == (0,)


@pytest.mark.parametrize("seed", range(4))
def test_transition_sign_under_change_of_frame(seed: int) -> None:
    rng = np.random.default_rng(seed)
    F_i = np.linalg.qr(rng.standard_normal((5, 2)))[0]
    F_j = np.linalg.qr(F_i + 0.1 * rng.standard_normal((5, 2)))[0]
    Q_i = random_orthogonal(rng, 2)
    Q_j = random_orthogonal(rng, 2)
    sign, quality = transition_sign(F_i, F_j)
    gauge = int(np.sign(np.linalg.det(Q_i)) * np.sign(np.linalg.det(Q_j)))
    expected = (sign * gauge, pytest.approx(quality))

    assert transition_sign(F_i @ Q_i, F_j @ Q_j) == expected


@pytest.mark.parametrize("M", [16, 64, 128])
def test_w1_does_not_depend_on_the_mesh(M: int) -> None:
    lin = build_torus_example().linearization
    mesh = make_circle_mesh(M)
    plus = sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS)
    minus = sample_subbundle(lin.a_minus, mesh, Kind.STABLE, End.MINUS)

    assert w1_along_loop(plus, 0) == 1
    assert w1_along_loop(minus, 0) == 0


def test_w1_on_a_torus_of_odd_resolution() -> None:
    lin = build_torus_example(k=2).linearization
    mesh = make_torus_mesh(2, 9)
    plus = sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS)
    minus = sample_subbundle(lin.a_minus, mesh, Kind.STABLE, End.MINUS)

    assert w1_vector(plus).bits == (1, 1)
    assert w1_vector(minus).is_zero


def test_certify_is_symmetric_in_its_ends() -> None:
    lin = build_torus_example(k=2).linearization
    mesh = make_torus_mesh(2, 8)
    plus = sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS)
    minus = sample_subbundle(lin.a_minus, mesh, Kind.STABLE, End.MINUS)
    forward = certify(plus, minus, k=2)
    backward = certify(minus, plus, k=2)

    assert backward.mismatch == forward.mismatch
    assert backward.dimension_bound == forward.dimension_bound == 1
    assert (backward.w1_plus, backward.w1_minus) == (forward.w1_minus, forward.w1_plus)


def test_rank_mismatch() -> None:
    lin = build_torus_example().linearization
    mesh = make_circle_mesh(8)
    plus = sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS)
    minus = sample_subbundle(
        lambda point: np.diag([0.5, 0.25]), mesh, Kind.STABLE, End.MINUS
    )

    with pytest.raises(RankMismatchError):
        certify(plus, minus, k=1)


def test_certify_needs_stable_bundles_on_one_mesh() -> None:
    lin = build_torus_example().linearization
    mesh = make_circle_mesh(8)
    plus = sample_subbundle(lin.a_plus, mesh, Kind.STABLE, End.PLUS)
    unstable = sample_subbundle(lin.a_minus, mesh, Kind.UNSTABLE, End.MINUS)
    other_mesh = sample_subbundle(
        lin.a_minus, make_circle_mesh(16), Kind.STABLE, End.MINUS
    )

    with pytest.raises(BundleError):
        certify(plus, unstable, k=1)
    with pytest.raises(BundleError):
        certify(plus, other_mesh, k=1)


def test_rank_discontinuity() -> None:
    def jumping(point: ParameterPoint) -> RealMatrix:
        return np.diag([0.5, 2.0]) if point.theta[0] > 0.0 else np.diag([0.5, 0.5])

    with pytest.raises(RankDiscontinuityError):
        sample_subbundle(jumping, make_circle_mesh(8), Kind.STABLE, End.PLUS)


def test_coarse_loop_is_refined() -> None:
    mesh = make_circle_mesh(8)
    frames = sample_subbundle(twisted_family(5), mesh, Kind.STABLE, End.PLUS)

    assert w1_along_loop(frames, 0) == 1


def test_even_twist_is_orientable() -> None:
    mesh = make_circle_mesh(16)
    frames = sample_subbundle(twisted_family(2), mesh, Kind.STABLE, End.PLUS)

    assert w1_along_loop(frames, 0) == 0


def test_hand_built_frames_cannot_be_refined() -> None:
    mesh = make_circle_mesh(8)
    family = twisted_family(5)
    frames = sample_subbundle(family, mesh, Kind.STABLE, End.PLUS)
    bare = SubbundleFrames(
        mesh=mesh, rank=1, frames=frames.frames, end=End.PLUS, kind=Kind.STABLE
    )

    with pytest.raises(MeshUnresolvableError):
        w1_along_loop(bare, 0)


def test_w1_bits_are_binary() -> None:
    with pytest.raises(ValueError):
        W1Vector((2,))
    assert W1Vector((0, 0)).is_zero
    assert not W1Vector((0, 1)).is_zero
