import numpy as np
import pytest

from dichotomy.models import random_hyperbolic_matrix
from dichotomy.models import random_orthogonal
from dichotomy.spectral import as_real_matrix
from dichotomy.spectral import canonical_signs
from dichotomy.spectral import decay_check
from dichotomy.spectral import hyperbolic_splitting
from dichotomy.spectral import HyperbolicityViolation
from dichotomy.spectral import is_hyperbolic
from dichotomy.spectral import MatrixShapeError
from dichotomy.spectral import NotInvertibleError
from dichotomy.spectral import recommended_nodes
from dichotomy.spectral import restricted_map
from dichotomy.spectral import spectral_projector_contour


def test_diagonal_splitting() -> None:
    split = hyperbolic_splitting([[0.5, 0.0], [0.0, 2.0]])

    assert split.N == 2
    assert split.k_s == 1
    assert split.k_u == 1
    assert split.margin == pytest.approx(0.5)
    assert np.allclose(split.Vs, [[1.0], [0.0]])
    assert np.allclose(split.Vu, [[0.0], [1.0]])
    assert np.allclose(split.Ps, np.diag([1.0, 0.0]))
    assert np.allclose(split.Pu, np.diag([0.0, 1.0]))


def test_rotation_is_not_hyperbolic() -> None:
    with pytest.raises(HyperbolicityViolation) as error:
        hyperbolic_splitting([[0.0, 1.0], [-1.0, 0.0]])

    assert error.value.margin < 1e-8


def test_singular_matrix_is_rejected() -> None:
    with pytest.raises(NotInvertibleError):
        is_hyperbolic([[0.0, 0.0], [0.0, 2.0]])


def test_minus_limit_of_counterexample_has_two_stable_directions() -> None:
    split = hyperbolic_splitting(np.diag([0.5, 2.0, 2.0, 0.5]))

    assert split.k_s == 2
    assert split.k_u == 2
    assert np.allclose(split.Ps, np.diag([1.0, 0.0, 0.0, 1.0]))


def test_all_stable_and_all_unstable() -> None:
    stable = hyperbolic_splitting(np.diag([0.5, 0.25]))
    unstable = hyperbolic_splitting(np.diag([3.0, -2.0]))

    assert stable.k_u == 0
    assert np.array_equal(stable.Ps, np.eye(2))
    assert unstable.k_s == 0
    assert np.array_equal(unstable.Ps, np.zeros((2, 2)))


def test_complex_pair_stays_together() -> None:
    angle = 0.7
    cos, sin = np.cos(angle), np.sin(angle)
    rotation = np.array([[cos, -sin], [sin, cos]])
    a = np.zeros((3, 3))
    a[:2, :2] = 0.5 * rotation
    a[2, 2] = 4.0
    split = hyperbolic_splitting(a)

    assert split.k_s == 2
    assert split.margin == pytest.approx(0.5)


def test_projector_is_invariant_and_idempotent() -> None:
    a = np.array([[0.5, 3.0, 1.0], [0.0, 2.0, -1.0], [0.0, 0.0, -0.3]])
    split = hyperbolic_splitting(a)

    assert np.allclose(split.Ps @ split.Ps, split.Ps, atol=1e-10)
    assert np.allclose(split.Ps @ a, a @ split.Ps, atol=1e-10)
    assert np.allclose(split.Ps @ split.Vs, split.Vs, atol=1e-10)
    assert np.allclose(split.Ps @ split.Vu, 0.0, atol=1e-10)
    assert np.allclose(split.Vs.T @ split.Vs, np.eye(split.k_s), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_splitting_commutes_with_similarity(seed: int) -> None:
    rng = np.random.default_rng(seed)
    a = random_hyperbolic_matrix(rng, 4, int(rng.integers(0, 5)), non_normal=0.3)
    s = random_orthogonal(rng, 4) @ np.diag(rng.uniform(1.0, 2.0, size=4))
    s_inv = np.linalg.inv(s)
    split = hyperbolic_splitting(a)
    similar = hyperbolic_splitting(s @ a @ s_inv)

    assert similar.k_s == split.k_s
    assert similar.margin == pytest.approx(split.margin, rel=1e-9)
    assert np.allclose(similar.Ps, s @ split.Ps @ s_inv, atol=1e-10)
    assert np.allclose(similar.Pu, s @ split.Pu @ s_inv, atol=1e-10)


def test_contour_projector_agrees_with_schur() -> None:
    a = np.array([[0.5, 3.0], [0.0, 2.0]])
    split = hyperbolic_splitting(a)
    contour = spectral_projector_contour(a)

    assert np.max(np.abs(contour.imag)) < 1e-10
    assert np.max(np.abs(contour.real - split.Ps)) < 1e-8


def test_contour_needs_enough_nodes() -> None:
    with pytest.raises(ValueError):
        spectral_projector_contour(np.diag([0.5, 2.0]), nodes=8)


def test_contour_rejects_non_hyperbolic_matrices() -> None:
    with pytest.raises(HyperbolicityViolation):
        spectral_projector_contour(np.diag([0.5, 1.0]))


def test_recommended_nodes() -> None:
    assert recommended_nodes(0.5) == 256
    assert recommended_nodes(0.01) > 2000


def test_decay_check() -> None:
    a = np.array([[0.5, 1.0], [0.0, 3.0]])
    split = hyperbolic_splitting(a)

    assert decay_check(split, a, 100)
    assert not decay_check(split, a, 2)


def test_restricted_map_on_stable_subspace() -> None:
    a = np.array([[0.5, 1.0], [0.0, 3.0]])
    split = hyperbolic_splitting(a)

    assert np.allclose(restricted_map(a, split.Vs), [[0.5]])
    assert np.allclose(a @ split.Vs, split.Vs @ restricted_map(a, split.Vs), atol=1e-12)


def test_canonical_signs() -> None:
    fixed = canonical_signs(np.array([[0.1, 0.6], [-0.9, -0.8]]))

    assert np.array_equal(fixed, np.array([[-0.1, -0.6], [0.9, 0.8]]))


@pytest.mark.parametrize(
    "value",
    [
        [[1.0, 2.0, 3.0]],
        np.eye(33),
        [[np.nan, 0.0], [0.0, 1.0]],
        [1.0, 2.0],
    ],
)
def test_bad_matrices(value: object) -> None:
    with pytest.raises(MatrixShapeError):
        as_real_matrix(value)
