import math
from dataclasses import replace
from typing import Callable

import numpy as np
import pytest

from dichotomy.linear import adjoint_apply
from dichotomy.linear import adjoint_recurrence
from dichotomy.linear import apply_operator
from dichotomy.linear import assemble_truncated
from dichotomy.linear import check_A3
from dichotomy.linear import check_A5
from dichotomy.linear import fredholm_index
from dichotomy.linear import half_line_apply
from dichotomy.linear import kernel_diagnostics
from dichotomy.linear import left_half_line_right_inverse
from dichotomy.linear import pairing
from dichotomy.linear import right_inverse_apply
from dichotomy.linear import splice_check
from dichotomy.linear import WindowTooSmallError
from dichotomy.mesh import make_circle_mesh
from dichotomy.mesh import ParameterPoint
from dichotomy.models import build_counterexample
from dichotomy.models import build_random
from dichotomy.models import build_torus_example
from dichotomy.models import random_hyperbolic_matrix
from dichotomy.nonlinear import NonlinearFamily
from dichotomy.spectral import RealMatrix

PI = ParameterPoint((math.pi,))
ZERO = ParameterPoint((0.0,))
GENERIC = ParameterPoint((0.3,))


def test_fredholm_index() -> None:
    assert fredholm_index(build_torus_example().linearization, PI) == 0
    assert fredholm_index(build_counterexample().linearization, GENERIC) == 0
    asymmetric = build_random(seed=1, N=3, k_plus=1, k_minus=2, decay=0.5)
    assert fredholm_index(asymmetric, GENERIC) == -1


def test_truncation_shape_matches_index() -> None:
    torus = assemble_truncated(build_torus_example().linearization, ZERO, M=10)
    fam = build_random(seed=1, N=3, k_plus=1, k_minus=2, decay=0.25)
    skewed = assemble_truncated(fam, GENERIC, M=fam.decay_probe)

    assert (torus.rows, torus.cols) == (42, 42)
    assert torus.bc_plus_rank == 1
    assert torus.bc_minus_rank == 1
    assert skewed.cols - skewed.rows == fredholm_index(fam, GENERIC)


def test_window_must_reach_decay_probe() -> None:
    with pytest.raises(WindowTooSmallError):
        assemble_truncated(build_torus_example().linearization, ZERO, M=4)


def test_torus_kernel_only_at_minus_one() -> None:
    lin = build_torus_example().linearization

    at_pi = kernel_diagnostics(assemble_truncated(lin, PI, M=12))
    at_zero = kernel_diagnostics(assemble_truncated(lin, ZERO, M=12))

    assert at_pi.kernel_dim == 1
    assert at_pi.kernel_basis.shape == (50, 1)
    assert at_pi.gap_ratio < 1e-3
    assert at_zero.kernel_dim == 0
    assert at_zero.sigma_min > 1e-3
    assert at_zero.gap_ratio == float("inf")


def test_torus_kernel_is_homoclinic() -> None:
    lin = build_torus_example().linearization
    diag = kernel_diagnostics(assemble_truncated(lin, PI, M=12))
    x = diag.kernel_basis[:, 0].reshape(25, 2)
    peak = float(np.max(np.abs(x)))

    assert float(np.max(np.abs(apply_operator(lin, PI, x)))) < 1e-12
    assert abs(x[12, 1]) == pytest.approx(peak)
    assert float(np.max(np.abs(x[[0, -1]]))) < 1e-3 * peak


def test_counterexample_kernel_for_every_parameter() -> None:
    lin = build_counterexample().linearization
    diag = kernel_diagnostics(assemble_truncated(lin, GENERIC, M=12))
    x = diag.kernel_basis[:, 0].reshape(25, 4)
    x = x / x[12, 2]

    assert diag.kernel_dim == 1
    assert float(np.max(np.abs(x[:, [0, 1, 3]]))) < 1e-12
    expected = np.array([2.0 ** (-abs(n)) for n in range(-12, 13)])
    assert np.allclose(x[:, 2], expected, atol=1e-12)


@pytest.mark.parametrize(
    "build, lam, dim",
    [
        (build_torus_example, PI, 1),
        (build_torus_example, ZERO, 0),
        (build_counterexample, GENERIC, 1),
    ],
)
def test_kernel_dimension_is_stable_under_window_doubling(
    build: Callable[[], NonlinearFamily], lam: ParameterPoint, dim: int
) -> None:
    lin = build().linearization

    for M in (30, 60):
        diag = kernel_diagnostics(assemble_truncated(lin, lam, M))
        x = diag.kernel_basis.T.reshape(dim, 2 * M + 1, lin.N)
        peaks = np.max(np.linalg.norm(x, axis=2), axis=1)
        edges = np.maximum(
            np.linalg.norm(x[:, 0], axis=1), np.linalg.norm(x[:, -1], axis=1)
        )

        assert diag.kernel_dim == dim
        assert np.all(edges <= 1e-6 * peaks)


def test_wide_operator_has_kernel() -> None:
    fam = build_random(seed=2, N=3, k_plus=2, k_minus=1, decay=0.25)
    diag = kernel_diagnostics(assemble_truncated(fam, GENERIC, M=fam.decay_probe))

    assert diag.kernel_dim >= 1
    assert diag.sigma_min == 0.0


def test_rank_tolerance_range() -> None:
    op = assemble_truncated(build_torus_example().linearization, ZERO, M=10)

    with pytest.raises(ValueError):
        kernel_diagnostics(op, rank_tol=0.1)
    with pytest.raises(ValueError):
        kernel_diagnostics(op, rank_tol=0.0)


def test_check_A3() -> None:
    profile = check_A3(build_torus_example().linearization, PI, horizon=12)
    fam = build_random(seed=3, N=3, k_plus=1, k_minus=1, decay=0.25)
    decaying = check_A3(fam, GENERIC, horizon=fam.decay_probe + 5)

    assert profile.passed
    assert profile.deviation == 0.0
    assert profile.margin_plus == pytest.approx(0.5)
    assert (profile.k_s_plus, profile.k_s_minus) == (1, 1)
    assert decaying.passed
    assert 0.0 < decaying.deviation < 1e-8
    with pytest.raises(WindowTooSmallError):
        check_A3(fam, GENERIC, horizon=fam.decay_probe - 1)


def test_check_A3_with_non_finite_coefficients() -> None:
    lin = build_torus_example().linearization

    def a_n(n: int, lam: ParameterPoint) -> RealMatrix:
        return np.full((2, 2), np.nan) if n == 30 else lin.a_n(n, lam)

    profile = check_A3(replace(lin, a_n=a_n), PI, horizon=40)

    assert profile.deviation == float("inf")
    assert not profile.passed


def test_check_A5() -> None:
    mesh = make_circle_mesh(16)
    regular = check_A5(build_torus_example().linearization, mesh, M=12)

    assert regular is not None
    assert regular.theta != (math.pi,)
    counter = build_counterexample().linearization
    assert check_A5(counter, make_circle_mesh(8), M=12) is None


def test_right_inverse() -> None:
    rng = np.random.default_rng(7)
    a = random_hyperbolic_matrix(rng, 4, 2, non_normal=0.5)
    x = rng.uniform(-1.0, 1.0, size=(41, 4))
    solution = right_inverse_apply(a, x)

    assert np.allclose(half_line_apply(a, solution), x[:-1], atol=1e-8)
    assert np.array_equal(right_inverse_apply(a, np.zeros((41, 4))), np.zeros((41, 4)))


def test_right_inverse_all_stable() -> None:
    a = np.array([[0.5, 0.2], [0.0, -0.3]])
    x = np.ones((21, 2))
    solution = right_inverse_apply(a, x)

    assert np.array_equal(solution[0], np.zeros(2))
    assert np.allclose(half_line_apply(a, solution), x[:-1], atol=1e-12)


def test_left_half_line_right_inverse() -> None:
    rng = np.random.default_rng(8)
    a = random_hyperbolic_matrix(rng, 3, 1)
    x = rng.uniform(-1.0, 1.0, size=(31, 3))
    z = left_half_line_right_inverse(a, x)

    assert np.allclose(z[:-1] - z[1:] @ np.linalg.inv(a).T, x[1:], atol=1e-8)


def test_splice_check() -> None:
    rng = np.random.default_rng(9)
    counterexample = build_counterexample().linearization
    fam = build_random(seed=4, N=3, k_plus=1, k_minus=1, decay=0.5)
    x4 = rng.standard_normal((25, 4))
    x3 = rng.standard_normal((25, 3))
    limits = {True: fam.a_plus(GENERIC), False: fam.a_minus(GENERIC)}
    remainder = max(
        float(np.max(np.abs((fam.a_n(n, GENERIC) - limits[n >= 0]) @ x3[n + 12])))
        for n in range(-12, 12)
    )

    assert splice_check(counterexample, GENERIC, x4) <= 1e-12
    assert splice_check(counterexample, GENERIC, np.zeros((25, 4))) == 0.0
    assert splice_check(fam.piecewise(), GENERIC, x3) <= 1e-12
    assert remainder > 1e-3
    assert splice_check(fam, GENERIC, x3) == pytest.approx(remainder, rel=1e-9)


def test_splice_check_sees_a_wrong_limit() -> None:
    rng = np.random.default_rng(15)
    fam = build_random(seed=4, N=3, k_plus=1, k_minus=1, decay=0.5).piecewise()
    shifted = replace(fam, a_plus=lambda lam: fam.a_plus(lam) + 1e-3 * np.eye(3))
    x = rng.standard_normal((25, 3))

    expected = 1e-3 * float(np.max(np.abs(x[12:24])))

    assert splice_check(shifted, GENERIC, x) == pytest.approx(expected, rel=1e-6)


def test_adjoint_pairing() -> None:
    rng = np.random.default_rng(10)
    lin = build_counterexample().linearization
    x = rng.standard_normal((25, 4))
    y = rng.standard_normal((24, 4))

    assert pairing(apply_operator(lin, GENERIC, x), y) == pytest.approx(
        pairing(x, adjoint_apply(lin, GENERIC, y)), abs=1e-10
    )


def test_adjoint_recurrence_weights() -> None:
    lin = build_counterexample().linearization
    M = 12
    y = adjoint_recurrence(lin, GENERIC, [0.0, 0.0, 0.0, 1.0], M)

    assert y.shape == (24, 4)
    assert np.all(y[:, 3] > 0.0)
    for n in range(0, M):
        assert y[M + n, 3] == pytest.approx(2.0 ** (-n), rel=1e-12)
    for n in range(-M, 0):
        assert y[M + n, 3] == pytest.approx(2.0 ** (n + 2), rel=1e-12)
    assert float(np.max(np.abs(y[:, :3]))) < 1e-14


def test_adjoint_recurrence_solves_dual_equation() -> None:
    lin = build_counterexample().linearization
    M = 12
    y = adjoint_recurrence(lin, GENERIC, [0.0, 0.0, 0.0, 1.0], M)
    dual = adjoint_apply(lin, GENERIC, y)

    assert dual.shape == (25, 4)
    assert float(np.max(np.abs(dual[1 : 2 * M]))) < 1e-12


def test_piecewise_family_uses_limits() -> None:
    fam = build_random(seed=5, N=2, k_plus=1, k_minus=1, decay=0.5)
    piecewise = fam.piecewise()

    assert np.array_equal(piecewise.a_n(3, GENERIC), fam.a_plus(GENERIC))
    assert np.array_equal(piecewise.a_n(-1, GENERIC), fam.a_minus(GENERIC))
    assert not np.array_equal(fam.a_n(3, GENERIC), fam.a_plus(GENERIC))
