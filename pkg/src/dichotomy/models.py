"""
Built-in families: the torus example with its Moebius stable bundle, the
four-dimensional family violating the invertibility assumption, random
asymptotically hyperbolic families and tabulated linear families.
"""
import logging
import math
from typing import Any
from typing import Dict
from typing import Mapping

import numpy as np

from dichotomy.config import ConfigError
from dichotomy.config import ModelSpec
from dichotomy.linear import LinearFamily
from dichotomy.mesh import ParameterPoint
from dichotomy.nonlinear import NonlinearFamily
from dichotomy.nonlinear import Vector
from dichotomy.spectral import as_real_matrix
from dichotomy.spectral import DichotomyError
from dichotomy.spectral import RealMatrix

logger = logging.getLogger(__name__)

BUILTIN_DECAY_PROBE = 10
DEFAULT_QUADRATIC_COEFFICIENT = 0.05

STABLE_RANGE = (0.2, 0.8)
UNSTABLE_RANGE = (1.25, 5.0)
PERTURBATION_SCALE = 0.1


class BadRanksError(DichotomyError, ValueError):
    """Raised when requested stable ranks or decay rates are out of range."""


def torus_matrix(theta_sum: float) -> RealMatrix:
    """The symmetric matrix with eigenvalues 1/2 and 2 whose stable line is
    spanned by (cos(s/2), sin(s/2)), s = theta_1 + ... + theta_k."""
    half = theta_sum / 2.0
    off = -0.75 * math.sin(theta_sum)
    return np.array(
        [
            [0.5 + 1.5 * math.sin(half) ** 2, off],
            [off, 0.5 + 1.5 * math.cos(half) ** 2],
        ]
    )


def build_torus_example(
    k: int = 1, c: float = DEFAULT_QUADRATIC_COEFFICIENT
) -> NonlinearFamily:
    """x_{n+1} = a_n(lambda) x_n + c (x_2^2, x_1^2) with a_n = a(lambda) for
    n >= 0 and a(1, ..., 1) = diag(1/2, 2) for n < 0. ``c = 0`` is the
    linear case whose only bifurcation point is lambda = -1."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if abs(c) > 1.0:
        raise ValueError(f"|c| must not exceed 1, got {c}")
    base = torus_matrix(0.0)

    def a_plus(lam: ParameterPoint) -> RealMatrix:
        return torus_matrix(lam.theta_sum)

    def a_minus(lam: ParameterPoint) -> RealMatrix:
        return base.copy()

    def a_n(n: int, lam: ParameterPoint) -> RealMatrix:
        return a_plus(lam) if n >= 0 else a_minus(lam)

    linearization = LinearFamily(
        N=2,
        k=k,
        a_n=a_n,
        a_plus=a_plus,
        a_minus=a_minus,
        decay_probe=BUILTIN_DECAY_PROBE,
    )

    def f_n(n: int, lam: ParameterPoint, x: Vector) -> Vector:
        return a_n(n, lam) @ x + c * np.array([x[1] ** 2, x[0] ** 2])

    def Df_n(n: int, lam: ParameterPoint, x: Vector) -> RealMatrix:
        return a_n(n, lam) + c * np.array([[0.0, 2.0 * x[1]], [2.0 * x[0], 0.0]])

    return NonlinearFamily(
        N=2, k=k, f_n=f_n, Df_n=Df_n, linearization=linearization, name="torus_example"
    )


def build_counterexample(k: int = 1) -> NonlinearFamily:
    """The 4x4 family with h_n(lambda, x) = (0, 0, 0, |x|^2): every
    assumption but the invertibility one holds and w_1 differs at +-inf,
    yet the only homoclinic solution is x = 0."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    minus_limit = np.diag([0.5, 2.0, 2.0, 0.5])
    e4 = np.array([0.0, 0.0, 0.0, 1.0])

    def a_plus(lam: ParameterPoint) -> RealMatrix:
        a = np.zeros((4, 4))
        a[:2, :2] = torus_matrix(lam.theta_sum)
        a[2, 2] = 0.5
        a[3, 3] = 2.0
        return a

    def a_minus(lam: ParameterPoint) -> RealMatrix:
        return minus_limit.copy()

    def a_n(n: int, lam: ParameterPoint) -> RealMatrix:
        return a_plus(lam) if n >= 0 else a_minus(lam)

    linearization = LinearFamily(
        N=4,
        k=k,
        a_n=a_n,
        a_plus=a_plus,
        a_minus=a_minus,
        decay_probe=BUILTIN_DECAY_PROBE,
    )

    def f_n(n: int, lam: ParameterPoint, x: Vector) -> Vector:
        return a_n(n, lam) @ x + float(x @ x) * e4

    def Df_n(n: int, lam: ParameterPoint, x: Vector) -> RealMatrix:
        return a_n(n, lam) + np.outer(e4, 2.0 * x)

    return NonlinearFamily(
        N=4,
        k=k,
        f_n=f_n,
        Df_n=Df_n,
        linearization=linearization,
        name="counterexample_A5",
    )


def random_orthogonal(rng: np.random.Generator, N: int) -> RealMatrix:
    q, r = np.linalg.qr(rng.standard_normal((N, N)))
    return np.asarray(q * np.sign(np.diag(r)), dtype=np.float64)


def random_hyperbolic_matrix(
    rng: np.random.Generator, N: int, k_s: int, non_normal: float = 0.0
) -> RealMatrix:
    """Q (diag(mu) + U) Q^T with k_s moduli in STABLE_RANGE, the rest in
    UNSTABLE_RANGE and random signs. U is strictly upper triangular with
    entries of size at most ``non_normal`` and leaves the spectrum alone."""
    if not 0 <= k_s <= N:
        raise BadRanksError(f"stable rank {k_s} outside 0..{N}")
    moduli = np.concatenate(
        [
            rng.uniform(*STABLE_RANGE, size=k_s),
            rng.uniform(*UNSTABLE_RANGE, size=N - k_s),
        ]
    )
    eigenvalues = moduli * rng.choice([-1.0, 1.0], size=N)
    core = np.diag(eigenvalues)
    if non_normal > 0.0:
        core += np.triu(rng.uniform(-non_normal, non_normal, size=(N, N)), 1)
    q = random_orthogonal(rng, N)
    return np.asarray(q @ core @ q.T, dtype=np.float64)


def _plane_rotation(generator: RealMatrix, angle: float) -> RealMatrix:
    # generator = u v^T - v u^T with orthonormal u, v
    return np.asarray(
        np.eye(generator.shape[0])
        + math.sin(angle) * generator
        + (1.0 - math.cos(angle)) * generator @ generator,
        dtype=np.float64,
    )


def build_random(
    seed: int,
    N: int,
    k_plus: int,
    k_minus: int,
    decay: float,
    k: int = 1,
) -> LinearFamily:
    """Random family a_n(lambda) = R a_+- R^T + decay^|n| E_+- with limits
    from random_hyperbolic_matrix and R a rotation by theta_1 + ... + theta_k
    in a random plane. Deterministic in ``seed``."""
    if N < 1 or not 0 <= k_plus <= N or not 0 <= k_minus <= N:
        raise BadRanksError(f"ranks ({k_plus}, {k_minus}) invalid for N={N}")
    if not 0.0 < decay < 1.0:
        raise BadRanksError(f"decay must lie in (0, 1), got {decay}")
    rng = np.random.default_rng(seed)
    limit_plus = random_hyperbolic_matrix(rng, N, k_plus)
    limit_minus = random_hyperbolic_matrix(rng, N, k_minus)
    scale = PERTURBATION_SCALE
    perturbation_plus = rng.uniform(-scale, scale, size=(N, N))
    perturbation_minus = rng.uniform(-scale, scale, size=(N, N))
    if N >= 2:
        basis = random_orthogonal(rng, N)
        u, v = basis[:, 0], basis[:, 1]
        generator = np.outer(u, v) - np.outer(v, u)
    else:
        generator = np.zeros((1, 1))

    def conjugate(limit: RealMatrix, lam: ParameterPoint) -> RealMatrix:
        rotation = _plane_rotation(generator, lam.theta_sum)
        return np.asarray(rotation @ limit @ rotation.T, dtype=np.float64)

    def a_plus(lam: ParameterPoint) -> RealMatrix:
        return conjugate(limit_plus, lam)

    def a_minus(lam: ParameterPoint) -> RealMatrix:
        return conjugate(limit_minus, lam)

    def a_n(n: int, lam: ParameterPoint) -> RealMatrix:
        if n >= 0:
            return a_plus(lam) + decay**n * perturbation_plus
        return a_minus(lam) + decay ** (-n) * perturbation_minus

    probe = math.ceil(math.log(1e-10) / math.log(decay))
    return LinearFamily(
        N=N, k=k, a_n=a_n, a_plus=a_plus, a_minus=a_minus, decay_probe=probe
    )


def build_tabulated(
    plus: Any, minus: Any, overrides: Mapping[int, Any], k: int = 1
) -> LinearFamily:
    """Lambda-independent family with limits ``plus``/``minus`` and finitely
    many explicit matrices a_n from ``overrides``."""
    a_plus_matrix = as_real_matrix(plus)
    a_minus_matrix = as_real_matrix(minus)
    if a_plus_matrix.shape != a_minus_matrix.shape:
        raise ValueError("limits have different shapes")
    table: Dict[int, RealMatrix] = {}
    for n, matrix in overrides.items():
        value = as_real_matrix(matrix)
        if value.shape != a_plus_matrix.shape:
            raise ValueError(
                f"a_{n} has shape {value.shape}, limits {a_plus_matrix.shape}"
            )
        table[int(n)] = value

    def a_plus(lam: ParameterPoint) -> RealMatrix:
        return a_plus_matrix.copy()

    def a_minus(lam: ParameterPoint) -> RealMatrix:
        return a_minus_matrix.copy()

    def a_n(n: int, lam: ParameterPoint) -> RealMatrix:
        if n in table:
            return table[n].copy()
        return a_plus(lam) if n >= 0 else a_minus(lam)

    probe = max((abs(n) + 1 for n in table), default=1)
    return LinearFamily(
        N=int(a_plus_matrix.shape[0]),
        k=k,
        a_n=a_n,
        a_plus=a_plus,
        a_minus=a_minus,
        decay_probe=probe,
    )


def _param(model: ModelSpec, key: str, default: Any = None) -> Any:
    if key in model.params:
        return model.params[key]
    if default is None:
        raise ConfigError(f"model {model.name} requires parameter {key!r}")
    return default


def build_model(model: ModelSpec) -> NonlinearFamily:
    """Builds the family named by ``model``.

    Raises ConfigError when a required parameter is missing or invalid.
    """
    logger.debug(
        "building model %s with k=%d params=%s", model.name, model.k, model.params
    )
    try:
        if model.name == "torus_example":
            c = float(_param(model, "c", DEFAULT_QUADRATIC_COEFFICIENT))
            return build_torus_example(model.k, c)
        if model.name == "counterexample_A5":
            return build_counterexample(model.k)
        if model.name == "random_asymptotic":
            linear = build_random(
                seed=int(_param(model, "seed", 0)),
                N=int(_param(model, "N", 3)),
                k_plus=int(_param(model, "k_plus", 1)),
                k_minus=int(_param(model, "k_minus", 1)),
                decay=float(_param(model, "decay", 0.5)),
                k=model.k,
            )
            return NonlinearFamily.from_linear(linear, name="random_asymptotic")
        linear = build_tabulated(
            _param(model, "plus"),
            _param(model, "minus"),
            _param(model, "overrides", {}),
            k=model.k,
        )
        return NonlinearFamily.from_linear(linear, name="tabulated")
    except (ValueError, TypeError) as error:
        if isinstance(error, ConfigError):
            raise
        raise ConfigError(f"invalid parameters for {model.name}: {error}") from error
