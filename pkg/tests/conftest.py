"""Shared test helpers: random generators and independent oracles.

The oracles here deliberately avoid the code paths they check: collision
probability is counted from raw normal samples against the disk condition,
relative covariance is recomputed with the explicit difference matrix, and
ellipsoid distance is minimized over densely sampled boundary points with a
derivative-free local refinement.
"""

from __future__ import annotations

import numpy as np
from scipy import optimize

from conjrisk import Ellipsoid, JointState


def random_rotation(rng: np.random.Generator, n: int = 3) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_spd(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return scale * (a @ a.T + n * np.eye(n))


def make_joint_state(
    rng: np.random.Generator,
    pos_scale: float = 1000.0,
    cov_scale: float = 100.0,
    r1: float = 5.0,
    r2: float = 5.0,
) -> JointState:
    theta = np.concatenate(
        [
            rng.uniform(-pos_scale, pos_scale, 3),
            rng.uniform(-50.0, 50.0, 3),
            rng.uniform(-pos_scale, pos_scale, 3),
            rng.uniform(-50.0, 50.0, 3) + np.array([0.0, 0.0, 7000.0]),
        ]
    )
    cov = random_spd(rng, 12, cov_scale)
    return JointState(theta_hat=theta, c_theta=cov, r1=r1, r2=r2)


# explicit relative-displacement difference matrix (3x12)
DIFFERENCE_MATRIX = np.zeros((3, 12))
for _i in range(3):
    DIFFERENCE_MATRIX[_i, _i] = -1.0
    DIFFERENCE_MATRIX[_i, 6 + _i] = 1.0


def mc_pc_oracle(
    u: float,
    v: float,
    s1: float,
    s2: float,
    r: float,
    n: int = 10**6,
    seed: int = 0,
    chunk: int = 2_500_000,
) -> tuple[float, float]:
    """Count standard-normal samples inside the offset disk condition.

    Returns the sample fraction and its binomial standard error.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    hits, done = 0, 0
    while done < n:
        m = min(chunk, n - done)
        xi = rng.standard_normal((m, 2))
        cond = (s1 * xi[:, 0] - u) ** 2 + (s2 * xi[:, 1] - v) ** 2 <= r * r
        hits += int(np.count_nonzero(cond))
        done += m
    p = hits / n
    return p, float(np.sqrt(p * (1.0 - p) / n))


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / n)
    theta = np.pi * (1.0 + 5.0**0.5) * i
    return np.stack(
        [np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)],
        axis=1,
    )


def _boundary_cloud(e: Ellipsoid, n: int) -> np.ndarray:
    return e.center + (fibonacci_sphere(n) * e.semi_lengths) @ e.axes.T


def dense_min_distance_oracle(e1: Ellipsoid, e2: Ellipsoid, n: int = 1000) -> float:
    """Minimum over n*n boundary point pairs, refined by local descent."""
    p1 = _boundary_cloud(e1, n)
    p2 = _boundary_cloud(e2, n)
    d2 = np.sum((p1[:, None, :] - p2[None, :, :]) ** 2, axis=2)
    i, j = np.unravel_index(int(np.argmin(d2)), d2.shape)

    def boundary_point(e: Ellipsoid, angles) -> np.ndarray:
        th, ph = angles
        u = np.array(
            [np.cos(th) * np.sin(ph), np.sin(th) * np.sin(ph), np.cos(ph)]
        )
        return e.center + (u * e.semi_lengths) @ e.axes.T

    def angles_of(e: Ellipsoid, point) -> tuple[float, float]:
        u = (e.axes.T @ (point - e.center)) / e.semi_lengths
        return float(np.arctan2(u[1], u[0])), float(np.arccos(np.clip(u[2], -1, 1)))

    x0 = np.array([*angles_of(e1, p1[i]), *angles_of(e2, p2[j])])
    result = optimize.minimize(
        lambda x: float(
            np.linalg.norm(boundary_point(e1, x[:2]) - boundary_point(e2, x[2:]))
        ),
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000, "maxfev": 20000},
    )
    return float(result.fun)


def random_ellipsoid(
    rng: np.random.Generator,
    dim: int = 3,
    semi_lo: float = 0.3,
    semi_hi: float = 3.0,
    center=None,
) -> Ellipsoid:
    if center is None:
        center = np.zeros(dim)
    return Ellipsoid(
        center=np.asarray(center, dtype=float),
        axes=random_rotation(rng, dim),
        semi_lengths=rng.uniform(semi_lo, semi_hi, dim),
    )


def separated_ellipsoid_pair(
    rng: np.random.Generator,
    min_factor: float = 1.02,
    max_factor: float = 2.0,
) -> tuple[Ellipsoid, Ellipsoid]:
    """Random pair guaranteed disjoint via the bounding-sphere separation."""
    e1 = random_ellipsoid(rng)
    shape2 = random_ellipsoid(rng)
    gap = (e1.bounding_radius + shape2.bounding_radius) * rng.uniform(
        min_factor, max_factor
    )
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    e2 = Ellipsoid(
        center=e1.center + gap * direction,
        axes=shape2.axes,
        semi_lengths=shape2.semi_lengths,
    )
    return e1, e2
