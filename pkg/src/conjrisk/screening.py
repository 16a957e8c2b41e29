"""Conjunction screening with K-sigma position ellipsoids.

Each object's position uncertainty is rendered as a K-sigma ellipsoid; a
maneuver is indicated when the minimum distance between the two ellipsoids
is at most the combined hard-body radius. The per-object confidence is the
chi-squared mass inside radius K; joint confidence combines the two objects
under independence and, dependence-free, under the Frechet bound. Screening
on overlap then caps the long-run rate of missed collisions at twice the
per-object miss level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .ellipsoids import Ellipsoid, build_ellipsoid, min_distance
from .errors import InputValidationError
from .geometry import JointState

__all__ = [
    "ScreeningDecision",
    "ksigma_confidence",
    "joint_confidence",
    "screen_conjunction",
]


def ksigma_confidence(k: float, dim: int) -> float:
    """Coverage probability of a K-sigma ellipsoid in ``dim`` dimensions.

    The chi-squared CDF with ``dim`` degrees of freedom evaluated at
    ``k**2``; strictly increasing in ``k``. For ``dim == 2`` this equals
    ``1 - exp(-k^2 / 2)``.
    """
    if not (k > 0.0 and math.isfinite(k)):
        raise InputValidationError(f"k must be positive, got {k}")
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise InputValidationError(f"dim must be an integer >= 1, got {dim}")
    return float(special.gammainc(dim / 2.0, k * k / 2.0))


def joint_confidence(alpha: float) -> tuple[float, float]:
    """Joint two-object coverage: independence value and Frechet bound.

    Returns ``((1 - alpha)^2, max(0, 1 - 2 alpha))``. The Frechet bound
    holds under arbitrary dependence between the two objects' tracking data
    and is never above the independence value.
    """
    if not (0.0 <= alpha <= 1.0):
        raise InputValidationError(f"alpha must be in [0, 1], got {alpha}")
    return (1.0 - alpha) ** 2, max(0.0, 1.0 - 2.0 * alpha)


@dataclass(frozen=True)
class ScreeningDecision:
    """Outcome of a K-sigma ellipsoid screen for one conjunction."""

    min_distance: float            # m, between the two position ellipsoids
    overlap: bool                  # min_distance <= combined radius
    k: float
    per_object_confidence: float   # 1 - alpha
    joint_confidence_independent: float
    joint_confidence_frechet: float
    collision_risk_cap: float      # 2 alpha

    def __post_init__(self):
        if not (
            self.joint_confidence_frechet
            <= self.joint_confidence_independent + 1e-15
            <= self.per_object_confidence + 2e-15
        ):
            raise InputValidationError(
                "joint confidences must be ordered frechet <= independent "
                "<= per-object"
            )

    def to_json_dict(self) -> dict:
        """Wire representation of the decision."""
        return {
            "min_distance_m": self.min_distance,
            "overlap": self.overlap,
            "k": self.k,
            "confidence": self.per_object_confidence,
            "joint_confidence": self.joint_confidence_independent,
            "frechet_bound": self.joint_confidence_frechet,
            "risk_cap": self.collision_risk_cap,
        }


def position_ellipsoids(js: JointState, k: float) -> tuple[Ellipsoid, Ellipsoid]:
    """K-sigma position ellipsoids for the two objects of a joint state.

    Each ellipsoid is built from that object's own 3x3 position covariance
    block; cross-covariance between the objects is not used for region
    construction (the Frechet bound covers arbitrary dependence).
    """
    cov1 = js.c_theta[0:3, 0:3]
    cov2 = js.c_theta[6:9, 6:9]
    for label, block in (("object 1", cov1), ("object 2", cov2)):
        if np.linalg.eigvalsh(block)[0] <= 0.0:
            raise InputValidationError(
                f"{label} position covariance block is not positive definite"
            )
    return (
        build_ellipsoid(js.theta_hat[0:3], cov1, k),
        build_ellipsoid(js.theta_hat[6:9], cov2, k),
    )


def screen_conjunction(js: JointState, k: float) -> ScreeningDecision:
    """Decide maneuver need from K-sigma position-ellipsoid overlap.

    Overlap accounts for the physical sizes: the screen fires when the
    minimum distance between the uncertainty ellipsoids does not exceed the
    combined hard-body radius.
    """
    e1, e2 = position_ellipsoids(js, k)
    gap = min_distance(e1, e2)
    confidence = ksigma_confidence(k, 3)
    alpha = 1.0 - confidence
    independent, frechet = joint_confidence(alpha)
    return ScreeningDecision(
        min_distance=gap,
        overlap=bool(gap <= js.r_combined),
        k=float(k),
        per_object_confidence=confidence,
        joint_confidence_independent=independent,
        joint_confidence_frechet=frechet,
        collision_risk_cap=2.0 * alpha,
    )
