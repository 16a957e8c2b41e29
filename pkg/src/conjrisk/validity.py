"""Belief assignment by confidence regions and empirical validity testing.

A confidence region assigns belief ``1 - alpha`` to every proposition that
contains it and zero to every other; plausibility is one for propositions
meeting the region and ``alpha`` otherwise. That rule is consonant and, by
the coverage property, the rate at which any false proposition receives
belief ``>= 1 - alpha`` never exceeds ``alpha``.

The harness in this module tests that criterion empirically for arbitrary
belief rules: simulate data at a known truth, evaluate the rule on a family
of false propositions over a grid of levels, and compare the observed
high-belief rates against the levels. Additive rules (posterior mass)
fail the test spectacularly for suitably small excluded neighborhoods;
confidence-region rules pass.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import rng as rngmod
from .detection import ncx2_cdf
from .ellipsoids import Ellipsoid, build_ellipsoid
from .errors import InputValidationError, UnsupportedPropositionError
from .propositions import (
    Ball,
    Complement,
    EllipsoidSet,
    FullSpace,
    HalfSpace,
    Proposition,
    contains_point,
    contains_region,
    intersects_region,
)


def region_belief(
    region: Ellipsoid | Ball, alpha: float, proposition: Proposition
) -> tuple[float, float]:
    """Belief and plausibility a confidence region assigns to a proposition.

    Belief is ``1 - alpha`` when the proposition contains the region and
    zero otherwise; plausibility is one when the proposition meets the
    region and ``alpha`` otherwise. Consonance holds by construction:
    positive belief implies plausibility one.

    Raises:
        UnsupportedPropositionError: when containment or intersection is
            undecidable for the descriptor.
    """
    if not (0.0 <= alpha <= 1.0):
        raise InputValidationError(f"alpha must be in [0, 1], got {alpha}")
    if isinstance(region, Ball):
        region = region.as_ellipsoid()
    belief = 1.0 - alpha if contains_region(proposition, region) else 0.0
    plausibility = 1.0 if intersects_region(proposition, region) else alpha
    return belief, plausibility


class BeliefRule(ABC):
    """A data-conditional belief assignment, indexed by the level ``alpha``.

    ``plausibility`` is derived from belief of the complement, so the
    complementarity identity holds for every rule by construction.
    """

    @abstractmethod
    def belief(self, x: np.ndarray, proposition: Proposition, alpha: float) -> float:
        """Belief in the proposition given data realization ``x``."""

    def plausibility(
        self, x: np.ndarray, proposition: Proposition, alpha: float
    ) -> float:
        return 1.0 - self.belief(x, Complement(proposition), alpha)


class ConfidenceRegionRule(BeliefRule):
    """Belief rule induced by a data-conditional confidence region."""

    def __init__(self, region_builder: Callable[[np.ndarray, float], Ellipsoid]):
        self._build = region_builder

    def belief(self, x, proposition, alpha):
        return region_belief(self._build(np.asarray(x, dtype=float), alpha),
                             alpha, proposition)[0]

    def plausibility(self, x, proposition, alpha):
        return region_belief(self._build(np.asarray(x, dtype=float), alpha),
                             alpha, proposition)[1]


def ksigma_for_level(alpha: float, dim: int) -> float:
    """Sigma multiple whose ellipsoid has coverage ``1 - alpha``."""
    if not (0.0 < alpha < 1.0):
        raise InputValidationError(f"alpha must be in (0, 1), got {alpha}")
    return math.sqrt(2.0 * float(special.gammaincinv(dim / 2.0, 1.0 - alpha)))


def gaussian_region_rule(cov) -> ConfidenceRegionRule:
    """Confidence-region rule for a Gaussian estimator with known covariance.

    At level ``alpha`` the region is the K-sigma ellipsoid centered at the
    realized estimate, with K chosen so the pivot sphere has chi-squared
    mass ``1 - alpha``.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    dim = cov.shape[0]

    def build(x: np.ndarray, alpha: float) -> Ellipsoid:
        return build_ellipsoid(x, cov, ksigma_for_level(alpha, dim))

    return ConfidenceRegionRule(build)


class AdditiveGaussianRule(BeliefRule):
    """Additive epistemic rule: belief is the posterior Gaussian mass.

    Supports full space, half-spaces (any covariance), balls under isotropic
    covariance, and complements thereof. Mass of other shapes is not
    implemented and raises an unsupported-shape error.
    """

    def __init__(self, cov):
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if cov.shape[0] != cov.shape[1]:
            raise InputValidationError("covariance must be square")
        self.cov = cov
        self.dim = cov.shape[0]
        offdiag = cov - np.diag(np.diag(cov))
        diag = np.diag(cov)
        self._isotropic_var = (
            float(diag[0])
            if np.all(np.abs(offdiag) < 1e-15) and np.ptp(diag) < 1e-15 * diag[0]
            else None
        )

    def belief(self, x, proposition, alpha):
        del alpha  # additive rules are not level-indexed
        return self._mass(np.atleast_1d(np.asarray(x, dtype=float)), proposition)

    def _mass(self, x: np.ndarray, prop: Proposition) -> float:
        if isinstance(prop, FullSpace):
            return 1.0
        if isinstance(prop, Complement):
            return 1.0 - self._mass(x, prop.inner)
        if isinstance(prop, HalfSpace):
            spread = math.sqrt(float(prop.normal @ self.cov @ prop.normal))
            return float(
                special.ndtr((prop.offset - float(prop.normal @ x)) / spread)
            )
        if isinstance(prop, Ball):
            if self._isotropic_var is None:
                raise UnsupportedPropositionError(
                    "ball mass implemented only for isotropic covariance"
                )
            sigma = math.sqrt(self._isotropic_var)
            shift = float(np.linalg.norm(prop.center - x)) / sigma
            return ncx2_cdf(self.dim, shift * shift, (prop.radius / sigma) ** 2)
        raise UnsupportedPropositionError(
            f"Gaussian mass not implemented for {type(prop).__name__}"
        )


@dataclass(frozen=True)
class ValidityReport:
    """Per-level empirical rates of high belief on false propositions.

    ``rates[i]`` is the worst rate across the proposition family at
    ``alpha_grid[i]``; the verdict passes when the rate stays within three
    binomial standard errors of the level.
    """

    alpha_grid: tuple[float, ...]
    rates: tuple[float, ...]
    stderrs: tuple[float, ...]
    verdicts: tuple[str, ...]
    n_trials: int
    seed: int
    worst_alpha: float
    worst_proposition_index: int

    def passed(self) -> bool:
        return all(v == "pass" for v in self.verdicts)

    def to_json_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "seed": self.seed,
            "worst_alpha": self.worst_alpha,
            "worst_proposition_index": self.worst_proposition_index,
            "levels": [
                {"alpha": a, "rate": r, "stderr": s, "verdict": v}
                for a, r, s, v in zip(
                    self.alpha_grid, self.rates, self.stderrs, self.verdicts
                )
            ],
        }


def validity_check(
    rule: BeliefRule,
    sampling_model: Callable[[np.random.Generator, int], np.ndarray],
    theta_true,
    proposition_family: Sequence[Proposition],
    alpha_grid: Sequence[float],
    n_trials: int,
    seed: int,
) -> ValidityReport:
    """Empirically test a belief rule against the validity criterion.

    Simulates data realizations at the true parameter, evaluates the rule's
    belief in each (false) proposition, and records how often belief reaches
    ``1 - alpha`` for each level in the grid. A valid rule keeps every such
    rate at or below its level.

    Args:
        rule: belief rule under test.
        sampling_model: callable ``(generator, n) -> (n, dim)`` array of
            data realizations drawn at the true parameter.
        theta_true: true parameter value; every proposition must exclude it.
        proposition_family: false propositions to monitor.
        alpha_grid: levels to test, each in ``[0, 1]``.
        n_trials: simulation size, at least 1000.
        seed: stream seed; trials are split over fixed-size substream blocks.

    Raises:
        InputValidationError: if a proposition contains the true parameter
            (the criterion quantifies over false propositions only).
    """
    theta_true = np.atleast_1d(np.asarray(theta_true, dtype=float))
    if n_trials < 10**3:
        raise InputValidationError(f"n_trials must be >= 1000, got {n_trials}")
    seed = rngmod.validate_seed(seed)
    alphas = [float(a) for a in alpha_grid]
    if not alphas:
        raise InputValidationError("alpha_grid is empty")
    for a in alphas:
        if not (0.0 <= a <= 1.0):
            raise InputValidationError(f"alpha must be in [0, 1], got {a}")
    props = list(proposition_family)
    if not props:
        raise InputValidationError("proposition_family is empty")
    for idx, prop in enumerate(props):
        if contains_point(prop, theta_true):
            raise InputValidationError(
                f"proposition {idx} contains the true parameter; the "
                "validity criterion quantifies over false propositions only"
            )

    hits = np.zeros((len(alphas), len(props)), dtype=np.int64)
    for gen, count in rngmod.blocks(seed, n_trials):
        xs = np.asarray(sampling_model(gen, count), dtype=float)
        if xs.shape[0] != count:
            raise InputValidationError(
                "sampling_model returned wrong number of realizations"
            )
        for x in xs:
            for ia, alpha in enumerate(alphas):
                for ip, prop in enumerate(props):
                    if rule.belief(x, prop, alpha) >= 1.0 - alpha:
                        hits[ia, ip] += 1

    rate_matrix = hits / n_trials
    worst_per_alpha = rate_matrix.max(axis=1)
    excess = rate_matrix - np.asarray(alphas)[:, None]
    worst_flat = int(np.argmax(excess))
    worst_ia, worst_ip = divmod(worst_flat, len(props))

    rates, stderrs, verdicts = [], [], []
    for alpha, rate in zip(alphas, worst_per_alpha):
        stderr = math.sqrt(rate * (1.0 - rate) / n_trials)
        rates.append(float(rate))
        stderrs.append(stderr)
        verdicts.append("pass" if rate <= alpha + 3.0 * stderr else "fail")
    return ValidityReport(
        alpha_grid=tuple(alphas),
        rates=tuple(rates),
        stderrs=tuple(stderrs),
        verdicts=tuple(verdicts),
        n_trials=int(n_trials),
        seed=seed,
        worst_alpha=alphas[worst_ia],
        worst_proposition_index=worst_ip,
    )


def gaussian_sampling_model(theta_true, cov):
    """Sampling model drawing estimates from ``normal(theta_true, cov)``."""
    theta_true = np.atleast_1d(np.asarray(theta_true, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    chol = np.linalg.cholesky(cov)

    def draw(gen: np.random.Generator, n: int) -> np.ndarray:
        return theta_true + gen.standard_normal((n, theta_true.size)) @ chol.T

    return draw
