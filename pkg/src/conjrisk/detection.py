"""Aleatory performance of epistemic collision-probability thresholds.

If tracking data were redrawn, the observed displacement-to-uncertainty
ratio would follow the square root of a noncentral chi-squared law with two
degrees of freedom. Combining that law with the threshold applied to the
computed collision probability gives the real-world rate at which an
impending collision is detected, or missed, as a function of data quality.

Also provides a one-dimensional constructive demonstration that an additive
belief function is guaranteed to assign high belief to a suitably chosen
false proposition, no matter the realized data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from . import rng as rngmod
from .errors import InputValidationError
from .geometry import StandardizedEncounter
from .probability import max_pc_head_on, pc_circular, pc_circular_batch

_POISSON_TAIL = 1e-13
_SEMI_ANALYTIC = "semi-analytic"
_MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class ThresholdPolicy:
    """Lower/upper probability thresholds used for conjunction triage.

    Defaults are the operational values: conjunctions above ``upper`` are
    treated as high risk, those below ``lower`` are ignored.
    """

    lower: float = 1e-7
    upper: float = 4.4e-4

    def __post_init__(self):
        if not (0.0 < self.lower < self.upper < 1.0):
            raise InputValidationError(
                f"need 0 < lower < upper < 1, got ({self.lower}, {self.upper})"
            )


@dataclass(frozen=True, eq=False)
class DetectionCurve:
    """Failure-to-detect probability versus epistemic threshold.

    ``points`` is an ascending-threshold sequence of
    ``(threshold, failure_probability)`` pairs; ``method`` records which
    evaluation path produced it. ``seed`` is set for the Monte Carlo path.
    """

    s_over_r: float
    d_true_over_r: float
    points: tuple[tuple[float, float], ...]
    method: str
    seed: int | None = None


@dataclass(frozen=True)
class FalseConfidenceReport:
    """Outcome of the additive-belief false-confidence simulation."""

    alpha: float
    p_target: float
    neighborhood_halfwidth: float
    empirical_rate: float
    n_trials: int
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.empirical_rate <= 1.0):
            raise InputValidationError(
                f"empirical_rate must be in [0, 1], got {self.empirical_rate}"
            )


def ncx2_cdf(dof: int, noncentrality: float, x: float) -> float:
    """CDF of the noncentral chi-squared distribution.

    Evaluated as the Poisson-weighted series of central chi-squared CDFs,
    started at the Poisson mode and expanded outward until the remaining
    weight is below ``1e-13``.

    Args:
        dof: degrees of freedom, >= 1.
        noncentrality: noncentrality parameter, >= 0.
        x: evaluation point, >= 0.
    """
    if not (isinstance(dof, (int, np.integer)) and dof >= 1):
        raise InputValidationError(f"dof must be an integer >= 1, got {dof}")
    if not (math.isfinite(noncentrality) and noncentrality >= 0.0):
        raise InputValidationError(
            f"noncentrality must be finite and >= 0, got {noncentrality}"
        )
    if not (math.isfinite(x) and x >= 0.0):
        raise InputValidationError(f"x must be finite and >= 0, got {x}")
    if x == 0.0:
        return 0.0
    half_lam = noncentrality / 2.0
    half_x = x / 2.0
    if half_lam == 0.0:
        return float(special.gammainc(dof / 2.0, half_x))

    mode = int(half_lam)
    log_w_mode = -half_lam + mode * math.log(half_lam) - math.lgamma(mode + 1)
    w_mode = math.exp(log_w_mode)

    total = w_mode * float(special.gammainc(dof / 2.0 + mode, half_x))
    acc_weight = w_mode

    # expand downward then upward from the mode; weights decay both ways
    w = w_mode
    for j in range(mode - 1, -1, -1):
        w *= (j + 1) / half_lam
        if w == 0.0:
            break
        acc_weight += w
        total += w * float(special.gammainc(dof / 2.0 + j, half_x))
    w = w_mode
    j = mode
    while 1.0 - acc_weight >= _POISSON_TAIL and w > 0.0:
        j += 1
        w *= half_lam / j
        acc_weight += w
        total += w * float(special.gammainc(dof / 2.0 + j, half_x))
    return min(1.0, max(0.0, total))


def critical_displacement(threshold: float, s_over_r: float) -> float | None:
    """Displacement-to-uncertainty ratio at which the threshold is hit.

    Returns the unique ``d >= 0`` (in units of the uncertainty, i.e. ``D/S``)
    with ``pc_circular(d * s_over_r, s_over_r) == threshold``, found by
    bisection to ``1e-12`` relative using monotonicity in ``d``. Returns
    ``None`` when the threshold exceeds the head-on maximum, i.e. the
    encounter is fully diluted and the threshold is unreachable.
    """
    if not (0.0 < threshold < 1.0):
        raise InputValidationError(f"threshold must be in (0, 1), got {threshold}")
    if not (s_over_r > 0.0 and math.isfinite(s_over_r)):
        raise InputValidationError(f"s_over_r must be positive, got {s_over_r}")
    peak = max_pc_head_on(s_over_r)
    if threshold > peak:
        return None
    if threshold >= peak * (1.0 - 1e-15):
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        if pc_circular(hi * s_over_r, s_over_r) < threshold:
            break
        lo = hi
        hi *= 2.0
    else:  # pragma: no cover - pc decays like exp(-d^2/2), unreachable
        raise InputValidationError("failed to bracket the critical displacement")
    while (hi - lo) > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if pc_circular(mid * s_over_r, s_over_r) >= threshold:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detection_rate(
    threshold: float,
    s_over_r: float,
    d_true_over_r: float,
    method: str = _SEMI_ANALYTIC,
    n_trials: int = 10**6,
    seed: int | None = None,
) -> float:
    """Aleatory probability of flagging an encounter at the given threshold.

    ``d_true_over_r`` is the true miss distance over the combined radius;
    values ``<= 1`` describe an impending collision, so the returned value is
    then the detection rate and its complement the failure rate.

    The semi-analytic path evaluates the noncentral chi-squared CDF at the
    critical displacement. The Monte Carlo path redraws the estimated
    displacement from its sampling law, computes the collision probability
    per draw, and counts threshold exceedances; it requires a seed.
    """
    if not (0.0 < threshold < 1.0):
        raise InputValidationError(f"threshold must be in (0, 1), got {threshold}")
    if not (s_over_r > 0.0 and math.isfinite(s_over_r)):
        raise InputValidationError(f"s_over_r must be positive, got {s_over_r}")
    if not (d_true_over_r >= 0.0 and math.isfinite(d_true_over_r)):
        raise InputValidationError(
            f"d_true_over_r must be >= 0, got {d_true_over_r}"
        )
    lam = (d_true_over_r / s_over_r) ** 2
    if method == _SEMI_ANALYTIC:
        d_crit = critical_displacement(threshold, s_over_r)
        if d_crit is None or d_crit == 0.0:
            return 0.0
        return ncx2_cdf(2, lam, d_crit * d_crit)
    if method == _MONTE_CARLO:
        seed = rngmod.validate_seed(seed)
        if n_trials < 1:
            raise InputValidationError(f"n_trials must be positive, got {n_trials}")
        offset = math.sqrt(lam)
        hits = 0
        for gen, count in rngmod.blocks(seed, n_trials):
            xi = gen.standard_normal((count, 2))
            d_over_s = np.hypot(offset + xi[:, 0], xi[:, 1])
            pc = pc_circular_batch(d_over_s * s_over_r, s_over_r)
            hits += int(np.count_nonzero(pc >= threshold))
        return hits / n_trials
    raise InputValidationError(
        f"method must be '{_SEMI_ANALYTIC}' or '{_MONTE_CARLO}', got {method!r}"
    )


def default_threshold_grid(policy: ThresholdPolicy | None = None) -> np.ndarray:
    """Log-spaced threshold grid including the policy thresholds exactly."""
    policy = policy or ThresholdPolicy()
    grid = np.geomspace(1e-8, 1e-1, 43)
    return np.unique(np.concatenate([grid, [policy.lower, policy.upper]]))


def detection_curve(
    s_over_r: float,
    d_true_over_r: float,
    thresholds=None,
    method: str = _SEMI_ANALYTIC,
    n_trials: int = 10**6,
    seed: int | None = None,
) -> DetectionCurve:
    """Failure-to-detect probability across a grid of thresholds.

    The Monte Carlo path shares one displacement sample across all
    thresholds, which preserves the monotone shape of the curve.
    """
    thresholds = (
        default_threshold_grid() if thresholds is None
        else np.sort(np.asarray(thresholds, dtype=float))
    )
    if thresholds.size == 0:
        raise InputValidationError("threshold grid is empty")
    if np.any(thresholds <= 0.0) or np.any(thresholds >= 1.0):
        raise InputValidationError("thresholds must lie in (0, 1)")
    if method == _MONTE_CARLO:
        seed = rngmod.validate_seed(seed)
        lam = (d_true_over_r / s_over_r) ** 2
        offset = math.sqrt(lam)
        hits = np.zeros(thresholds.size, dtype=np.int64)
        for gen, count in rngmod.blocks(seed, n_trials):
            xi = gen.standard_normal((count, 2))
            d_over_s = np.hypot(offset + xi[:, 0], xi[:, 1])
            pc = pc_circular_batch(d_over_s * s_over_r, s_over_r)
            hits += np.count_nonzero(pc[:, None] >= thresholds, axis=0)
        rates = hits / n_trials
        used_seed = seed
    elif method == _SEMI_ANALYTIC:
        rates = np.array(
            [detection_rate(t, s_over_r, d_true_over_r) for t in thresholds]
        )
        used_seed = None
    else:
        raise InputValidationError(
            f"method must be '{_SEMI_ANALYTIC}' or '{_MONTE_CARLO}', got {method!r}"
        )
    points = tuple(
        (float(t), float(1.0 - rate)) for t, rate in zip(thresholds, rates)
    )
    return DetectionCurve(
        s_over_r=float(s_over_r),
        d_true_over_r=float(d_true_over_r),
        points=points,
        method=method,
        seed=used_seed,
    )


def dilution_boundary(threshold: float) -> float:
    """Uncertainty ratio beyond which the threshold is unreachable.

    Solves ``max_pc_head_on(s) == threshold`` in closed form:
    ``s = (-2 ln(1 - threshold))^(-1/2)``. The detection rate is exactly
    zero for ``s_over_r`` above the returned value and positive below it.
    """
    if not (0.0 < threshold < 1.0):
        raise InputValidationError(f"threshold must be in (0, 1), got {threshold}")
    return 1.0 / math.sqrt(-2.0 * math.log1p(-threshold))


def equivalent_circular_s_over_r(enc: StandardizedEncounter) -> float:
    """Back-of-the-envelope equal-deviation ratio for unequal axes.

    Maps an anisotropic encounter onto the equal-deviation detection
    analysis via the geometric mean ``sqrt(s1 * s2) / r``. This is an
    approximation, reasonable only while ``s1`` and ``s2`` are not too
    unequal; it is provided for rough threshold studies, not as an exact
    reduction.
    """
    return math.sqrt(enc.s1 * enc.s2) / enc.r_combined


def proof_halfwidth(sigma: float, alpha: float) -> float:
    """Neighborhood halfwidth guaranteeing maximal false confidence.

    For a normal epistemic density with scale ``sigma`` the density supremum
    is ``1 / (sigma sqrt(2 pi))`` for every realization, so a neighborhood
    of total measure ``alpha * sigma * sqrt(2 pi)`` (halfwidth = half that)
    can never receive belief above ``alpha``; its complement, a false
    proposition, then always receives belief at least ``1 - alpha``.
    """
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise InputValidationError(f"sigma must be positive, got {sigma}")
    if not (0.0 < alpha < 1.0):
        raise InputValidationError(f"alpha must be in (0, 1), got {alpha}")
    return alpha * sigma * math.sqrt(2.0 * math.pi) / 2.0


def _interval_belief(x: np.ndarray, halfwidth: float, sigma: float) -> np.ndarray:
    """Normal(x, sigma^2) mass of the interval (-halfwidth, halfwidth)."""
    return special.ndtr((halfwidth - x) / sigma) - special.ndtr(
        (-halfwidth - x) / sigma
    )


def false_confidence_demo(
    sigma: float,
    halfwidth: float,
    alpha: float,
    n_trials: int,
    seed: int,
) -> FalseConfidenceReport:
    """One-dimensional additive-belief false-confidence simulation.

    The true parameter is zero. Each trial draws an observation from
    ``normal(0, sigma^2)``, forms the additive epistemic density
    ``normal(x, sigma^2)``, and assigns the proposition "the parameter lies
    outside ``(-halfwidth, halfwidth)``" - a false proposition - its
    epistemic mass. Reported is the fraction of trials assigning that false
    proposition belief at least ``1 - alpha``, together with the analytic
    rate ``p_target`` it should approach.

    With ``halfwidth <= proof_halfwidth(sigma, alpha)`` the rate is exactly
    one: the false proposition is always believed at level ``1 - alpha``.
    """
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise InputValidationError(f"sigma must be positive, got {sigma}")
    if not (halfwidth > 0.0 and math.isfinite(halfwidth)):
        raise InputValidationError(f"halfwidth must be positive, got {halfwidth}")
    if not (0.0 < alpha < 1.0):
        raise InputValidationError(f"alpha must be in (0, 1), got {alpha}")
    if n_trials < 10**3:
        raise InputValidationError(f"n_trials must be >= 1000, got {n_trials}")
    seed = rngmod.validate_seed(seed)

    hits = 0
    for gen, count in rngmod.blocks(seed, n_trials):
        x = sigma * gen.standard_normal(count)
        belief_outside = 1.0 - _interval_belief(x, halfwidth, sigma)
        hits += int(np.count_nonzero(belief_outside >= 1.0 - alpha))

    # analytic rate: interval mass decreases in |x|, so threshold-crossing
    # happens outside a band |x| >= x_star
    max_mass = float(_interval_belief(np.array(0.0), halfwidth, sigma))
    if max_mass <= alpha:
        p_target = 1.0
    else:
        x_star = optimize.brentq(
            lambda x: float(_interval_belief(np.array(x), halfwidth, sigma)) - alpha,
            0.0,
            halfwidth + sigma * 50.0,
            xtol=1e-14,
            rtol=8.9e-16,
        )
        p_target = 2.0 * float(special.ndtr(-x_star / sigma))

    return FalseConfidenceReport(
        alpha=float(alpha),
        p_target=p_target,
        neighborhood_halfwidth=float(halfwidth),
        empirical_rate=hits / n_trials,
        n_trials=int(n_trials),
        seed=seed,
    )
