"""K-sigma screening decisions: confidences, overlap rule, coverage cap."""

import math

import numpy as np
import pytest
from scipy import special

from conjrisk import (
    InputValidationError,
    JointState,
    joint_confidence,
    ksigma_confidence,
    screen_conjunction,
)

from conftest import random_rotation, random_spd


def _conjunction_state(p1, p2, cov1_pos, cov2_pos, r1=5.0, r2=5.0, vel_var=1e-4):
    theta = np.concatenate(
        [p1, [0.0, 7500.0, 0.0], p2, [0.0, -7400.0, 120.0]]
    )
    cov = np.zeros((12, 12))
    cov[0:3, 0:3] = cov1_pos
    cov[3:6, 3:6] = vel_var * np.eye(3)
    cov[6:9, 6:9] = cov2_pos
    cov[9:12, 9:12] = vel_var * np.eye(3)
    return JointState(theta_hat=theta, c_theta=cov, r1=r1, r2=r2)


class TestKsigmaConfidence:
    def test_two_dimensional_reference_values(self):
        assert ksigma_confidence(1.0, 2) == pytest.approx(0.393, abs=5e-4)
        assert ksigma_confidence(2.0, 2) == pytest.approx(0.865, abs=5e-4)
        assert ksigma_confidence(3.0, 2) == pytest.approx(0.989, abs=5e-4)

    def test_four_sigma_three_dimensional(self):
        assert ksigma_confidence(4.0, 3) == pytest.approx(0.99887, abs=5e-6)

    def test_two_dimensional_closed_form(self):
        for k in np.linspace(0.05, 10.0, 60):
            assert ksigma_confidence(float(k), 2) == pytest.approx(
                1.0 - math.exp(-k * k / 2.0), abs=1e-12
            )

    def test_one_dimensional_gaussian_coverage(self):
        for k in (0.5, 1.0, 1.96, 3.0):
            expected = 2.0 * float(special.ndtr(k)) - 1.0
            assert ksigma_confidence(k, 1) == pytest.approx(expected, rel=1e-12)

    def test_strictly_increasing_in_k(self):
        values = [ksigma_confidence(k, 3) for k in np.linspace(0.1, 6.0, 50)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_validation(self):
        with pytest.raises(InputValidationError):
            ksigma_confidence(0.0, 3)
        with pytest.raises(InputValidationError):
            ksigma_confidence(1.0, 0)


class TestJointConfidence:
    def test_four_sigma_three_dimensional_example(self):
        alpha = 1.0 - ksigma_confidence(4.0, 3)
        assert alpha == pytest.approx(0.001134, abs=2e-6)
        independent, frechet = joint_confidence(alpha)
        assert independent == pytest.approx(0.99773, abs=5e-6)
        assert frechet == pytest.approx(0.99773, abs=5e-6)
        assert 1.0 - frechet == pytest.approx(0.00227, abs=5e-6)

    def test_extremes(self):
        assert joint_confidence(0.0) == (1.0, 1.0)
        assert joint_confidence(0.6)[1] == 0.0
        assert joint_confidence(1.0) == (0.0, 0.0)

    def test_frechet_never_exceeds_independence(self):
        for alpha in np.linspace(0.0, 1.0, 101):
            independent, frechet = joint_confidence(float(alpha))
            assert frechet <= independent + 1e-15


class TestScreenConjunction:
    def test_four_sigma_reference_decision(self):
        js = _conjunction_state(
            np.zeros(3), np.array([400.0, 0.0, 0.0]),
            100.0 * np.eye(3), 100.0 * np.eye(3),
        )
        decision = screen_conjunction(js, 4.0)
        assert decision.per_object_confidence == pytest.approx(0.99887, abs=5e-6)
        assert decision.joint_confidence_independent == pytest.approx(
            0.99773, abs=5e-6
        )
        assert decision.collision_risk_cap == pytest.approx(0.00227, abs=5e-6)
        # spheres of radius 40 at separation 400: gap 320, combined radius 10
        assert decision.min_distance == pytest.approx(320.0, abs=1e-6)
        assert not decision.overlap

    def test_identical_positions_always_overlap(self):
        rng = np.random.default_rng(20)
        p = np.array([100.0, -50.0, 30.0])
        js = _conjunction_state(p, p, random_spd(rng, 3), random_spd(rng, 3))
        for k in (0.5, 1.0, 4.0, 8.0):
            assert screen_conjunction(js, k).overlap

    def test_far_separation_never_overlaps(self):
        rng = np.random.default_rng(21)
        cov1 = random_spd(rng, 3)
        cov2 = random_spd(rng, 3)
        k = 4.0
        reach = k * math.sqrt(
            max(np.linalg.eigvalsh(cov1).max(), np.linalg.eigvalsh(cov2).max())
        )
        p2 = np.array([2.0 * reach + 100.0, 0.0, 0.0])
        js = _conjunction_state(np.zeros(3), p2, cov1, cov2)
        assert not screen_conjunction(js, k).overlap

    def test_overlap_thresholds_at_combined_radius(self):
        # spheres of radius k*10 = 40; boundary gap 20 vs combined radius 10
        cov = 100.0 * np.eye(3)
        near = _conjunction_state(
            np.zeros(3), np.array([89.0, 0.0, 0.0]), cov, cov
        )
        far = _conjunction_state(
            np.zeros(3), np.array([91.0, 0.0, 0.0]), cov, cov
        )
        assert screen_conjunction(near, 4.0).overlap  # gap 9 <= 10
        assert not screen_conjunction(far, 4.0).overlap  # gap 11 > 10

    def test_rigid_rotation_invariance(self):
        rng = np.random.default_rng(22)
        for _ in range(5):
            js = _conjunction_state(
                rng.standard_normal(3) * 50.0,
                rng.standard_normal(3) * 50.0 + np.array([150.0, 0.0, 0.0]),
                random_spd(rng, 3, 20.0),
                random_spd(rng, 3, 20.0),
            )
            rot = random_rotation(rng)
            block = np.kron(np.eye(4), rot)
            js_rot = JointState(
                theta_hat=block @ js.theta_hat,
                c_theta=block @ js.c_theta @ block.T,
                r1=js.r1,
                r2=js.r2,
            )
            base = screen_conjunction(js, 3.0)
            rotated = screen_conjunction(js_rot, 3.0)
            assert rotated.overlap == base.overlap
            assert rotated.min_distance == pytest.approx(
                base.min_distance, rel=1e-8, abs=1e-8
            )

    def test_confidence_ordering_invariant(self):
        js = _conjunction_state(
            np.zeros(3), np.array([100.0, 0.0, 0.0]),
            25.0 * np.eye(3), 25.0 * np.eye(3),
        )
        for k in (0.2, 1.0, 2.5, 5.0):
            d = screen_conjunction(js, k)
            assert (
                d.joint_confidence_frechet
                <= d.joint_confidence_independent
                <= d.per_object_confidence
            )
            if d.per_object_confidence >= 0.5:
                assert d.collision_risk_cap == pytest.approx(
                    1.0 - d.joint_confidence_frechet, rel=1e-12
                )

    def test_singular_position_block_rejected(self):
        cov = np.zeros((12, 12))
        cov[0:3, 0:3] = np.diag([1.0, 1.0, 0.0])
        cov[3:6, 3:6] = np.eye(3)
        cov[6:9, 6:9] = np.eye(3)
        cov[9:12, 9:12] = np.eye(3)
        theta = np.zeros(12)
        theta[9:12] = [0.0, 0.0, 1000.0]
        js = JointState(theta_hat=theta, c_theta=cov, r1=1.0, r2=1.0)
        with pytest.raises(InputValidationError, match="positive definite"):
            screen_conjunction(js, 4.0)

    def test_json_wire_keys(self):
        js = _conjunction_state(
            np.zeros(3), np.array([400.0, 0.0, 0.0]),
            100.0 * np.eye(3), 100.0 * np.eye(3),
        )
        doc = screen_conjunction(js, 4.0).to_json_dict()
        assert set(doc) == {
            "min_distance_m", "overlap", "k", "confidence",
            "joint_confidence", "frechet_bound", "risk_cap",
        }


class TestCoverageCap:
    def test_missed_maneuver_rate_capped(self):
        # truths on a collision course; estimates drawn around them
        rng = np.random.default_rng(23)
        cov1 = random_spd(rng, 3, 300.0)
        cov2 = random_spd(rng, 3, 300.0)
        chol1 = np.linalg.cholesky(cov1)
        chol2 = np.linalg.cholesky(cov2)
        p1 = np.zeros(3)
        p2 = np.array([6.0, 3.0, 6.4])  # true miss 9.27 m < combined 10 m
        k = 3.0
        alpha = 1.0 - ksigma_confidence(k, 3)
        n = 3000
        misses = 0
        for _ in range(n):
            js = _conjunction_state(
                p1 + chol1 @ rng.standard_normal(3),
                p2 + chol2 @ rng.standard_normal(3),
                cov1,
                cov2,
            )
            if not screen_conjunction(js, k).overlap:
                misses += 1
        rate = misses / n
        stderr = math.sqrt(rate * (1.0 - rate) / n)
        assert rate <= 2.0 * alpha + 3.0 * stderr + 3.0 / n
