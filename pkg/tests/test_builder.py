import json
import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from champagne.builder import (
    audit_config,
    build_ball_config,
    build_corollary_config,
    build_general_config,
    compute_k1,
    exhaustion_scales,
    general_gap_ratio,
    level_delta_sums,
    plan_corollary,
)
from champagne.config import ChampagneConfig
from champagne.domains import Domain
from champagne.errors import DisjointnessViolation, ScheduleError
from champagne.schedules import CapacityWeight, Schedule, default_weight


def brute_force_min_clearance(cfg):
    c, r = cfg.centers, cfg.radii
    best = math.inf
    for i in range(0, len(c), 2048):
        d = np.linalg.norm(c[i:i + 2048, None] - c[None], axis=-1)
        gap = d - r[i:i + 2048, None] - r[None]
        idx = np.arange(i, min(i + 2048, len(c)))
        gap[np.arange(len(idx)), idx] = np.inf
        best = min(best, float(gap.min()))
    return best


def test_k1_one_bubble_plane_matches_scan():
    assert compute_k1(Schedule.one_bubble(2)) == oracles.one_bubble_k1() == 9
    assert oracles.one_bubble_ratio(9) == pytest.approx(5.4e-3, rel=0.02)


def test_k1_tower_and_d3():
    assert compute_k1(Schedule.tower_family(1, 2)) == 3
    for s in (Schedule.one_bubble(3), Schedule.tower_family(1, 3), Schedule.power_law(1, 1.0, 3)):
        assert compute_k1(s) <= 101
        k = compute_k1(s)
        assert s.alpha(k) < 0.01


def test_tower1_single_shell(tower1_k3_config):
    cfg = tower1_k3_config
    (rec,) = cfg.shells
    assert rec.R == pytest.approx(0.605066, abs=5e-7)
    assert rec.sep == pytest.approx(1 / 72, rel=1e-15)
    assert len(cfg) == oracles.tower1_shell3_count() == 822
    assert np.all(cfg.log_radii == -24.0)


def test_r10_and_disjointness_by_brute_force():
    s = Schedule.one_bubble(2)
    cfg = build_ball_config(s, default_weight(s), 9, 14)
    assert len(cfg) < 20_000
    ratio = cfg.radii / (1 - np.linalg.norm(cfg.centers, axis=1))
    assert ratio.max() <= 0.01
    clearance = brute_force_min_clearance(cfg)
    assert clearance > 0
    assert cfg.meta["audit"]["min_clearance"] == pytest.approx(clearance, rel=1e-12)


def test_audit_catches_overlap():
    cfg = ChampagneConfig.from_points(Domain.unit_ball(2), [[0, 0], [0.15, 0]], [0.1, 0.1])
    with pytest.raises(DisjointnessViolation):
        audit_config(cfg)


def test_range_checks():
    s = Schedule.one_bubble(2)
    w = default_weight(s)
    with pytest.raises(ScheduleError):
        build_ball_config(s, w, 12, 11)
    with pytest.raises(ScheduleError):
        build_ball_config(s, w, 8, 10)  # below k1 = 9


def test_json_roundtrip_is_bit_equal(tower1_k3_config):
    text = tower1_k3_config.dumps()
    back = ChampagneConfig.from_json(json.loads(text))
    assert back.dumps() == text
    assert np.array_equal(back.centers, tower1_k3_config.centers)


def test_corollary_zero_gamma_is_empty():
    s = Schedule.tower_family(1, 2)
    plan = plan_corollary(s, default_weight(s), 0.5, 1.0, 0.0, 1e9, 1.0)
    assert plan.k_dprime == plan.k_prime


def test_corollary_kdprime_matches_product_scan():
    s = Schedule.tower_family(1, 2)
    plan = plan_corollary(s, default_weight(s), 0.5, 1.0, 0.5, 1e9, 1.0)
    assert plan.k_dprime == oracles.corollary_kdprime_tower1(plan.k_prime) == 6
    assert plan.product <= 0.5


def test_corollary_scaling_invariance():
    s = Schedule.power_law(0, 6.0, 2)
    w = default_weight(s)
    y, R = np.array([0.3, -0.2]), 0.25
    cfg = build_corollary_config(y, 0.8 * R, R, 0.5, 1e-3, s, w, 1.0)
    lo, hi = cfg.k_range
    ref = build_ball_config(s, w, lo, hi, center=y, scale=R, audit=False)
    np.testing.assert_allclose(cfg.centers, ref.centers, rtol=0, atol=1e-15)
    np.testing.assert_allclose(cfg.log_radii, ref.log_radii, rtol=1e-15)
    unit = build_ball_config(s, w, lo, hi, audit=False)
    np.testing.assert_allclose(cfg.centers, y + R * unit.centers, atol=1e-15)
    np.testing.assert_allclose(cfg.log_radii, unit.log_radii + math.log(R), rtol=1e-14)
    assert cfg.meta["corollary"]["capacity_tail"] < 1e-3
    assert cfg.meta["audit"]["max_s_over_ball_gap"] <= 0.01


def test_unit_ball_exhaustion_scales_exact():
    levels = [Domain.ball([0, 0], 1 - 1 / (n + 1)) for n in (1, 2, 3)]
    bs = exhaustion_scales(Domain.unit_ball(2), levels)
    assert bs == pytest.approx([1 / 12, 1 / 24, 1 / 24], rel=1e-14)


def test_two_level_box_general_config():
    box = Domain.box([-1, -1], [1, 1])
    s = Schedule.power_law(0, 6.0, 2)
    w = default_weight(s)
    cfg = build_general_config(box, [box.shrink(0.6), box.shrink(0.3)], 0.5, s, w, 1.0)
    counts = [lvl["count_Y"] for lvl in cfg.meta["levels"]]
    assert level_delta_sums(cfg) == oracles.delta_split(counts, Fraction(1, 2))
    assert level_delta_sums(cfg) == [Fraction(1, 4), Fraction(1, 8)]
    assert general_gap_ratio(cfg) <= 0.01
    assert cfg.meta["audit"]["min_clearance"] > 0
    for lvl in cfg.meta["levels"]:
        Y = np.array(lvl["y"])
        dist = np.linalg.norm(Y[:, None] - Y[None], axis=-1) + np.eye(len(Y)) * 9
        assert dist.min() > lvl["b"] / 3  # B(y, b/6) pairwise disjoint


def test_capacity_identity_tower1_k4():
    s = Schedule.tower_family(1, 2)
    w = CapacityWeight.parse("iterlog3:n=1")
    cfg = build_ball_config(s, w, 4, 4, audit=False)
    assert cfg.capacity_sum == pytest.approx(oracles.tower1_capacity_k4(len(cfg)), rel=1e-13)
