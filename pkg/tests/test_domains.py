import json

import numpy as np
import pytest

import oracles
from champagne.domains import Domain, greedy_thin


def test_ball_and_box_gaps_are_exact():
    rng = np.random.default_rng(0)
    ball = Domain.ball([0.2, -0.1, 0.0], 2.0)
    box = Domain.box([-1, -2, 0], [1, 0.5, 3])
    pts = rng.uniform(-0.9, 0.4, (200, 3)) + [0, 0, 1]
    for p in pts:
        assert ball.boundary_gap(p) == pytest.approx(2.0 - np.linalg.norm(p - [0.2, -0.1, 0.0]), abs=1e-12)
        assert box.boundary_gap(p) == pytest.approx(oracles.exact_box_gap(p, box.lo, box.hi), abs=1e-12)


def test_union_connectivity():
    assert Domain.union([[-0.4, 0], [0.4, 0]], [1, 1]).is_connected()
    with pytest.raises(ValueError):
        Domain.union([[-2, 0], [2, 0]], [1, 1])


def test_union_gap_is_lower_bound():
    U = Domain.union([[-0.4, 0], [0.4, 0]], [1, 1])
    rng = np.random.default_rng(1)
    fine = U.boundary_points(1e-4)
    for p in rng.uniform(-1.2, 1.2, (300, 2)):
        if not U.contains(p):
            continue
        true = np.linalg.norm(fine - p, axis=1).min()
        assert U.boundary_gap(p) <= true + 1e-4


def test_union_boundary_points_lie_on_boundary():
    U = Domain.union([[-0.4, 0], [0.4, 0]], [1, 1])
    pts = U.boundary_points(0.01)
    assert np.abs(U.boundary_gap(pts)).max() < 1e-12
    assert np.diff(np.sort(np.arctan2(pts[:, 1], pts[:, 0] + 0))).max() < 0.05


def test_shrink_and_json_roundtrip():
    for dom in (Domain.unit_ball(3), Domain.box([0, 0], [2, 1]),
                Domain.union([[-0.4, 0], [0.4, 0]], [1, 1])):
        back = Domain.from_json(json.loads(json.dumps(dom.to_json())))
        assert back.to_json() == dom.to_json()
        inner = dom.shrink(0.1)
        p = inner.boundary_points(0.05)
        assert np.all(dom.boundary_gap(p) >= 0.1 - 1e-12)


def test_greedy_thin_separation_and_maximality():
    rng = np.random.default_rng(2)
    cand = rng.uniform(0, 1, (2000, 2))
    kept = greedy_thin(cand, 0.05)
    dist = np.linalg.norm(kept[:, None] - kept[None], axis=-1) + np.eye(len(kept))
    assert dist.min() >= 0.05
    # every candidate is close to something kept
    near = np.linalg.norm(cand[:, None] - kept[None], axis=-1).min(axis=1)
    assert near.max() < 0.05
