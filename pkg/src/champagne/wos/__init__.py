"""Walk-on-spheres simulation over champagne configurations."""

from .engine import (
    Simulator,
    annulus_config,
    hit_probability,
    nearest_gap,
    set_threads,
    shell_gamma_estimate,
    wos_trial,
)
from .estimate import HitEstimate
from .index import ObstacleIndex

__all__ = [
    "HitEstimate",
    "ObstacleIndex",
    "Simulator",
    "annulus_config",
    "hit_probability",
    "nearest_gap",
    "set_threads",
    "shell_gamma_estimate",
    "wos_trial",
]
