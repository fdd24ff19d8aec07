"""The persisted configuration: a domain plus a finite list of bubbles.

Bubbles are stored column-wise (centres, log radii, shell index, net index)
because configurations routinely hold millions of them. Each group of
bubbles that was generated as one net is described by a ``ShellRecord``;
the simulation index is rebuilt from these records.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .domains import Domain

GROUP_KINDS = ("ring", "fibonacci", "points")


@dataclass(frozen=True)
class Bubble:
    center: np.ndarray
    radius: float
    log_radius: float
    shell_k: int
    net_index: int


@dataclass(frozen=True)
class ShellRecord:
    """One net of equal bubbles on the sphere |x - center| = R.

    ``alpha``/``beta``/``m``/``M`` are the unscaled schedule values of shell
    ``k``; ``sep`` and ``log_radius`` are in the coordinates of the config.
    ``level`` and ``group`` locate the net inside a general-domain build.
    """

    k: int
    center: tuple
    R: float
    sep: float
    log_radius: float
    alpha: float
    beta: float
    m: int
    M: int
    start: int
    stop: int
    kind: str = "ring"
    level: int = 0
    group: int = -1
    scale: float = 1.0

    @property
    def count(self) -> int:
        return self.stop - self.start

    @property
    def radius(self) -> float:
        return math.exp(self.log_radius)


@dataclass(eq=False)
class ChampagneConfig:
    d: int
    domain: Domain
    centers: np.ndarray
    log_radii: np.ndarray
    shell_k: np.ndarray
    net_index: np.ndarray
    shells: list[ShellRecord] = field(default_factory=list)
    schedule: dict = field(default_factory=dict)
    k_range: tuple[int, int] = (0, -1)
    seed: int = 0
    capacity_sum: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.centers = np.ascontiguousarray(self.centers, dtype=float).reshape(-1, self.d)
        n = len(self.centers)
        self.log_radii = np.ascontiguousarray(self.log_radii, dtype=float).reshape(n)
        self.shell_k = np.ascontiguousarray(self.shell_k, dtype=np.int64).reshape(n)
        self.net_index = np.ascontiguousarray(self.net_index, dtype=np.int64).reshape(n)

    # construction helpers -------------------------------------------------

    @classmethod
    def from_points(cls, domain: Domain, centers, radii, seed: int = 0) -> "ChampagneConfig":
        """Free-form config: one 'points' group holding arbitrary bubbles."""
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.broadcast_to(np.asarray(radii, dtype=float), (len(centers),))
        if np.any(radii <= 0):
            raise ValueError("bubble radii must be positive")
        n = len(centers)
        rec = ShellRecord(0, tuple(np.zeros(domain.d)), 0.0, 0.0, float(np.log(radii.min())) if n else 0.0,
                          0.0, 0.0, 0, 0, 0, n, "points")
        return cls(domain.d, domain, centers, np.log(radii), np.zeros(n, np.int64),
                   np.arange(n), [rec] if n else [], {"kind": "points"}, (0, 0), seed)

    @property
    def radii(self) -> np.ndarray:
        return np.exp(self.log_radii)

    def __len__(self) -> int:
        return len(self.centers)

    def bubble(self, i: int) -> Bubble:
        return Bubble(self.centers[i].copy(), float(np.exp(self.log_radii[i])),
                      float(self.log_radii[i]), int(self.shell_k[i]), int(self.net_index[i]))

    def bubbles(self):
        for i in range(len(self)):
            yield self.bubble(i)

    def select(self, shells: list[ShellRecord], domain: Domain | None = None) -> "ChampagneConfig":
        """Sub-config holding only the given groups, optionally in another domain."""
        idx = [np.arange(s.start, s.stop) for s in shells]
        idx = np.concatenate(idx) if idx else np.zeros(0, np.int64)
        recs, pos = [], 0
        for s in shells:
            recs.append(_replace(s, start=pos, stop=pos + s.count))
            pos += s.count
        return ChampagneConfig(self.d, domain or self.domain, self.centers[idx], self.log_radii[idx],
                               self.shell_k[idx], self.net_index[idx], recs, dict(self.schedule),
                               self.k_range, self.seed, 0.0, {})

    def shells_for(self, k: int | None = None, level: int | None = None) -> list[ShellRecord]:
        return [s for s in self.shells
                if (k is None or s.k == k) and (level is None or s.level == level)]

    # serialisation --------------------------------------------------------

    def to_json(self) -> dict:
        rad = self.radii
        return {
            "d": self.d,
            "domain": self.domain.to_json(),
            "schedule": self.schedule,
            "k_range": list(self.k_range),
            "bubbles": [
                {"c": self.centers[i].tolist(), "r": float(rad[i]), "log_r": float(self.log_radii[i]),
                 "k": int(self.shell_k[i]), "i": int(self.net_index[i])}
                for i in range(len(self))
            ],
            "shells": [{**asdict(s), "center": list(s.center)} for s in self.shells],
            "capacity_sum": self.capacity_sum,
            "seed": self.seed,
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ChampagneConfig":
        d = int(obj["d"])
        b = obj["bubbles"]
        centers = np.array([x["c"] for x in b], dtype=float).reshape(-1, d)
        log_r = np.array([x["log_r"] for x in b], dtype=float)
        shells = [ShellRecord(**{**s, "center": tuple(s["center"])}) for s in obj.get("shells", [])]
        return cls(
            d, Domain.from_json(obj["domain"]), centers, log_r,
            np.array([x["k"] for x in b], dtype=np.int64),
            np.array([x["i"] for x in b], dtype=np.int64),
            shells, obj.get("schedule", {}), tuple(obj.get("k_range", (0, -1))),
            int(obj.get("seed", 0)), float(obj.get("capacity_sum", 0.0)), obj.get("meta", {}),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "ChampagneConfig":
        return cls.from_json(json.loads(Path(path).read_text()))


def _replace(rec: ShellRecord, **kw) -> ShellRecord:
    return ShellRecord(**{**asdict(rec), **kw})
