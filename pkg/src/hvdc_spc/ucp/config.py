from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from ..nadir import BILATERAL, UNILATERAL, NadirHyperplane
from ..solver import SolverOptions

MODES = ("no_lim", "no_spc", "unilateral", "bilateral")
GRANULARITIES = ("daily", "hourly")
SEGMENTATIONS = ("geometric", "uniform")


class ScenarioError(ValueError):
    pass


class MissingHyperplaneError(ScenarioError):
    pass


@dataclass
class ScenarioConfig:
    """Everything that selects one unit-commitment scenario.

    ``planes`` maps (area, scheme) to fitted nadir planes. The three
    frequency-constrained modes need the unilateral plane of every area;
    ``bilateral`` additionally needs the bilateral plane of every area.
    """

    mode: str
    reserve_granularity: str = "daily"
    lcc_block: int = 24
    overload: bool = True
    planes: dict[tuple[str, str], NadirHyperplane] = field(default_factory=dict, repr=False)
    plane_files: tuple[str, ...] = ()
    horizon: int | None = None
    min_reserve: dict[str, float] | None = None  # no_lim only; default is the dimensioning incident
    segments: int = 4
    segmentation: str = "geometric"
    big_m: float = 10.0
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ScenarioError(f"unknown mode '{self.mode}' (expected one of {', '.join(MODES)})")
        if self.reserve_granularity not in GRANULARITIES:
            raise ScenarioError(f"reserve granularity must be one of {', '.join(GRANULARITIES)}")
        if self.segmentation not in SEGMENTATIONS:
            raise ScenarioError(f"segmentation must be one of {', '.join(SEGMENTATIONS)}")
        if self.lcc_block < 1 or self.segments < 1:
            raise ScenarioError("block length and segment count must be positive")
        if not self.big_m > 0:
            raise ScenarioError("big-M constant must be positive")

    @property
    def frequency_constrained(self) -> bool:
        return self.mode != "no_lim"

    @property
    def spc(self) -> bool:
        return self.mode in ("unilateral", "bilateral")

    def required_planes(self, areas: list[str], has_neighbours) -> list[tuple[str, str]]:
        if not self.frequency_constrained:
            return []
        need = []
        for a in areas:
            if self.mode != BILATERAL or has_neighbours(a):
                need.append((a, UNILATERAL))
            if self.mode == BILATERAL:
                need.append((a, BILATERAL))
        return need

    def with_solver_defaults(self, periods: int) -> "ScenarioConfig":
        # default time limit scales with the number of days
        days = max(1, math.ceil(periods / 24))
        if self.solver.time_limit == SolverOptions().time_limit:
            self.solver.time_limit = 1800.0 * days
        return self

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "reserve_granularity": self.reserve_granularity,
            "lcc_block": self.lcc_block,
            "overload": self.overload,
            "plane_files": list(self.plane_files),
            "horizon": self.horizon,
            "min_reserve": self.min_reserve,
            "segments": self.segments,
            "segmentation": self.segmentation,
            "big_m": self.big_m,
            "solver": asdict(self.solver),
        }

    @classmethod
    def from_dict(cls, d: dict, planes: dict | None = None) -> "ScenarioConfig":
        d = dict(d)
        solver = SolverOptions(**d.pop("solver", {}))
        d["plane_files"] = tuple(d.get("plane_files", ()))
        return cls(**d, solver=solver, planes=planes or {})
