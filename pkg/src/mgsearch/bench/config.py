"""Experiment configuration and its two file formats.

A config file is either a JSON object whose keys are the fields of
:class:`ExperimentConfig`, or plain ``key = value`` lines.  In the plain
format values are parsed as JSON when possible (so ``[0, 1]`` and ``true``
work) and dotted keys such as ``domain_params.width`` fill nested tables.
Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..core import InvalidParameterError

DOMAINS = ("grid", "web", "queens", "knight", "msa", "robots", "graph")
ALGORITHMS = ("best_first", "astar_epsilon", "backtracking", "hill_climbing", "multi_robot")
HEURISTICS = ("bfs", "lexicographic", "min_dist", "sum", "progress", "distance", "mu", "induction", "combined")
MODES = ("anytime", "contract-resources", "contract-quality")


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str = "grid"
    domain_params: dict = field(default_factory=dict)
    seeds: tuple = (0,)
    trials: int = 1  # per seed
    algorithm: str = "best_first"
    heuristic: str = "bfs"
    heuristic_params: dict = field(default_factory=dict)
    R: Optional[int] = None
    R_pct: Optional[float] = None  # percent of the domain size
    checkpoint_pct: float = 1.0  # grid step, percent of R
    mode: str = "anytime"
    quality_target: Optional[float] = None
    disabling: bool = True
    clustering: bool = False
    diversification: bool = False
    alpha: float = 0.3
    assumed_budget: Optional[float] = None
    refresh_interval: int = 1
    depth_bound: int = 4
    warm_start: Optional[str] = None  # model file for the induction scorer

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        self.validate()

    def validate(self) -> None:
        def bad(msg):
            raise InvalidParameterError(msg)

        if self.domain not in DOMAINS:
            bad(f"unknown domain {self.domain!r}")
        if self.algorithm not in ALGORITHMS:
            bad(f"unknown algorithm {self.algorithm!r}")
        if self.heuristic not in HEURISTICS:
            bad(f"unknown heuristic {self.heuristic!r}")
        if self.mode not in MODES:
            bad(f"unknown mode {self.mode!r}")
        if self.trials < 1:
            bad("trial count must be >= 1")
        if not self.seeds:
            bad("need at least one seed")
        if self.R is not None and self.R_pct is not None:
            bad("give R or R_pct, not both")
        if self.R is not None and self.R < 1:
            bad("R must be >= 1")
        if self.R_pct is not None and not 0 < self.R_pct <= 100:
            bad("R_pct must lie in (0, 100]")
        if not 0 < self.checkpoint_pct <= 100:
            bad("checkpoint_pct must lie in (0, 100]")
        if self.mode == "contract-quality":
            if self.quality_target is None or not 0 < self.quality_target <= 1:
                bad("contract-quality needs quality_target in (0, 1]")
        elif self.R is None and self.R_pct is None:
            bad(f"{self.mode} mode needs R or R_pct")
        if not 0 <= self.alpha <= 1:
            bad("alpha must lie in [0, 1]")
        if self.refresh_interval < 1 or self.depth_bound < 1:
            bad("refresh_interval and depth_bound must be >= 1")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["seeds"] = list(self.seeds)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_key_values(text: str) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidParameterError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        *outer, last = key.split(".")
        table = out
        for part in outer:
            table = table.setdefault(part, {})
        table[last] = _parse_value(value)
    return out


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    data = json.loads(text) if text.lstrip().startswith("{") else parse_key_values(text)
    return ExperimentConfig.from_dict(data)
