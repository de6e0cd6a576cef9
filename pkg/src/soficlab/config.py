"""Experiment configuration: a single JSON file validated with pydantic."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigError
from .groups import GroupSpec

PIPELINES = ("irs", "defect", "bernoulli", "relcheck", "align", "suite")


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GroupConfig(_Model):
    kind: Literal["lattice", "abelian", "heisenberg", "free"]
    rank: int = 1
    moduli: list[int] = Field(default_factory=list)

    def spec(self) -> GroupSpec:
        return GroupSpec.from_dict(self.model_dump())


class PerturbConfig(_Model):
    rate: float = Field(ge=0, le=1)
    seed: int


class ConstructionConfig(_Model):
    action: str
    label: str = ""
    size_param: str = "n"  # which action parameter the size schedule feeds
    params: dict = Field(default_factory=dict)
    perturb: PerturbConfig | None = None
    block_sum: int | None = Field(default=None, ge=1)
    pad_trivial: int | None = Field(default=None, ge=0)

    def name(self) -> str:
        return self.label or self.action


class StepConfig(_Model):
    element: str  # word such as "a b^-1" or "(1,0)"
    values: list[float]


class CylinderConfig(_Model):
    name: str = ""
    labels: list[StepConfig] = Field(default_factory=list)
    bits: list[str] = Field(default_factory=list)


class ThetaConfig(_Model):
    source: Literal["empirical", "explicit"] = "empirical"
    window_radius: int | None = None
    patterns: list[tuple[str, str]] = Field(default_factory=list)  # (bit string, fraction text)

    @model_validator(mode="after")
    def _explicit_needs_patterns(self):
        if self.source == "explicit" and not self.patterns:
            raise ValueError("explicit theta needs a pattern list")
        return self


class Tolerances(_Model):
    defect: float = 0.05
    trace: float = 0.05
    intersection: float = 0.05
    equivariance: float = 0.05
    good_sample: float | None = None  # None: 10 * sqrt(sum of exact variances)
    alignment: float | None = None
    stats: float = 0.0


class Seeds(_Model):
    labels: int
    mc: int
    align: int
    perturb: int = 0


class ExperimentConfig(_Model):
    name: str = "experiment"
    group: GroupConfig
    constructions: list[ConstructionConfig] = Field(default_factory=list)
    sizes: list[int] = Field(default_factory=list)
    window_radius: int = Field(default=2, ge=0)
    label_radius: int = Field(default=1, ge=0)
    bins: int = Field(default=16, ge=1)
    relation_bins: int = Field(default=4, ge=1)
    cylinder_family: Literal["standard"] | list[CylinderConfig] = "standard"
    theta: ThetaConfig = ThetaConfig()
    tolerances: Tolerances = Tolerances()
    seeds: Seeds
    mc_samples: int = Field(default=256, ge=2)
    max_tries: int = Field(default=20, ge=1)
    align_restarts: int = Field(default=4, ge=0)
    align_rounds: int = Field(default=6, ge=0)
    suite_criteria: list[int] = Field(default_factory=list)
    pipelines: list[Literal["irs", "defect", "bernoulli", "relcheck", "align", "suite"]] = Field(default_factory=list)
    output_dir: str = "soficlab-out"
    degree_cap: int = Field(default=10_000_000, ge=1)

    @field_validator("sizes")
    @classmethod
    def _increasing(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("size schedule must be strictly increasing")
        if any(s < 1 for s in v):
            raise ValueError("sizes must be positive")
        return v

    @model_validator(mode="after")
    def _closure(self):
        # bernoulli checks need E E^-1 inside the window, with E the label ball
        if self.window_radius < 2 * self.label_radius:
            raise ValueError(
                f"window_radius {self.window_radius} must be at least twice label_radius {self.label_radius}"
            )
        if any(p != "suite" for p in self.pipelines) and (not self.constructions or not self.sizes):
            raise ValueError("pipelines other than 'suite' need constructions and sizes")
        if "align" in self.pipelines and len(self.constructions) < 2:
            raise ValueError("the align pipeline compares the first two constructions")
        return self

    def group_spec(self) -> GroupSpec:
        return self.group.spec()


def load_config(path) -> ExperimentConfig:
    from pydantic import ValidationError

    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        lines = [f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in exc.errors()]
        raise ConfigError(f"{path}: invalid config\n  " + "\n  ".join(lines)) from exc
