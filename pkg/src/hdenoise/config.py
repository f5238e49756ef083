"""Versioned JSON run configuration for the command-line harness.

Every block rejects unknown keys.  Tagged blocks (set, gauge, plan, model,
noise) select their variant through a ``kind`` field.  Complex numbers are
written either as a real number or as ``[re, im]``.
"""
from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

SCHEMA_VERSION = 1

COMMANDS = ("certify", "design", "separation", "kakutani", "simulate", "fit", "experiment", "measure")

Complex = Union[float, tuple[float, float]]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


# -- boundary sets ----------------------------------------------------------


class CircleSet(_Block):
    kind: Literal["circle"] = "circle"


class ArcsSet(_Block):
    kind: Literal["arcs"] = "arcs"
    arcs: list[tuple[float, Annotated[float, Field(gt=0)]]] = Field(min_length=1)


class CantorSpec(_Block):
    kind: Literal["cantor"] = "cantor"
    start: float = 0.0
    length: float = Field(1.0, gt=0, lt=6.283185307179586)
    ratio: float = Field(1.0 / 3.0, gt=0, lt=0.5)
    depth: int = Field(8, ge=1, le=14)


SetSpec = Annotated[Union[CircleSet, ArcsSet, CantorSpec], Field(discriminator="kind")]


# -- gauges -----------------------------------------------------------------


class PowerGauge(_Block):
    kind: Literal["power"] = "power"
    beta: float = Field(1.0, gt=0)


class TLogGauge(_Block):
    kind: Literal["tlog"] = "tlog"


class CustomGauge(_Block):
    kind: Literal["custom"] = "custom"
    table: list[tuple[float, float]] = Field(min_length=1)


GaugeSpec = Annotated[Union[PowerGauge, TLogGauge, CustomGauge], Field(discriminator="kind")]


# -- sampling plans ---------------------------------------------------------


class DyadicPlan(_Block):
    kind: Literal["dyadic"] = "dyadic"
    levels: int = Field(8, ge=1, le=24)
    density_factor: int = Field(1, ge=1)


class RayPlan(_Block):
    kind: Literal["radial_ray"] = "radial_ray"
    angles: list[float] = Field(min_length=1)
    radii: list[Annotated[float, Field(ge=0, lt=1)]] = Field(min_length=1)


class CustomPlan(_Block):
    kind: Literal["custom"] = "custom"
    points: list[Complex] = Field(min_length=1)


PlanSpec = Annotated[Union[DyadicPlan, RayPlan, CustomPlan], Field(discriminator="kind")]


# -- models -----------------------------------------------------------------


class TaylorSpec(_Block):
    kind: Literal["taylor"] = "taylor"
    coefficients: list[Complex] = Field(min_length=1)


class RationalSpec(_Block):
    kind: Literal["rational"] = "rational"
    numerator: list[Complex] = Field(min_length=1)
    denominator: list[Complex] = Field(min_length=1)
    margin: float = Field(1e-6, ge=0)


class BlaschkeSpec(_Block):
    kind: Literal["blaschke"] = "blaschke"
    zeros: list[Complex] = Field(min_length=1)
    constant: Complex = 1.0


ModelSpec = Annotated[Union[TaylorSpec, RationalSpec, BlaschkeSpec], Field(discriminator="kind")]


# -- noise ------------------------------------------------------------------


class GaussianNoise(_Block):
    kind: Literal["gaussian"] = "gaussian"
    sigma: float = Field(0.1, gt=0, allow_inf_nan=False)


class UniformDiskNoise(_Block):
    kind: Literal["uniform_disk"] = "uniform_disk"
    radius: float = Field(0.1, gt=0, allow_inf_nan=False)


class GridNoise(_Block):
    kind: Literal["grid"] = "grid"
    cell_width: float = Field(gt=0, allow_inf_nan=False)
    weights: list[list[Annotated[float, Field(ge=0)]]] = Field(min_length=1)


class NoNoiseSpec(_Block):
    kind: Literal["none"] = "none"


NoiseSpec = Annotated[Union[GaussianNoise, UniformDiskNoise, GridNoise, NoNoiseSpec], Field(discriminator="kind")]


# -- parameter blocks -------------------------------------------------------


class FitSpec(_Block):
    degree: int = Field(15, ge=0, le=256)
    lam: float = Field(1e-3, ge=0, alias="lambda", allow_inf_nan=False)
    alpha: float = Field(0.5, ge=0, lt=1)
    validation_fraction: float = Field(0.0, ge=0, lt=1)

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class MeasureSpec(_Block):
    alpha: float = Field(0.5, gt=0, lt=1)
    grid_points: int = Field(256, ge=32, le=4096)
    kernel_mode: Literal["angular", "chordal"] = "angular"
    lattice: Optional[int] = Field(None, ge=32)
    tol: float = Field(1e-6, gt=0)
    max_iter: int = Field(200_000, ge=1)
    content_modes: list[Literal["exact_dp", "greedy", "brute_force"]] = ["exact_dp", "greedy"]


class CoverageSpec(_Block):
    grid: int = Field(4096, ge=64)
    threshold: Optional[int] = Field(None, ge=1)


class TrendSpec(_Block):
    divergent: float = 0.2
    convergent: float = 0.05


class KakutaniSpec(_Block):
    orthogonal_log: float = -30.0
    equivalence_tol: float = Field(1e-3, gt=0)
    min_decline: float = Field(0.05, gt=0)


def _default_model():
    return RationalSpec(numerator=[1.0], denominator=[1.0, -0.5])


def _default_alternative():
    return TaylorSpec(coefficients=[1.0, 0.5, 0.25])


class RunConfig(_Block):
    schema_version: Literal[1] = SCHEMA_VERSION
    command: Optional[Literal[COMMANDS]] = None
    seed: int = Field(0, ge=0, lt=2**64)
    set: SetSpec = Field(default_factory=CircleSet)
    gauge: GaugeSpec = Field(default_factory=PowerGauge)
    certify_threshold: float = Field(1e-9, ge=0)
    plan: PlanSpec = Field(default_factory=DyadicPlan)
    coverage: CoverageSpec = Field(default_factory=CoverageSpec)
    model: ModelSpec = Field(default_factory=_default_model)
    alternative: ModelSpec = Field(default_factory=_default_alternative)
    noise: NoiseSpec = Field(default_factory=GaussianNoise)
    prefix: Optional[int] = Field(None, ge=1)
    trend: TrendSpec = Field(default_factory=TrendSpec)
    kakutani: KakutaniSpec = Field(default_factory=KakutaniSpec)
    fit: FitSpec = Field(default_factory=FitSpec)
    observations: Optional[str] = None
    ladder: list[Annotated[int, Field(ge=1)]] = Field(default_factory=lambda: [100, 400, 1600], min_length=1)
    seeds: list[Annotated[int, Field(ge=0, lt=2**64)]] = Field(default_factory=lambda: list(range(20)), min_length=1)
    measure: MeasureSpec = Field(default_factory=MeasureSpec)

    @field_validator("ladder")
    @classmethod
    def _increasing(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("ladder must be strictly increasing")
        return v

    def effective(self) -> dict:
        """JSON-ready dict with every default spelled out."""
        return self.model_dump(mode="json", by_alias=True)


_TAGGED = {"set", "gauge", "plan", "model", "alternative", "noise"}


def field_path(loc: tuple) -> str:
    """Dotted field name from a pydantic error location, without union tags."""
    parts = list(loc)
    if len(parts) >= 2 and parts[0] in _TAGGED and isinstance(parts[1], str):
        # discriminated unions insert the tag value after the field name
        del parts[1]
    return ".".join(str(p) for p in parts)


def describe_errors(err: ValidationError) -> list:
    out = []
    for e in err.errors():
        path = field_path(e["loc"]) or "<root>"
        out.append(f"{path}: {e['msg']}")
    return out


def parse_config(data: dict) -> RunConfig:
    return RunConfig.model_validate(data)
