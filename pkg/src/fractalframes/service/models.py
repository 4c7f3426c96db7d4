"""Request/response schemas for the computation service.

Integer vectors may be given as bare ints (dimension 1) or as lists; complex
numbers are serialized as [re, im] pairs throughout.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..lattice import DigitSet, ExpandingMatrix
from ..towers import Tower, TowerLevel

IntVec = int | list[int]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _vec(v: IntVec) -> tuple[int, ...]:
    return (v,) if isinstance(v, int) else tuple(v)


class TripleSpec(StrictModel):
    R: list[list[int]]
    B: list[IntVec]
    L: list[IntVec]

    def matrix(self) -> ExpandingMatrix:
        return ExpandingMatrix(tuple(tuple(r) for r in self.R))

    def digits(self) -> DigitSet:
        return DigitSet(tuple(_vec(b) for b in self.B))

    def freqs(self) -> DigitSet:
        return DigitSet(tuple(_vec(l) for l in self.L))


class LevelSpec(StrictModel):
    R: list[list[int]]
    B: list[IntVec]
    L: list[IntVec]


class TowerSpec(StrictModel):
    levels: list[LevelSpec]
    kind: Literal["frame", "riesz"]
    mode: Literal["finite", "periodic"] = "periodic"

    def build(self) -> Tower:
        return Tower(
            levels=tuple(
                TowerLevel(
                    R=ExpandingMatrix(tuple(tuple(r) for r in lev.R)),
                    B=DigitSet(tuple(_vec(b) for b in lev.B)),
                    L=DigitSet(tuple(_vec(l) for l in lev.L)),
                )
                for lev in self.levels
            ),
            kind=self.kind,
            mode=self.mode,
        )


class CheckTripleRequest(StrictModel):
    triple: TripleSpec


class TowerReportRequest(StrictModel):
    tower: TowerSpec
    levels: int = Field(ge=1)
    certify_delta: bool = True
    target_error: float = 1e-10


class SpectrumRequest(StrictModel):
    tower: TowerSpec
    up_to_level: Optional[int] = Field(default=None, ge=0)
    radius: Optional[float] = None

    @field_validator("radius")
    @classmethod
    def _positive_radius(cls, v):
        if v is not None and v <= 0:
            raise ValueError("radius must be positive")
        return v


class TailDeltaRequest(StrictModel):
    tower: TowerSpec
    max_level: int = Field(default=6, ge=1)
    target_error: float = 1e-10
    certify: bool = True


class MuhatRequest(StrictModel):
    tower: TowerSpec
    xis: list[float]
    target_error: float = 1e-10


class SearchRieszRequest(StrictModel):
    R: list[list[int]]
    B: list[IntVec]
    epsilon: float = Field(gt=0.0, lt=1.0, description="epsilon must lie in (0,1)")
    strategy: Literal["exhaustive", "greedy", "greedy+local-swap"] = "exhaustive"
    exhaustive_threshold: int = 16
    partition: bool = False


class Schedule57Request(StrictModel):
    R: list[list[int]]
    B: list[IntVec]
    max_k: int = Field(ge=0)
    epsilons: Optional[list[float]] = None


class BeurlingRequest(StrictModel):
    points: list[IntVec]
    alpha_grid: list[float]
    radii: list[float]
    centers: Optional[list[list[float]]] = None


class WitnessRequest(StrictModel):
    tower: TowerSpec
    witness_kind: Literal["exactness", "incompleteness"]
    level: int = Field(ge=0)
    lam0: Optional[IntVec] = None


class ValidateRequest(StrictModel):
    command: str
    payload: dict
