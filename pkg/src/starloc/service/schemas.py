"""Request/response bodies of the HTTP service."""

from __future__ import annotations

import math

from pydantic import BaseModel, Field

from ..experiments import ScenarioConfig, SweepRecord
from ..surface import DesignKind


class HealthResponse(BaseModel):
    status: str
    version: str


class SweepResponse(BaseModel):
    records: list[SweepRecord]


class PointRequest(BaseModel):
    """Single bound evaluation at one operating point."""

    config: ScenarioConfig = Field(default_factory=ScenarioConfig)
    snr_db: float = 15.0
    eps1: float = Field(default=math.sqrt(0.5), gt=0.0, lt=1.0)
    eta1: float = Field(default=math.sqrt(0.5), gt=0.0, lt=1.0)
    design: DesignKind | None = None
    seed: int | None = None
