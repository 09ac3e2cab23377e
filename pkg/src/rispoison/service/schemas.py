"""Request/response models for the experiment service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ConfigPayload(BaseModel):
    """A run configuration: `key = value` text plus optional dotted-key overrides."""

    config_text: str = ""
    overrides: dict[str, str] = Field(default_factory=dict)


class SeedSummary(BaseModel):
    seed: int
    failed: bool
    failure_reason: str | None = None
    steps: int
    total_fires: int
    fire_rate: float
    final_mean_rate: float | None = None
    mean_eval_rate_tail: float | None = None
    mean_random_rate_tail: float | None = None


class CurveModel(BaseModel):
    t: list[int]
    mean: list[float]
    std: list[float]


class SeedTrace(BaseModel):
    seed: int
    csv: str


class RunRequest(BaseModel):
    config: ConfigPayload = Field(default_factory=ConfigPayload)
    include_traces: bool = True


class RunResponse(BaseModel):
    summaries: list[SeedSummary]
    curve: CurveModel | None
    curve_csv: str | None
    traces: list[SeedTrace]
    summary_text: str


class SweepRequest(BaseModel):
    config: ConfigPayload = Field(default_factory=ConfigPayload)
    axis: str
    values: list[str]


class SweepRowModel(BaseModel):
    value: str
    final_mean: float
    final_std: float
    n_seeds_ok: int


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]
    csv: str
    summary_text: str


class CompareRequest(BaseModel):
    config: ConfigPayload = Field(default_factory=ConfigPayload)
    kinds: list[str]


class CompareRowModel(BaseModel):
    kind: str
    final_mean: float
    final_std: float
    fire_rate: float
    n_seeds_ok: int


class PairwiseModel(BaseModel):
    first: str
    second: str
    mean_diff: float
    seeds_first_below: int
    n_seeds: int


class CompareResponse(BaseModel):
    rows: list[CompareRowModel]
    pairwise: list[PairwiseModel]
    summary_text: str


class AggregateRequest(BaseModel):
    traces: list[str]
    ma_window: int = 200


class AggregateResponse(BaseModel):
    curve: CurveModel
    csv: str


class HealthResponse(BaseModel):
    status: str
    version: str
