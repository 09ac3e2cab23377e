"""FastAPI service wrapping the experiment harness.

Endpoints mirror the CLI subcommands; responses carry both structured data
and ready-to-write CSV text so clients stay thin. Errors are reported with a
machine-readable code: "config" for bad inputs, "divergence" when every
requested seed failed numerically.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..harness.aggregate import AggregateCurve, aggregate, final_mean_rate
from ..harness.config import ConfigError, RunConfig, parse_config
from ..harness.experiments import compare_attacks, run_sweep, sweep_csv
from ..harness.runner import RunLog, run_many
from .schemas import (
    AggregateRequest, AggregateResponse, CompareRequest, CompareResponse,
    CompareRowModel, ConfigPayload, CurveModel, HealthResponse, PairwiseModel,
    RunRequest, RunResponse, SeedSummary, SeedTrace, SweepRequest,
    SweepResponse, SweepRowModel,
)


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _parse(payload: ConfigPayload) -> RunConfig:
    try:
        return parse_config(payload.config_text, payload.overrides)
    except ConfigError as e:
        raise _error(400, "config", str(e))


def _curve_model(curve: AggregateCurve) -> CurveModel:
    return CurveModel(t=[int(v) for v in curve.t],
                      mean=list(curve.mean), std=list(curve.std))


def _summaries(logs: list[RunLog], ma_window: int) -> list[SeedSummary]:
    out = []
    for log in logs:
        tail = max(1, len(log) // 10)
        out.append(SeedSummary(
            seed=log.seed, failed=log.failed, failure_reason=log.failure_reason,
            steps=len(log), total_fires=log.total_fires, fire_rate=log.fire_rate,
            final_mean_rate=None if log.failed else final_mean_rate(log, ma_window),
            mean_eval_rate_tail=None if log.failed else log.mean_eval_rate(tail),
            mean_random_rate_tail=None if log.failed else log.mean_random_rate(tail),
        ))
    return out


def _run_summary_text(summaries: list[SeedSummary]) -> str:
    lines = ["run summary"]
    for s in summaries:
        if s.failed:
            lines.append(f"  seed {s.seed}: FAILED ({s.failure_reason})")
        else:
            lines.append(f"  seed {s.seed}: final_mean_rate={s.final_mean_rate:.4f} "
                         f"fires={s.total_fires} fire_rate={s.fire_rate:.4f}")
    ok = [s for s in summaries if not s.failed]
    if ok:
        mean = sum(s.final_mean_rate for s in ok) / len(ok)
        lines.append(f"  cross-seed final_mean_rate={mean:.4f} over {len(ok)} seeds")
    return "\n".join(lines) + "\n"


def create_app() -> FastAPI:
    app = FastAPI(title="rispoison service", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        cfg = _parse(req.config)
        logs = run_many(cfg)
        summaries = _summaries(logs, cfg.ma_window)
        ok = [log for log in logs if not log.failed]
        if not ok:
            raise _error(422, "divergence", "all seeds diverged")
        curve = aggregate(ok, cfg.ma_window)
        traces = ([SeedTrace(seed=log.seed, csv=log.to_trace_csv()) for log in logs]
                  if req.include_traces else [])
        return RunResponse(summaries=summaries, curve=_curve_model(curve),
                           curve_csv=curve.to_csv(), traces=traces,
                           summary_text=_run_summary_text(summaries))

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        cfg = _parse(req.config)
        try:
            rows = run_sweep(cfg, req.axis, req.values)
        except ConfigError as e:
            raise _error(400, "config", str(e))
        if all(r.n_seeds_ok == 0 for r in rows):
            raise _error(422, "divergence", "all seeds diverged in every sweep cell")
        text = "sweep over " + req.axis + "\n" + "".join(
            f"  {r.value}: final_mean={r.final_mean:.4f} final_std={r.final_std:.4f} "
            f"seeds_ok={r.n_seeds_ok}\n" for r in rows)
        return SweepResponse(
            rows=[SweepRowModel(value=r.value, final_mean=r.final_mean,
                                final_std=r.final_std, n_seeds_ok=r.n_seeds_ok)
                  for r in rows],
            csv=sweep_csv(rows), summary_text=text)

    @app.post("/compare", response_model=CompareResponse)
    def compare(req: CompareRequest) -> CompareResponse:
        cfg = _parse(req.config)
        try:
            report = compare_attacks(cfg, req.kinds)
        except ConfigError as e:
            raise _error(400, "config", str(e))
        if all(len(v) == 0 for v in report.finals.values()):
            raise _error(422, "divergence", "all seeds diverged for every kind")
        rows = [CompareRowModel(kind=k, final_mean=report.means[k],
                                final_std=report.stds[k],
                                fire_rate=report.fire_rates[k],
                                n_seeds_ok=len(report.finals[k]))
                for k in report.kinds]
        pairwise = [PairwiseModel(first=a, second=b, mean_diff=d,
                                  seeds_first_below=n_below, n_seeds=n)
                    for a, b, d, n_below, n in report.pairwise]
        return CompareResponse(rows=rows, pairwise=pairwise,
                               summary_text=report.to_text())

    @app.post("/aggregate", response_model=AggregateResponse)
    def aggregate_traces(req: AggregateRequest) -> AggregateResponse:
        try:
            logs = [RunLog.from_trace_csv(text) for text in req.traces]
            curve = aggregate(logs, req.ma_window)
        except ValueError as e:
            raise _error(400, "config", str(e))
        return AggregateResponse(curve=_curve_model(curve), csv=curve.to_csv())

    return app
