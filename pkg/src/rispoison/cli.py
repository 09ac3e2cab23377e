"""Thin command-line client for the experiment service.

By default requests are served by an in-process application instance (no
socket involved); pass --base-url to talk to a server started elsewhere with
`rispoison serve`. Exit codes: 0 success, 1 config error, 2 numerical
divergence in all seeds, 3 I/O error.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_IO = 3


class ServiceError(RuntimeError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code

    @property
    def exit_code(self) -> int:
        return EXIT_DIVERGENCE if self.code == "divergence" else EXIT_CONFIG


class ServiceClient:
    """POSTs to a running server, or drives the app in-process when no URL is given."""

    def __init__(self, base_url: str | None = None):
        self.base_url = base_url
        self._app = None
        if base_url is None:
            from .service import create_app

            self._app = create_app()

    def post(self, path: str, payload: dict) -> dict:
        if self.base_url is not None:
            resp = httpx.post(self.base_url.rstrip("/") + path, json=payload, timeout=None)
        else:
            resp = asyncio.run(self._post_inprocess(path, payload))
        if resp.status_code != 200:
            detail = {}
            try:
                detail = resp.json().get("detail", {})
            except ValueError:
                pass
            if isinstance(detail, dict) and "code" in detail:
                raise ServiceError(detail["code"], detail.get("message", ""))
            raise ServiceError("internal", resp.text)
        return resp.json()

    async def _post_inprocess(self, path: str, payload: dict) -> httpx.Response:
        transport = httpx.ASGITransport(app=self._app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://service") as client:
            return await client.post(path, json=payload, timeout=None)


def _read_config_text(path: str | None) -> str:
    if path is None:
        return ""
    return Path(path).read_text(encoding="utf-8")


def _collect_overrides(args) -> dict[str, str]:
    overrides = dict(kv.split("=", 1) for kv in (args.set or []))
    overrides = {k.strip(): v.strip() for k, v in overrides.items()}
    if getattr(args, "seeds", None):
        overrides["run.seeds"] = args.seeds
    if getattr(args, "workers", None):
        overrides["run.workers"] = str(args.workers)
    return overrides


def _out_dir(args, payload_overrides: dict[str, str]) -> Path:
    if args.out:
        return Path(args.out)
    return Path(payload_overrides.get("run.out_dir", "out"))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _config_payload(args) -> dict:
    return {"config_text": _read_config_text(args.config),
            "overrides": _collect_overrides(args)}


def cmd_run(args, client: ServiceClient) -> int:
    payload = {"config": _config_payload(args), "include_traces": True}
    body = client.post("/run", payload)
    out = _out_dir(args, payload["config"]["overrides"])
    for trace in body["traces"]:
        _write(out / f"trace_seed{trace['seed']}.csv", trace["csv"])
    if body["curve_csv"]:
        _write(out / "curve.csv", body["curve_csv"])
    _write(out / "summary.txt", body["summary_text"])
    print(body["summary_text"], end="")
    return EXIT_OK


def cmd_sweep(args, client: ServiceClient) -> int:
    payload = {"config": _config_payload(args), "axis": args.axis,
               "values": [v.strip() for v in args.values.split(",") if v.strip()]}
    body = client.post("/sweep", payload)
    out = _out_dir(args, payload["config"]["overrides"])
    _write(out / "sweep.csv", body["csv"])
    _write(out / "summary.txt", body["summary_text"])
    print(body["summary_text"], end="")
    return EXIT_OK


def cmd_compare(args, client: ServiceClient) -> int:
    payload = {"config": _config_payload(args),
               "kinds": [k.strip() for k in args.kinds.split(",") if k.strip()]}
    body = client.post("/compare", payload)
    out = _out_dir(args, payload["config"]["overrides"])
    _write(out / "summary.txt", body["summary_text"])
    print(body["summary_text"], end="")
    return EXIT_OK


def cmd_aggregate(args, client: ServiceClient) -> int:
    traces = [Path(p).read_text(encoding="utf-8") for p in args.traces]
    body = client.post("/aggregate", {"traces": traces, "ma_window": args.window})
    out = Path(args.out) if args.out else Path("out")
    _write(out / "curve.csv", body["csv"])
    print(f"wrote {out / 'curve.csv'}")
    return EXIT_OK


def cmd_serve(args, client: ServiceClient) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rispoison",
        description="SAC training in a RIS-aided underlay CRN under reward poisoning")
    parser.add_argument("--base-url", default=None,
                        help="URL of a running service; default runs in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--out", help="output directory (overrides run.out_dir)")
        p.add_argument("--seeds", help="seed list or range, e.g. 0,1,2 or 0..9")
        p.add_argument("--workers", type=int, help="parallel seed workers")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="extra config override (repeatable)")

    p_run = sub.add_parser("run", help="train all seeds for one config")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True,
                         help="attack.delta | attack.p | env.R | attack.kind")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="compare attack kinds on shared seeds")
    common(p_cmp)
    p_cmp.add_argument("--kinds", required=True, help="comma-separated attack kinds")
    p_cmp.set_defaults(func=cmd_compare)

    p_agg = sub.add_parser("aggregate", help="aggregate existing trace CSVs")
    p_agg.add_argument("traces", nargs="+", help="trace_seed*.csv files")
    p_agg.add_argument("--out", help="output directory")
    p_agg.add_argument("--window", type=int, default=200, help="moving-average window")
    p_agg.set_defaults(func=cmd_aggregate)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        client = ServiceClient(args.base_url)
        return args.func(args, client)
    except ServiceError as e:
        print(f"error ({e.code}): {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
