"""Command line interface.

Runs the sweep drivers in-process by default; with ``--server URL`` the same
request is POSTed to a running service instead and the response is written
locally. Exit codes: 0 success, 1 config/validation problem, 2 I/O problem.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx
from pydantic import ValidationError

from .errors import StarlocError
from .experiments import (
    ScenarioConfig,
    SweepRecord,
    load_config,
    run_design_compare,
    run_heatmap,
    run_snr_sweep,
    write_results,
)

_RUNNERS = {
    "snr-sweep": (run_snr_sweep, "/v1/sweeps/snr"),
    "heatmap": (run_heatmap, "/v1/sweeps/heatmap"),
    "design-compare": (run_design_compare, "/v1/sweeps/design-compare"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starloc",
        description="Position-error bound sweeps for surface-assisted "
        "indoor/outdoor localization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    help_lines = {
        "snr-sweep": "bounds across the SNR grid for each configured split pair",
        "heatmap": "bounds over the (eps1, eta1) grid at a fixed SNR",
        "design-compare": "structured vs random phase designs across SNR",
    }
    for name, text in help_lines.items():
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", type=Path, default=None, help="YAML scenario file (defaults apply when omitted)")
        cmd.add_argument("--out", type=Path, required=True, help="output file path")
        cmd.add_argument("--format", choices=("csv", "json"), default="csv")
        cmd.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")
        cmd.add_argument("--server", default=None, metavar="URL", help="delegate to a running service")
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _fetch_remote(
    url: str, route: str, cfg: ScenarioConfig, http_client: httpx.Client | None
) -> list[SweepRecord]:
    client = http_client or httpx.Client(base_url=url, timeout=600.0)
    try:
        response = client.post(route, json=cfg.model_dump(mode="json"))
        response.raise_for_status()
        return [SweepRecord.model_validate(r) for r in response.json()["records"]]
    finally:
        if http_client is None:
            client.close()


def main(argv: list[str] | None = None, http_client: httpx.Client | None = None) -> int:
    """Entry point; ``http_client`` is an injection hook for tests."""
    args = _build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    if args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return 1

    try:
        cfg = load_config(args.config) if args.config is not None else ScenarioConfig()
    except OSError as exc:
        print(f"error reading config: {exc}", file=sys.stderr)
        return 2
    except (StarlocError, ValidationError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1

    runner, route = _RUNNERS[args.command]
    try:
        if args.server is not None:
            records = _fetch_remote(args.server, route, cfg, http_client)
        else:
            records = runner(cfg, threads=args.threads)
    except httpx.HTTPStatusError as exc:
        detail = exc.response.text
        print(f"server rejected the request: {detail}", file=sys.stderr)
        return 1 if exc.response.status_code < 500 else 2
    except httpx.HTTPError as exc:
        print(f"could not reach server: {exc}", file=sys.stderr)
        return 2
    except (StarlocError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        write_results(records, args.out, args.format)
    except OSError as exc:
        print(f"error writing {args.out}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
