"""Batch front-end: JSON in, reproducible JSON/CSV artifacts out.

Every subcommand posts a request to the computation service. By default the
service runs in-process; pass --server to talk to a remote instance. Exit
codes: 0 success, 1 internal error, 2 invalid input or failed precondition.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import click

from . import __version__

CACHE_ENV = "FRACTAL_FRAMES_CACHE"


def _client(server: str | None):
    import httpx

    if server:
        return httpx.Client(base_url=server)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _dump(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n")


def _load_payload(input_file, inline):
    if (input_file is None) == (inline is None):
        raise click.UsageError("give exactly one of --input or --inline")
    try:
        if input_file is not None:
            return json.loads(Path(input_file).read_text())
        return json.loads(inline)
    except json.JSONDecodeError as exc:
        click.echo(f"error: malformed JSON: {exc}", err=True)
        raise SystemExit(2)


class JobRunner:
    def __init__(self, command: str, payload: dict, out: Path, server: str | None):
        self.command = command
        self.payload = payload
        self.out = out
        self.server = server

    def run(self, tolerances: dict | None = None, csv_rows=None) -> int:
        self.out.mkdir(parents=True, exist_ok=True)
        started = time.time()
        with _client(self.server) as client:
            resp = client.post(f"/{self.command}", json=self.payload)
        wall_ms = (time.time() - started) * 1000.0
        if resp.status_code >= 400:
            try:
                detail = resp.json()
            except json.JSONDecodeError:
                detail = {"error": resp.text}
            _dump(self.out / "error.json", detail)
            click.echo(f"error: {detail.get('error', detail)}", err=True)
            return 2 if resp.status_code == 422 else 1
        result = resp.json()
        manifest = {
            "tool_version": __version__,
            "command": self.command,
            "command_line": " ".join(sys.argv),
            "input_hash": hashlib.sha256(_canonical(self.payload).encode()).hexdigest(),
            "tolerances": tolerances or {},
            # wall time is the only non-deterministic field; it lives here and
            # never in result files
            "wall_time_ms": wall_ms,
        }
        result_doc = {"manifest_file": "manifest.json", "result": result}
        _dump(self.out / "result.json", result_doc)
        _dump(self.out / "manifest.json", manifest)
        if csv_rows is not None:
            header, rows = csv_rows(result)
            with open(self.out / "table.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)
        click.echo(str(self.out / "result.json"))
        return 0


def _run(command, payload, out, server, tolerances=None, csv_rows=None):
    code = JobRunner(command, payload, Path(out), server).run(
        tolerances=tolerances, csv_rows=csv_rows
    )
    raise SystemExit(code)


_server_opt = click.option("--server", default=None, help="Remote service URL.")
_out_opt = click.option("--out", default="out", show_default=True, help="Output dir.")
_input_opts = [
    click.option("--input", "input_file", type=click.Path(exists=True), default=None),
    click.option("--inline", default=None, help="Inline JSON payload."),
]


def _with_payload(f):
    for opt in _input_opts:
        f = opt(f)
    return _out_opt(_server_opt(f))


@click.group()
@click.version_option(__version__)
def main():
    """Exponential frames and Riesz sequences for fractal measures."""


@main.command("check-triple")
@_with_payload
def check_triple(input_file, inline, out, server):
    """Classify a triple (R, B, L) and report frame/Riesz bounds."""
    payload = _load_payload(input_file, inline)
    _run("check-triple", payload, out, server, tolerances={"rank_tol": 1e-10})


@main.command("tower-report")
@_with_payload
@click.option("--levels", type=int, default=None, help="Override levels field.")
def tower_report(input_file, inline, out, server, levels):
    """Per-level bounds, products, concatenation, and exactness verdict."""
    payload = _load_payload(input_file, inline)
    if levels is not None:
        payload["levels"] = levels
    _run(
        "tower-report",
        payload,
        out,
        server,
        tolerances={"bracket_slack": 1e-8, "target_error": payload.get("target_error", 1e-10)},
    )


@main.command("spectrum")
@_with_payload
def spectrum(input_file, inline, out, server):
    """Enumerate the spectrum Lambda up to a level or radius."""
    payload = _load_payload(input_file, inline)
    cached = _cache_lookup("spectrum", payload)
    if cached is not None:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _dump(out_dir / "result.json", cached)
        _dump(
            out_dir / "manifest.json",
            {
                "tool_version": __version__,
                "command": "spectrum",
                "command_line": " ".join(sys.argv),
                "input_hash": hashlib.sha256(_canonical(payload).encode()).hexdigest(),
                "tolerances": {},
                "wall_time_ms": 0.0,
                "cache_hit": True,
            },
        )
        click.echo(str(out_dir / "result.json"))
        raise SystemExit(0)

    def table(result):
        return ["index"] + [f"x{i}" for i in range(len(result["points"][0]) if result["points"] else 1)], [
            [i] + list(p) for i, p in enumerate(result["points"])
        ]

    code = JobRunner("spectrum", payload, Path(out), server).run(csv_rows=table)
    if code == 0:
        doc = json.loads((Path(out) / "result.json").read_text())
        _cache_store("spectrum", payload, doc)
    raise SystemExit(code)


@main.command("tail-delta")
@_with_payload
def tail_delta(input_file, inline, out, server):
    """Lower-estimate (and try to certify) delta(Lambda)."""
    payload = _load_payload(input_file, inline)
    _run(
        "tail-delta",
        payload,
        out,
        server,
        tolerances={"target_error": payload.get("target_error", 1e-10)},
    )


@main.command("muhat")
@_with_payload
def muhat(input_file, inline, out, server):
    """Evaluate the measure transform on a list of frequencies (CSV table)."""
    payload = _load_payload(input_file, inline)

    def table(result):
        return ("xi", "re", "im", "error_bound"), [
            (r["xi"], r["re"], r["im"], r["error_bound"]) for r in result["rows"]
        ]

    _run(
        "muhat",
        payload,
        out,
        server,
        tolerances={"target_error": payload.get("target_error", 1e-10)},
        csv_rows=table,
    )


@main.command("search-riesz")
@_with_payload
@click.option("--epsilon", type=float, default=None)
@click.option("--strategy", default=None)
def search_riesz(input_file, inline, out, server, epsilon, strategy):
    """Search a large frequency set with Riesz bounds 1 +/- epsilon."""
    payload = _load_payload(input_file, inline)
    if epsilon is not None:
        payload["epsilon"] = epsilon
    if strategy is not None:
        payload["strategy"] = strategy
    _run("search-riesz", payload, out, server, tolerances={"bound_tol": 1e-9})


@main.command("schedule-57")
@_with_payload
@click.option("--max-k", type=int, default=None)
def schedule_57(input_file, inline, out, server, max_k):
    """Grouped maximal-dimension schedule for a self-similar measure."""
    payload = _load_payload(input_file, inline)
    if max_k is not None:
        payload["max_k"] = max_k
    _run("schedule-57", payload, out, server)


@main.command("beurling")
@_with_payload
@click.option("--alpha-grid", default=None, help="Comma-separated alphas.")
@click.option("--radii", default=None, help="Comma-separated radii.")
def beurling(input_file, inline, out, server, alpha_grid, radii):
    """Beurling density over an alpha grid plus a dimension estimate."""
    payload = _load_payload(input_file, inline)
    if alpha_grid:
        payload["alpha_grid"] = [float(x) for x in alpha_grid.split(",")]
    if radii:
        payload["radii"] = [float(x) for x in radii.split(",")]

    def table(result):
        return ("h", "count"), list(zip(result["radii"], result["counts"]))

    _run("beurling", payload, out, server, csv_rows=table)


@main.command("witness")
@_with_payload
def witness(input_file, inline, out, server):
    """Exactness or incompleteness witness step function."""
    payload = _load_payload(input_file, inline)
    _run(
        "witness",
        payload,
        out,
        server,
        tolerances={"residual_tol": 1e-10, "bound_slack": 1e-8},
    )


@main.command("validate")
@click.argument("command_name")
@_with_payload
def validate(command_name, input_file, inline, out, server):
    """Diagnostics for a payload without running it; exit 0 either way."""
    payload = _load_payload(input_file, inline)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with _client(server) as client:
        resp = client.post(
            "/validate", json={"command": command_name, "payload": payload}
        )
    if resp.status_code >= 400:
        click.echo(f"error: {resp.text}", err=True)
        raise SystemExit(1)
    doc = resp.json()
    _dump(out_dir / "diagnostics.json", doc)
    for d in doc["diagnostics"]:
        click.echo(d)
    raise SystemExit(0)


def _cache_dir() -> Path | None:
    root = os.environ.get(CACHE_ENV)
    return Path(root) if root else None


def _cache_key(command: str, payload: dict) -> str:
    return hashlib.sha256((command + "\n" + _canonical(payload)).encode()).hexdigest()


def _cache_lookup(command: str, payload: dict):
    root = _cache_dir()
    if root is None:
        return None
    path = root / f"{_cache_key(command, payload)}.json"
    if path.exists():
        return json.loads(path.read_text())
    return None


def _cache_store(command: str, payload: dict, doc) -> None:
    root = _cache_dir()
    if root is None:
        return
    root.mkdir(parents=True, exist_ok=True)
    path = root / f"{_cache_key(command, payload)}.json"
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(doc, indent=2) + "\n")
    tmp.replace(path)


if __name__ == "__main__":
    main()
