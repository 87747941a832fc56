"""HTTP service exposing the four run commands.

Each endpoint accepts the same strict configuration schema as the YAML files,
executes the run, and returns the summary together with the artifact listing.
The CLI talks to this app in-process by default; ``uvicorn solwave.service:app``
serves it over the network.
"""

from __future__ import annotations

import tempfile

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .config import ConfigError, RunConfig
from .runner import run

__all__ = ["app", "RunRequest", "RunResponse"]


class RunRequest(BaseModel):
    config: RunConfig
    persist: bool = True


class RunResponse(BaseModel):
    command: str
    passed: bool
    summary: dict
    files: list[str]
    output_dir: str


app = FastAPI(title="solwave", version="0.1.0")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


def _execute(request: RunRequest, command: str) -> RunResponse:
    cfg = request.config.model_copy(update={"command": command})
    if not request.persist:
        cfg = cfg.model_copy(update={"output_dir": tempfile.mkdtemp(prefix="solwave_")})
    try:
        outcome = run(cfg)
    except (ConfigError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return RunResponse(
        command=command,
        passed=outcome.exit_code == 0,
        summary=outcome.summary,
        files=outcome.files,
        output_dir=cfg.output_dir,
    )


@app.post("/solve", response_model=RunResponse)
def solve_endpoint(request: RunRequest) -> RunResponse:
    return _execute(request, "solve")


@app.post("/sweep", response_model=RunResponse)
def sweep_endpoint(request: RunRequest) -> RunResponse:
    return _execute(request, "sweep")


@app.post("/evolve", response_model=RunResponse)
def evolve_endpoint(request: RunRequest) -> RunResponse:
    return _execute(request, "evolve")


@app.post("/probe", response_model=RunResponse)
def probe_endpoint(request: RunRequest) -> RunResponse:
    return _execute(request, "probe")
