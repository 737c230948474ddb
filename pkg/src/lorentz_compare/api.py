"""HTTP service: one POST endpoint per command plus GET /health.

Run with ``uvicorn lorentz_compare.api:app``.  Request bodies are the
request models of :mod:`lorentz_compare.schemas`; invalid input and
domain errors answer 422 with the message in ``detail``.
"""

from fastapi import FastAPI, HTTPException

from . import __version__
from .schemas import REQUESTS, CommandResponse, Health
from .workflows import CSV_COLUMNS, respond

app = FastAPI(title="lorentz_compare", version=__version__,
              description="Lorentzian comparison geometry on warped-product spacetimes.")


@app.get("/health", response_model=Health)
def health() -> Health:
    return Health(version=__version__)


def _register(command: str, model: type) -> None:
    def endpoint(request: model, jobs: int = 1, dry_run: bool = False) -> CommandResponse:
        try:
            return respond(command, request, jobs=max(1, jobs), dry_run=dry_run)
        except (ValueError, ArithmeticError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except RuntimeError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc

    endpoint.__name__ = f"run_{command}"
    app.post(f"/{command}", response_model=CommandResponse,
             summary=f"Run {command}", description=f"CSV columns: {CSV_COLUMNS[command]}")(endpoint)


for _command, _model in REQUESTS.items():
    _register(_command, _model)
