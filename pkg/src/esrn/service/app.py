"""FastAPI service exposing training, evaluation and verification runs."""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import workflows
from ..data_io import CheckpointError, DataError
from .schemas import (
    ContractionRequest,
    ContractionResponse,
    EvalRequest,
    EvalResponse,
    GenSynthRequest,
    GenSynthResponse,
    GradcheckRequest,
    GradcheckResponse,
    TrainRequest,
    TrainResponse,
)

app = FastAPI(title="esrn", version="0.1.0")


@app.exception_handler(ValueError)
async def _usage_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=422, content={"kind": "usage", "message": str(exc)})


@app.exception_handler(DataError)
async def _data_error(request: Request, exc: DataError):
    return JSONResponse(status_code=422, content={"kind": "data", "message": str(exc)})


@app.exception_handler(CheckpointError)
async def _checkpoint_error(request: Request, exc: CheckpointError):
    return JSONResponse(status_code=422, content={"kind": "data", "message": str(exc)})


@app.exception_handler(FileNotFoundError)
async def _missing_file(request: Request, exc: FileNotFoundError):
    return JSONResponse(status_code=422, content={"kind": "data", "message": str(exc)})


@app.exception_handler(FloatingPointError)
async def _numeric_error(request: Request, exc: FloatingPointError):
    return JSONResponse(status_code=500, content={"kind": "numeric", "message": str(exc)})


@app.exception_handler(RuntimeError)
async def _runtime_error(request: Request, exc: RuntimeError):
    return JSONResponse(status_code=500, content={"kind": "numeric", "message": str(exc)})


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/train", response_model=TrainResponse)
def train(req: TrainRequest):
    return workflows.run_train(req)


@app.post("/eval", response_model=EvalResponse)
def evaluate(req: EvalRequest):
    return workflows.run_eval(req)


@app.post("/gradcheck", response_model=GradcheckResponse)
def gradcheck(req: GradcheckRequest):
    return workflows.run_gradcheck(req)


@app.post("/contraction", response_model=ContractionResponse)
def contraction(req: ContractionRequest):
    return workflows.run_contraction(req)


@app.post("/gen-synth", response_model=GenSynthResponse)
def gen_synth(req: GenSynthRequest):
    return workflows.run_gen_synth(req)
