"""Pydantic request/response models for the HTTP service."""

from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SynthFields(StrictModel):
    task: str = "context_window"
    T: int = 50
    num_sequences: int = 10
    n_input: int = 3
    n_classes: int = 4
    context_span: int = 2
    noise_std: float = 0.1


class TrainRequest(StrictModel):
    # model
    n_hidden: int
    delta1: int = 0
    delta2: int = 0
    nonlin: str = "sigmoid"
    output_head: str = "softmax"
    # optimizer
    optimizer: str = "primal_dual"  # or "clipping"
    mu0: float = 0.1
    schedule: str = "constant"
    momentum: float = 0.0
    dual_mu_scale: float = 1.0
    variant: str = "shrinkage"
    threshold: float = 1.0
    epochs: int = 10
    batch: int = 1
    seed: int = 0
    # data: either a manifest path or an inline synthetic spec
    manifest: Optional[str] = None
    synth: Optional[SynthFields] = None
    # outputs
    checkpoint_out: Optional[str] = None
    report_out: Optional[str] = None


class EpochReport(StrictModel):
    epoch: int
    mean_cost: float
    frame_error: float
    inf_norm_w: float
    max_lambda: float
    mean_lambda: float
    clip_events: int
    wall_ms: float


class TrainResponse(StrictModel):
    epochs_run: int
    final: Optional[EpochReport]
    checkpoint_out: Optional[str]
    report_out: Optional[str]


class EvalRequest(StrictModel):
    checkpoint: str
    manifest: str


class EvalResponse(StrictModel):
    frame_error: float


class GradcheckRequest(StrictModel):
    seed: int = 0
    configs_per_case: int = 3
    eps: float = 1e-5
    tolerance: float = 1e-6
    perturb: bool = False  # debug: corrupt one gradient entry to prove the harness bites


class GradcheckCase(StrictModel):
    nonlin: str
    output_head: str
    delta1: int
    delta2: int
    n_hidden: int
    n_input: int
    n_out: int
    T: int
    rel_error: float


class GradcheckResponse(StrictModel):
    cases: List[GradcheckCase]
    max_rel_error: float
    passed: bool


class ContractionRequest(StrictModel):
    checkpoint: str
    steps: int = 100
    seed: int = 0


class ContractionRow(StrictModel):
    t: int
    gap: float
    bound: float


class ContractionResponse(StrictModel):
    inf_norm: float
    bound: float
    sufficient: bool
    satisfied: bool
    rows: List[ContractionRow]


class GenSynthRequest(StrictModel):
    synth: SynthFields = SynthFields()
    seed: int = 0
    out_dir: str


class GenSynthResponse(StrictModel):
    manifest: str
    files_written: int


class ErrorBody(StrictModel):
    kind: str  # "usage" | "data" | "numeric"
    message: str
