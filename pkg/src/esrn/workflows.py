"""Workflows behind the service endpoints.

Each run derives all randomness from one root seed, split in a fixed order
into (init, shuffle, synth) streams so reruns are bit-identical.
"""

import math
from pathlib import Path

import numpy as np

from .clipping import ClipConfig, train_clipped
from .data_io import (
    Checkpoint,
    load_checkpoint,
    load_dataset,
    load_manifest,
    save_checkpoint,
    save_manifest,
    save_sequence,
    write_report_log,
)
from .echo_state import check_sufficient, init_params, verify_contraction
from .gradients import backprop, finite_diff
from .model import ArmaConfig, ModelParams, Sequence, forward
from .primal_dual import PdConfig, train
from .tasks import SynthSpec, frame_error, generate
from .service.schemas import (
    ContractionRequest,
    ContractionResponse,
    ContractionRow,
    EpochReport,
    EvalRequest,
    EvalResponse,
    GenSynthRequest,
    GenSynthResponse,
    GradcheckCase,
    GradcheckRequest,
    GradcheckResponse,
    TrainRequest,
    TrainResponse,
)

OPTIMIZERS = ("primal_dual", "clipping")


def _split_seed(seed):
    """Fixed stream order: init, shuffle, synth."""
    init_ss, shuffle_ss, synth_ss = np.random.SeedSequence(seed).spawn(3)
    return init_ss, int(shuffle_ss.generate_state(1)[0]), int(synth_ss.generate_state(1)[0])


def _report_to_schema(r):
    return EpochReport(
        epoch=r.epoch, mean_cost=r.mean_cost, frame_error=r.frame_error,
        inf_norm_w=r.inf_norm_w, max_lambda=r.max_lambda,
        mean_lambda=r.mean_lambda, clip_events=r.clip_events, wall_ms=r.wall_ms,
    )


def run_train(req: TrainRequest) -> TrainResponse:
    if req.optimizer not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {req.optimizer!r}")
    if (req.manifest is None) == (req.synth is None):
        raise ValueError("exactly one of 'manifest' or synthetic task fields required")
    cfg = ArmaConfig(
        delta1=req.delta1, delta2=req.delta2,
        nonlin=req.nonlin, output_head=req.output_head,
    )
    init_ss, shuffle_seed, synth_seed = _split_seed(req.seed)
    if req.manifest is not None:
        man = load_manifest(req.manifest)
        data = load_dataset(man)
        n_input, n_classes = man.n_input, man.n_classes
    else:
        spec = SynthSpec(seed=synth_seed, **req.synth.model_dump())
        data = generate(spec)
        n_input, n_classes = spec.n_input, spec.n_classes

    params = init_params(req.n_hidden, n_input, n_classes, cfg, np.random.default_rng(init_ss))
    if req.optimizer == "primal_dual":
        pd = PdConfig(
            mu0=req.mu0, schedule=req.schedule, momentum=req.momentum,
            dual_mu_scale=req.dual_mu_scale, variant=req.variant,
            epochs=req.epochs, batch=req.batch, seed=shuffle_seed,
        )
        final, reports, dual = train(params, data, cfg, pd)
        lam = dual.lam
    else:
        cc = ClipConfig(
            threshold=req.threshold, mu0=req.mu0, schedule=req.schedule,
            momentum=req.momentum, epochs=req.epochs, batch=req.batch,
            seed=shuffle_seed,
        )
        final, reports = train_clipped(params, data, cfg, cc)
        lam = np.zeros(req.n_hidden)

    iteration = req.epochs * math.ceil(len(data) / req.batch)
    if req.checkpoint_out:
        save_checkpoint(req.checkpoint_out, Checkpoint(
            cfg=cfg, params=final, lam=lam, iteration=iteration, n_input=n_input,
        ))
    if req.report_out:
        write_report_log(req.report_out, reports)
    return TrainResponse(
        epochs_run=len(reports),
        final=_report_to_schema(reports[-1]) if reports else None,
        checkpoint_out=req.checkpoint_out,
        report_out=req.report_out,
    )


def run_eval(req: EvalRequest) -> EvalResponse:
    ckpt = load_checkpoint(req.checkpoint)
    man = load_manifest(req.manifest)
    if man.n_input != ckpt.n_input or man.n_classes != ckpt.params.n_out:
        raise ValueError(
            f"manifest dims ({man.n_input} inputs, {man.n_classes} classes) do not "
            f"match checkpoint dims ({ckpt.n_input} inputs, {ckpt.params.n_out} classes)"
        )
    data = load_dataset(man)
    return EvalResponse(frame_error=frame_error(ckpt.params, ckpt.cfg, data))


# (delta1, delta2) cases covered by the gradient check: plain and windowed
GRADCHECK_WINDOWS = ((0, 0), (2, 3))


def run_gradcheck(req: GradcheckRequest) -> GradcheckResponse:
    rng = np.random.default_rng(req.seed)
    cases = []
    worst = 0.0
    first = True
    for nonlin in ("sigmoid", "tanh"):
        for head in ("linear", "softmax"):
            for d1, d2 in GRADCHECK_WINDOWS:
                for _ in range(req.configs_per_case):
                    cfg = ArmaConfig(delta1=d1, delta2=d2, nonlin=nonlin, output_head=head)
                    n = int(rng.integers(2, 9))
                    n_in = int(rng.integers(1, 5))
                    n_out = int(rng.integers(2, 6))
                    T = int(rng.integers(4, 21))
                    params = ModelParams(
                        W=0.5 * rng.normal(size=(n, n)) / np.sqrt(n),
                        Wi=rng.normal(size=(n, cfg.window * n_in)),
                        U=rng.normal(size=(n_out, n)),
                        b=0.1 * rng.normal(size=n),
                    )
                    seq = Sequence(
                        frames=rng.normal(size=(T, n_in)),
                        labels=rng.integers(0, n_out, size=T),
                    )
                    trace = forward(params, seq, cfg)
                    bp = backprop(params, cfg, seq, trace)
                    if req.perturb and first:
                        bp.dW[0, 0] += 1e-3
                        first = False
                    fd = finite_diff(params, cfg, seq, eps=req.eps)
                    scale = max(
                        max(float(np.abs(b).max()) for b in fd.blocks()), 1e-12
                    )
                    diff = max(
                        float(np.abs(a - b).max())
                        for a, b in zip(bp.blocks(), fd.blocks())
                    )
                    rel = diff / scale
                    worst = max(worst, rel)
                    cases.append(GradcheckCase(
                        nonlin=nonlin, output_head=head, delta1=d1, delta2=d2,
                        n_hidden=n, n_input=n_in, n_out=n_out, T=T, rel_error=rel,
                    ))
    return GradcheckResponse(
        cases=cases, max_rel_error=worst, passed=worst < req.tolerance
    )


def run_contraction(req: ContractionRequest) -> ContractionResponse:
    if req.steps < 0:
        raise ValueError("steps must be non-negative")
    ckpt = load_checkpoint(req.checkpoint)
    suff = check_sufficient(ckpt.params, ckpt.cfg)
    if req.steps == 0:
        return ContractionResponse(
            inf_norm=suff["inf_norm"], bound=suff["bound"],
            sufficient=suff["holds"], satisfied=True, rows=[],
        )
    rng = np.random.default_rng(req.seed)
    n = ckpt.params.n_hidden
    seq = Sequence(
        frames=rng.normal(size=(req.steps, ckpt.n_input)),
        labels=np.zeros(req.steps, dtype=np.int64),
    )
    h0 = rng.uniform(-1.0, 1.0, size=n)
    h0p = rng.uniform(-1.0, 1.0, size=n)
    rep = verify_contraction(ckpt.params, ckpt.cfg, seq, h0, h0p)
    return ContractionResponse(
        inf_norm=suff["inf_norm"], bound=suff["bound"], sufficient=suff["holds"],
        satisfied=rep.satisfied,
        rows=[
            ContractionRow(t=t + 1, gap=g, bound=b)
            for t, (g, b) in enumerate(zip(rep.per_step_gap, rep.per_step_bound))
        ],
    )


def run_gen_synth(req: GenSynthRequest) -> GenSynthResponse:
    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = SynthSpec(seed=req.seed, **req.synth.model_dump())
    data = generate(spec)
    pairs = []
    for i, seq in enumerate(data):
        feat = out_dir / f"seq_{i:03d}.features.txt"
        lab = out_dir / f"seq_{i:03d}.labels.txt"
        save_sequence(feat, lab, seq)
        pairs.append((feat, lab))
    manifest = out_dir / "manifest.json"
    save_manifest(manifest, pairs, spec.n_input, spec.n_classes)
    return GenSynthResponse(manifest=str(manifest), files_written=2 * len(pairs) + 1)
