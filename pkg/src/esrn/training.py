"""Shared epoch/minibatch training engine.

Both trainers (primal-dual and clipped descent) run through the same loop so
that their degenerate settings produce bit-identical trajectories: the rule
object only transforms gradients, finalizes the recurrent matrix after the
step, and runs its own bookkeeping after each update.
"""

import time
from dataclasses import dataclass

import numpy as np

from .gradients import GradSet, backprop
from .model import ArmaConfig, ModelParams, cost, forward
from .numerics import inf_norm

SCHEDULES = ("constant", "inv_sqrt_k")


@dataclass
class TrainReport:
    epoch: int
    mean_cost: float
    frame_error: float
    inf_norm_w: float
    max_lambda: float
    mean_lambda: float
    clip_events: int
    wall_ms: float


def step_size(mu0, schedule, k):
    """Step size at update k (1-based)."""
    if schedule == "constant":
        return mu0
    if schedule == "inv_sqrt_k":
        return mu0 / np.sqrt(k)
    raise ValueError(f"unknown schedule {schedule!r}")


class PlainRule:
    """No-op rule: the engine degenerates to plain (momentum) descent."""

    def transform_grads(self, grads, k):
        return grads

    def finalize_W(self, W_tent, mu_k):
        return W_tent

    def post_update(self, params, mu_k):
        pass

    def epoch_stats(self):
        return {"max_lambda": 0.0, "mean_lambda": 0.0, "clip_events": 0}


def evaluate(params: ModelParams, cfg: ArmaConfig, data):
    """Mean per-sequence cost and frame error over a dataset."""
    total_cost = 0.0
    wrong = 0
    frames = 0
    for seq in data:
        trace = forward(params, seq, cfg)
        total_cost += cost(trace, seq, cfg.output_head)
        pred = np.argmax(trace.y, axis=1)
        wrong += int(np.count_nonzero(pred != seq.labels))
        frames += seq.T
    return total_cost / len(data), wrong / frames


def mean_batch_grad(params, cfg, seqs):
    """Uniform average of per-sequence gradients, fixed reduction order."""
    acc = GradSet.zeros_like(params)
    for seq in seqs:
        trace = forward(params, seq, cfg)
        acc.add_(backprop(params, cfg, seq, trace))
    return acc.scale_(1.0 / len(seqs))


def run_training(params: ModelParams, data, cfg: ArmaConfig, *, epochs, batch,
                 seed, mu0, schedule, momentum, rule):
    """Train in place-free style: returns (final params, per-epoch reports)."""
    if not data:
        raise ValueError("empty dataset")
    if mu0 <= 0:
        raise ValueError("mu0 must be positive")
    if not (0.0 <= momentum < 1.0):
        raise ValueError("momentum must lie in [0, 1)")
    if batch < 1:
        raise ValueError("batch must be at least 1")

    params = params.copy()
    vel = GradSet.zeros_like(params)  # momentum buffers
    shuffle_rng = np.random.default_rng(seed)
    reports = []
    k = 0
    for epoch in range(epochs):
        t0 = time.perf_counter()
        order = shuffle_rng.permutation(len(data))
        for start in range(0, len(order), batch):
            k += 1
            mu_k = step_size(mu0, schedule, k)
            seqs = [data[i] for i in order[start:start + batch]]
            if momentum > 0.0:
                ahead = ModelParams(
                    params.W + momentum * vel.dW,
                    params.Wi + momentum * vel.dWi,
                    params.U + momentum * vel.dU,
                    params.b + momentum * vel.db,
                )
            else:
                ahead = params
            grads = rule.transform_grads(mean_batch_grad(ahead, cfg, seqs), k)
            vel.dW = momentum * vel.dW - mu_k * grads.dW
            vel.dWi = momentum * vel.dWi - mu_k * grads.dWi
            vel.dU = momentum * vel.dU - mu_k * grads.dU
            vel.db = momentum * vel.db - mu_k * grads.db
            W_new = rule.finalize_W(params.W + vel.dW, mu_k)
            params = ModelParams(
                W_new, params.Wi + vel.dWi, params.U + vel.dU, params.b + vel.db
            )
            rule.post_update(params, mu_k)
            for blk in (params.W, params.Wi, params.U, params.b):
                if not np.all(np.isfinite(blk)):
                    raise RuntimeError(f"non-finite parameters at update {k}")
        mean_cost, frame_err = evaluate(params, cfg, data)
        stats = rule.epoch_stats()
        reports.append(TrainReport(
            epoch=epoch,
            mean_cost=mean_cost,
            frame_error=frame_err,
            inf_norm_w=inf_norm(params.W),
            max_lambda=stats["max_lambda"],
            mean_lambda=stats["mean_lambda"],
            clip_events=stats["clip_events"],
            wall_ms=(time.perf_counter() - t0) * 1000.0,
        ))
    return params, reports
