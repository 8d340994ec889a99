"""Baseline trainer: descent with global gradient-norm clipping."""

from dataclasses import dataclass

from .model import ArmaConfig, ModelParams
from .training import SCHEDULES, run_training


@dataclass
class ClipConfig:
    threshold: float = 1.0
    mu0: float = 0.1
    schedule: str = "constant"
    momentum: float = 0.0
    epochs: int = 10
    batch: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.mu0 <= 0:
            raise ValueError("mu0 must be positive")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}")


def clip(grads, threshold):
    """Rescale all blocks jointly when the stacked 2-norm exceeds threshold."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    g = grads.global_norm()
    if g <= threshold:
        return grads, False
    return grads.copy().scale_(threshold / g), True


class ClipRule:
    """Gradient transform counting clip events; unconstrained W."""

    def __init__(self, threshold):
        self.threshold = threshold
        self._clip_events = 0

    def transform_grads(self, grads, k):
        out, clipped = clip(grads, self.threshold)
        if clipped:
            self._clip_events += 1
        return out

    def finalize_W(self, W_tent, mu_k):
        return W_tent

    def post_update(self, params, mu_k):
        pass

    def epoch_stats(self):
        n = self._clip_events
        self._clip_events = 0
        return {"max_lambda": 0.0, "mean_lambda": 0.0, "clip_events": n}


def train_clipped(params: ModelParams, data, cfg: ArmaConfig, cc: ClipConfig):
    """Clipped-descent training; returns (final params, per-epoch reports)."""
    rule = ClipRule(cc.threshold)
    return run_training(
        params, data, cfg,
        epochs=cc.epochs, batch=cc.batch, seed=cc.seed,
        mu0=cc.mu0, schedule=cc.schedule, momentum=cc.momentum, rule=rule,
    )
