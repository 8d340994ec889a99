"""Primal-dual trainer for the row-wise l1 constraint on the recurrent matrix.

Each update applies a gradient step to all parameter blocks, soft-thresholds
the recurrent matrix with per-row thresholds lambda_i * mu_k, then runs
projected gradient ascent on the multipliers:
    lambda_i <- max(0, lambda_i + mu_k * scale * (||w_i||_1 - 1/gamma))
An alternative variant skips the multipliers entirely and projects each row
of W onto the l1 ball of radius 1/gamma after the gradient step.
"""

from dataclasses import dataclass

import numpy as np

from .model import ArmaConfig, ModelParams
from .numerics import gamma_of
from .training import SCHEDULES, run_training

VARIANTS = ("shrinkage", "project_rows")


@dataclass
class DualState:
    """Non-negative per-row Lagrange multipliers."""

    lam: np.ndarray

    def __post_init__(self):
        self.lam = np.ascontiguousarray(self.lam, dtype=np.float64)
        if np.any(self.lam < 0):
            raise ValueError("multipliers must be non-negative")


@dataclass
class PdConfig:
    mu0: float = 0.1
    schedule: str = "constant"
    momentum: float = 0.0
    dual_mu_scale: float = 1.0
    variant: str = "shrinkage"
    epochs: int = 10
    batch: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.mu0 <= 0:
            raise ValueError("mu0 must be positive")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.dual_mu_scale <= 0:
            raise ValueError("dual_mu_scale must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


def shrink(X, lam, mu):
    """Row-wise soft-thresholding with thresholds lambda_i * mu."""
    X = np.asarray(X, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape[0] != X.shape[0]:
        raise ValueError("lambda length must equal the row count")
    if np.any(lam < 0) or mu < 0:
        raise ValueError("thresholds must be non-negative")
    thr = (lam * mu)[:, None]
    return np.sign(X) * np.maximum(np.abs(X) - thr, 0.0)


def project_row_l1(v, radius):
    """Euclidean projection of one row onto the l1 ball of given radius."""
    if np.abs(v).sum() <= radius:
        return v.copy()
    # Duchi et al. sorted-cumsum threshold
    u = np.sort(np.abs(v))[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, v.shape[0] + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def project_rows(W, gamma):
    """Project every infeasible row of W onto the l1 ball of radius 1/gamma."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    radius = 1.0 / gamma
    out = np.array(W, dtype=np.float64, copy=True)
    for i in range(out.shape[0]):
        if np.abs(out[i]).sum() > radius:
            out[i] = project_row_l1(out[i], radius)
    return out


class PrimalDualRule:
    """Per-update shrinkage + projected dual ascent, pluggable into the engine.

    monitor, if given, is called after every dual step with
    (row_l1_before, lam_before, lam_after, dual_step_size).
    """

    def __init__(self, n_hidden, gamma, dual_mu_scale=1.0, variant="shrinkage",
                 lam0=None, monitor=None):
        self.gamma = gamma
        self.dual_mu_scale = dual_mu_scale
        self.variant = variant
        self.lam = np.zeros(n_hidden) if lam0 is None else np.array(lam0, dtype=np.float64)
        self.monitor = monitor

    def transform_grads(self, grads, k):
        return grads

    def finalize_W(self, W_tent, mu_k):
        if self.variant == "project_rows":
            return project_rows(W_tent, self.gamma)
        return shrink(W_tent, self.lam, mu_k)

    def post_update(self, params, mu_k):
        if self.variant == "project_rows":
            return
        rows = np.abs(params.W).sum(axis=1)
        dual_mu = mu_k * self.dual_mu_scale
        lam_before = self.lam.copy()
        self.lam = np.maximum(
            0.0, self.lam + dual_mu * (rows - 1.0 / self.gamma)
        )
        if self.monitor is not None:
            self.monitor(rows, lam_before, self.lam.copy(), dual_mu)

    def epoch_stats(self):
        return {
            "max_lambda": float(self.lam.max()) if self.lam.size else 0.0,
            "mean_lambda": float(self.lam.mean()) if self.lam.size else 0.0,
            "clip_events": 0,
        }


def train(params: ModelParams, data, cfg: ArmaConfig, pd: PdConfig, monitor=None):
    """Constrained training; returns (final params, per-epoch reports, dual state)."""
    rule = PrimalDualRule(
        n_hidden=params.n_hidden,
        gamma=gamma_of(cfg.nonlin),
        dual_mu_scale=pd.dual_mu_scale,
        variant=pd.variant,
        monitor=monitor,
    )
    final, reports = run_training(
        params, data, cfg,
        epochs=pd.epochs, batch=pd.batch, seed=pd.seed,
        mu0=pd.mu0, schedule=pd.schedule, momentum=pd.momentum, rule=rule,
    )
    return final, reports, DualState(lam=rule.lam.copy())
