"""Echo-state condition checks and the contraction bound as a verifier.

If the infinity norm of the recurrent matrix is below 1/gamma, two state
trajectories driven by the same inputs contract geometrically:
    ||h_t - h_t'||_inf <= (gamma * ||W||_inf)^t * ||h_0 - h_0'||_inf
"""

from dataclasses import dataclass

import numpy as np

from .model import ArmaConfig, ModelParams, Sequence, forward
from .numerics import as_matrix, gamma_of, inf_norm

# additive slack absorbing rounding in the contraction inequality
BOUND_SLACK = 1e-12


@dataclass
class ContractionReport:
    t_steps: int
    per_step_gap: list
    per_step_bound: list
    satisfied: bool


def check_sufficient(params: ModelParams, cfg: ArmaConfig):
    """Infinity-norm sufficient condition for the echo-state property."""
    nrm = inf_norm(params.W)
    bound = 1.0 / gamma_of(cfg.nonlin)
    return {"inf_norm": nrm, "bound": bound, "holds": nrm < bound}


def verify_contraction(params: ModelParams, cfg: ArmaConfig, seq: Sequence, h0, h0p):
    """Run two passes from distinct initial states and compare gap vs bound."""
    h0 = np.asarray(h0, dtype=np.float64)
    h0p = np.asarray(h0p, dtype=np.float64)
    if np.array_equal(h0, h0p):
        raise ValueError("initial states must differ")
    rate = gamma_of(cfg.nonlin) * inf_norm(params.W)
    gap0 = float(np.abs(h0 - h0p).max())
    ha = forward(params, seq, cfg, h0=h0).h
    hb = forward(params, seq, cfg, h0=h0p).h
    gaps, bounds = [], []
    ok = True
    for t in range(seq.T):
        gap = float(np.abs(ha[t] - hb[t]).max())
        bound = rate ** (t + 1) * gap0
        gaps.append(gap)
        bounds.append(bound)
        if gap > bound + BOUND_SLACK:
            ok = False
    return ContractionReport(
        t_steps=seq.T, per_step_gap=gaps, per_step_bound=bounds, satisfied=ok
    )


def scale_to_inf_norm(W, target):
    """Rescale W so its infinity norm equals target."""
    W = as_matrix(W)
    if target <= 0:
        raise ValueError("target must be positive")
    nrm = inf_norm(W)
    if nrm == 0.0:
        raise ValueError("cannot rescale the zero matrix")
    return W * (target / nrm)


def init_params(n_hidden, n_input, n_out, cfg: ArmaConfig, rng, margin=0.9):
    """Sample a feasible starting point.

    W is uniform on [-1, 1] rescaled to margin/gamma so the constraint holds
    strictly at the start; input and output weights are small uniform; the
    bias starts at zero.  Draw order from rng: W, Wi, U.
    """
    n_in_eff = cfg.window * n_input
    W = rng.uniform(-1.0, 1.0, size=(n_hidden, n_hidden))
    W = scale_to_inf_norm(W, margin / gamma_of(cfg.nonlin))
    Wi = rng.uniform(-0.5, 0.5, size=(n_hidden, n_in_eff)) / np.sqrt(n_in_eff)
    U = rng.uniform(-0.5, 0.5, size=(n_out, n_hidden)) / np.sqrt(n_hidden)
    b = np.zeros(n_hidden, dtype=np.float64)
    return ModelParams(W=W, Wi=Wi, U=U, b=b)
