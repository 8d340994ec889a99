"""Backpropagation through time and a finite-difference cross-check.

The error signal delta_t is propagated backward as
    delta_t = D_f(p_t) * (W^T delta_{t+1} + U^T e_t)
where e_t = y_t - d_t for the softmax/cross-entropy head and
e_t = 2 (y_t - d_t) for the linear/squared-error head, with delta_{T+1} = 0.
Parameter gradients are the (1/T)-averaged outer products of delta_t with
the previous hidden state, the augmented input frame, and one respectively.
"""

from dataclasses import dataclass

import numpy as np

from .model import ArmaConfig, ModelParams, Sequence, ForwardTrace, augment_inputs, forward, cost, one_hot
from .numerics import nonlin_deriv, gamma_of


@dataclass
class GradSet:
    """Gradient blocks, shaped like ModelParams."""

    dW: np.ndarray
    dWi: np.ndarray
    dU: np.ndarray
    db: np.ndarray

    def blocks(self):
        return (self.dW, self.dWi, self.dU, self.db)

    def copy(self):
        return GradSet(self.dW.copy(), self.dWi.copy(), self.dU.copy(), self.db.copy())

    @staticmethod
    def zeros_like(params: ModelParams):
        return GradSet(
            np.zeros_like(params.W),
            np.zeros_like(params.Wi),
            np.zeros_like(params.U),
            np.zeros_like(params.b),
        )

    def add_(self, other, scale=1.0):
        self.dW += scale * other.dW
        self.dWi += scale * other.dWi
        self.dU += scale * other.dU
        self.db += scale * other.db
        return self

    def scale_(self, c):
        self.dW *= c
        self.dWi *= c
        self.dU *= c
        self.db *= c
        return self

    def global_norm(self):
        return float(np.sqrt(sum(float(np.sum(b * b)) for b in self.blocks())))


def output_error(trace: ForwardTrace, seq: Sequence, head):
    """Per-frame error e_t at the output: dJ_t/d(U h_t), shape T x n_out."""
    d = one_hot(seq.labels, trace.y.shape[1])
    if head == "softmax":
        return trace.y - d
    if head == "linear":
        return 2.0 * (trace.y - d)
    raise ValueError(f"unknown output head {head!r}")


def backprop(params: ModelParams, cfg: ArmaConfig, seq: Sequence, trace: ForwardTrace):
    """Exact gradient of the time-averaged cost for one sequence."""
    T = seq.T
    if trace.h.shape != (T, params.n_hidden):
        raise ValueError("trace does not match params/sequence")
    vbar = augment_inputs(seq, cfg)
    e = output_error(trace, seq, cfg.output_head)  # T x n_out
    df = nonlin_deriv(cfg.nonlin, trace.p)         # T x N

    delta = np.zeros((T, params.n_hidden), dtype=np.float64)
    carry = np.zeros(params.n_hidden, dtype=np.float64)  # W^T delta_{t+1}
    for t in range(T - 1, -1, -1):
        delta[t] = df[t] * (carry + params.U.T @ e[t])
        if t > 0:
            carry = params.W.T @ delta[t]

    h_prev = np.vstack([trace.h0[None, :], trace.h[:-1]])
    dW = delta.T @ h_prev / T
    dWi = delta.T @ vbar / T
    dU = e.T @ trace.h / T
    db = delta.sum(axis=0) / T
    return GradSet(dW=dW, dWi=dWi, dU=dU, db=db)


def finite_diff(params: ModelParams, cfg: ArmaConfig, seq: Sequence, eps=1e-5, h0=None):
    """Central-difference gradient, one full forward pass per probe."""
    if eps <= 0:
        raise ValueError("eps must be positive")

    def eval_cost(p):
        return cost(forward(p, seq, cfg, h0=h0), seq, cfg.output_head)

    work = params.copy()
    out = GradSet.zeros_like(params)
    for arr, grad in zip((work.W, work.Wi, work.U, work.b), out.blocks()):
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + eps
            jp = eval_cost(work)
            flat[i] = orig - eps
            jm = eval_cost(work)
            flat[i] = orig
            gflat[i] = (jp - jm) / (2.0 * eps)
    return out


def spectral_norm(W, tol=1e-10, max_iter=10000):
    """Largest singular value of W via power iteration on W^T W."""
    W = np.asarray(W, dtype=np.float64)
    n = W.shape[1]
    B = W.T @ W
    if not np.any(B):
        return 0.0
    # deterministic start, slightly uneven to avoid orthogonal pathologies
    v = 1.0 + 1e-3 * np.arange(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam_new = float(v @ (B @ v))
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return float(np.sqrt(max(lam_new, 0.0)))
        lam = lam_new
    raise RuntimeError("power iteration did not converge")


def grad_regime_report(params: ModelParams, cfg: ArmaConfig):
    """2-norm of W against 1/gamma: vanishing/exploding gradient regimes."""
    two_norm = spectral_norm(params.W)
    bound = 1.0 / gamma_of(cfg.nonlin)
    return {
        "two_norm_W": two_norm,
        "vanish_bound_holds": two_norm < bound,
        "explode_necessary_holds": two_norm > bound,
    }
