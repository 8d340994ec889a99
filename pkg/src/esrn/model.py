"""Recurrent network forward pass.

The hidden state follows h_t = f(W h_{t-1} + Wi vbar_t + b) where vbar_t is
the input frame augmented with a window of delta2 past and delta1 future
frames.  With delta1 = delta2 = 0 this is the plain single-frame recurrence.
The output is y_t = U h_t, optionally pushed through a softmax.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    apply_nonlin,
    as_matrix,
    as_vector,
    NONLINS,
)

OUTPUT_HEADS = ("linear", "softmax")

# floor for log() in the cross-entropy cost
_LOG_CLAMP = 1e-300


@dataclass(frozen=True)
class ArmaConfig:
    """Window orders and unit choices for the recurrence."""

    delta1: int = 0  # frames of look-ahead
    delta2: int = 0  # frames of look-back
    nonlin: str = "sigmoid"
    output_head: str = "softmax"

    def __post_init__(self):
        if self.delta1 < 0 or self.delta2 < 0:
            raise ValueError("window orders must be non-negative")
        if self.nonlin not in NONLINS:
            raise ValueError(f"unknown nonlinearity {self.nonlin!r}")
        if self.output_head not in OUTPUT_HEADS:
            raise ValueError(f"unknown output head {self.output_head!r}")

    @property
    def window(self):
        return self.delta1 + self.delta2 + 1


@dataclass
class ModelParams:
    """Trainable parameter set: recurrent, input, output weights and bias."""

    W: np.ndarray   # N x N
    Wi: np.ndarray  # N x (window * n_input)
    U: np.ndarray   # n_out x N
    b: np.ndarray   # N

    def __post_init__(self):
        self.W = as_matrix(self.W)
        self.Wi = as_matrix(self.Wi)
        self.U = as_matrix(self.U)
        self.b = as_vector(self.b)
        n = self.W.shape[0]
        if self.W.shape != (n, n):
            raise ValueError("W must be square")
        if self.Wi.shape[0] != n or self.U.shape[1] != n or self.b.shape[0] != n:
            raise ValueError("parameter shapes are inconsistent")
        for name in ("W", "Wi", "U", "b"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entries in {name}")

    @property
    def n_hidden(self):
        return self.W.shape[0]

    @property
    def n_out(self):
        return self.U.shape[0]

    def n_input(self, cfg: ArmaConfig):
        """Base input width implied by Wi and the window."""
        width, rem = divmod(self.Wi.shape[1], cfg.window)
        if rem != 0:
            raise ValueError("Wi width is not a multiple of the window size")
        return width

    def copy(self):
        return ModelParams(
            self.W.copy(), self.Wi.copy(), self.U.copy(), self.b.copy()
        )


@dataclass
class Sequence:
    """One utterance: input frames plus per-frame class labels."""

    frames: np.ndarray  # T x n_input
    labels: np.ndarray  # T ints

    def __post_init__(self):
        self.frames = as_matrix(self.frames)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1:
            raise ValueError("labels must be 1-d")
        if self.frames.shape[0] != self.labels.shape[0]:
            raise ValueError("frames and labels length mismatch")
        if self.frames.shape[0] < 1:
            raise ValueError("empty sequence")
        if np.any(self.labels < 0):
            raise ValueError("negative label")

    @property
    def T(self):
        return self.frames.shape[0]


@dataclass
class ForwardTrace:
    """Per-frame pre-activations, hidden states and outputs of one pass."""

    p: np.ndarray   # T x N
    h: np.ndarray   # T x N
    y: np.ndarray   # T x n_out
    h0: np.ndarray  # N
    clamp_count: int = field(default=0)


def augment_inputs(seq_or_frames, cfg: ArmaConfig):
    """Stack a sliding window of frames t-delta2 .. t+delta1 per row.

    Frames outside [0, T) are zero.  Row layout is oldest first, so column
    block k holds frame t - delta2 + k.
    """
    frames = seq_or_frames.frames if isinstance(seq_or_frames, Sequence) else seq_or_frames
    frames = as_matrix(frames)
    T, n_in = frames.shape
    if cfg.window == 1:
        return frames.copy()
    out = np.zeros((T, cfg.window * n_in), dtype=np.float64)
    for k in range(cfg.window):
        offset = k - cfg.delta2  # row t gets frame t + offset
        lo = max(0, -offset)
        hi = min(T, T - offset)
        if lo < hi:
            out[lo:hi, k * n_in:(k + 1) * n_in] = frames[lo + offset:hi + offset]
    return out


def softmax(z):
    """Row-wise softmax with max subtraction."""
    z = np.asarray(z, dtype=np.float64)
    m = z.max(axis=-1, keepdims=True)
    e = np.exp(z - m)
    return e / e.sum(axis=-1, keepdims=True)


def one_hot(labels, n_classes):
    labels = np.asarray(labels, dtype=np.int64)
    if np.any(labels < 0) or np.any(labels >= n_classes):
        raise ValueError("label out of range")
    d = np.zeros((labels.shape[0], n_classes), dtype=np.float64)
    d[np.arange(labels.shape[0]), labels] = 1.0
    return d


def forward(params: ModelParams, seq: Sequence, cfg: ArmaConfig, h0=None):
    """Run the recurrence over one sequence and return the full trace."""
    n = params.n_hidden
    if h0 is None:
        h0 = np.zeros(n, dtype=np.float64)
    h0 = as_vector(h0)
    if h0.shape[0] != n:
        raise ValueError("h0 length does not match hidden size")
    vbar = augment_inputs(seq, cfg)
    if vbar.shape[1] != params.Wi.shape[1]:
        raise ValueError(
            f"augmented input width {vbar.shape[1]} does not match Wi "
            f"width {params.Wi.shape[1]}"
        )
    T = seq.T
    p = np.empty((T, n), dtype=np.float64)
    h = np.empty((T, n), dtype=np.float64)
    prev = h0
    for t in range(T):
        p[t] = params.W @ prev + (params.Wi @ vbar[t] + params.b)
        if not np.all(np.isfinite(p[t])):
            raise FloatingPointError(f"non-finite pre-activation at frame {t}")
        h[t] = apply_nonlin(cfg.nonlin, p[t])
        prev = h[t]
    z = h @ params.U.T
    y = softmax(z) if cfg.output_head == "softmax" else z
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("non-finite output")
    return ForwardTrace(p=p, h=h, y=y, h0=h0)


def cost(trace: ForwardTrace, seq: Sequence, head):
    """Time-averaged cost; also updates trace.clamp_count for the log guard."""
    if trace.y.shape[0] != seq.T:
        raise ValueError("trace and sequence length mismatch")
    n_out = trace.y.shape[1]
    d = one_hot(seq.labels, n_out)
    if head == "linear":
        diff = trace.y - d
        return float(np.sum(diff * diff) / seq.T)
    if head == "softmax":
        picked = trace.y[np.arange(seq.T), seq.labels]
        clamped = int(np.count_nonzero(picked < _LOG_CLAMP))
        trace.clamp_count += clamped
        return float(-np.log(np.maximum(picked, _LOG_CLAMP)).sum() / seq.T)
    raise ValueError(f"unknown output head {head!r}")
