"""Synthetic frame-classification tasks and the frame-error metric.

context_window: the label of frame t is a quantized linear score of the
clean frames in a symmetric window around t, so look-ahead/look-back input
windows carry real signal.  delayed_copy: the label is the identity of the
input symbol a fixed number of frames in the past.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .model import ArmaConfig, ModelParams, Sequence, forward

TASKS = ("context_window", "delayed_copy")


@dataclass
class SynthSpec:
    task: str = "context_window"
    T: int = 50
    num_sequences: int = 10
    n_input: int = 3
    n_classes: int = 4
    context_span: int = 2
    noise_std: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.context_span < 0:
            raise ValueError("context_span must be non-negative")
        if self.n_classes < 2:
            raise ValueError("need at least two classes")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if self.T < 1 or self.num_sequences < 1 or self.n_input < 1:
            raise ValueError("T, num_sequences and n_input must be positive")


def window_stack(frames, span):
    """Rows are frames t-span .. t+span concatenated, zeros outside [0, T)."""
    T, n_in = frames.shape
    width = 2 * span + 1
    out = np.zeros((T, width * n_in), dtype=np.float64)
    for k in range(width):
        offset = k - span
        lo = max(0, -offset)
        hi = min(T, T - offset)
        if lo < hi:
            out[lo:hi, k * n_in:(k + 1) * n_in] = frames[lo + offset:hi + offset]
    return out


def context_window_labels(frames, weights, n_classes):
    """Quantized linear score of the windowed clean frames."""
    span = (weights.shape[0] // frames.shape[1] - 1) // 2
    score = window_stack(frames, span) @ weights
    # standard-normal frames make score ~ N(0, ||weights||^2); the Gaussian
    # cdf then spreads labels evenly over the classes
    u = ndtr(score / np.linalg.norm(weights))
    return np.minimum((u * n_classes).astype(np.int64), n_classes - 1)


def gen_context_window(spec: SynthSpec):
    """Labels depend on a window of clean frames; inputs carry extra noise."""
    rng = np.random.default_rng(spec.seed)
    width = 2 * spec.context_span + 1
    weights = rng.normal(size=width * spec.n_input)
    out = []
    for _ in range(spec.num_sequences):
        clean = rng.normal(size=(spec.T, spec.n_input))
        labels = context_window_labels(clean, weights, spec.n_classes)
        frames = clean + spec.noise_std * rng.normal(size=clean.shape)
        out.append(Sequence(frames=frames, labels=labels))
    return out


def gen_delayed_copy(spec: SynthSpec):
    """Label at t is the symbol seen context_span frames earlier."""
    if spec.context_span < 1:
        raise ValueError("delayed_copy needs context_span >= 1")
    if spec.n_input < spec.n_classes:
        raise ValueError("delayed_copy needs n_input >= n_classes for one-hot symbols")
    rng = np.random.default_rng(spec.seed)
    delay = spec.context_span
    out = []
    for _ in range(spec.num_sequences):
        symbols = rng.integers(0, spec.n_classes, size=spec.T)
        frames = np.zeros((spec.T, spec.n_input), dtype=np.float64)
        frames[np.arange(spec.T), symbols] = 1.0
        if spec.noise_std > 0:
            frames = frames + spec.noise_std * rng.normal(size=frames.shape)
        labels = np.zeros(spec.T, dtype=np.int64)
        labels[delay:] = symbols[:-delay] if delay < spec.T else symbols[:0]
        out.append(Sequence(frames=frames, labels=labels))
    return out


def generate(spec: SynthSpec):
    if spec.task == "context_window":
        return gen_context_window(spec)
    return gen_delayed_copy(spec)


def frame_error(params: ModelParams, cfg: ArmaConfig, data):
    """Fraction of frames whose argmax output misses the label."""
    wrong = 0
    frames = 0
    for seq in data:
        y = forward(params, seq, cfg).y
        pred = np.argmax(y, axis=1)  # ties resolve to the lowest index
        wrong += int(np.count_nonzero(pred != seq.labels))
        frames += seq.T
    return wrong / frames
