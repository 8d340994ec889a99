import numpy as np
import pytest
from scipy.special import ndtr

from esrn.model import ArmaConfig, ModelParams, Sequence
from esrn.tasks import (
    SynthSpec,
    frame_error,
    gen_context_window,
    gen_delayed_copy,
    generate,
)


def spec_cw(**kw):
    base = dict(
        task="context_window", T=40, num_sequences=6, n_input=2,
        n_classes=4, context_span=2, noise_std=0.0, seed=3,
    )
    base.update(kw)
    return SynthSpec(**base)


def test_generators_are_reproducible():
    a = gen_context_window(spec_cw())
    b = gen_context_window(spec_cw())
    for sa, sb in zip(a, b):
        assert np.array_equal(sa.frames, sb.frames)
        assert np.array_equal(sa.labels, sb.labels)


def test_context_span_zero_depends_on_current_frame_only():
    data = gen_context_window(spec_cw(context_span=0, seed=5))
    # same frame value always maps to the same label: recompute labels from
    # frames with an independent reimplementation of the scoring rule
    rng = np.random.default_rng(5)
    w = rng.normal(size=1 * 2)
    for seq in data:
        score = seq.frames @ w
        expect = np.minimum((ndtr(score / np.linalg.norm(w)) * 4).astype(int), 3)
        assert np.array_equal(seq.labels, expect)


def test_context_window_label_oracle():
    # independent reimplementation: explicit python loop over the window
    spec = spec_cw(seed=11)
    data = gen_context_window(spec)
    rng = np.random.default_rng(11)
    width = 2 * spec.context_span + 1
    w = rng.normal(size=width * spec.n_input)
    wn = np.linalg.norm(w)
    for seq in data[:2]:
        T = seq.T
        for t in range(T):
            score = 0.0
            for k, u in enumerate(range(t - spec.context_span, t + spec.context_span + 1)):
                if 0 <= u < T:
                    score += w[k * spec.n_input:(k + 1) * spec.n_input] @ seq.frames[u]
            lab = min(int(ndtr(score / wn) * spec.n_classes), spec.n_classes - 1)
            assert seq.labels[t] == lab


def test_context_window_noise_decouples_frames_from_labels():
    clean = gen_context_window(spec_cw(seed=7, noise_std=0.0))
    noisy = gen_context_window(spec_cw(seed=7, noise_std=0.5))
    for a, b in zip(clean, noisy):
        assert np.array_equal(a.labels, b.labels)
        assert not np.array_equal(a.frames, b.frames)


def test_delayed_copy_labels_are_shifted_symbols():
    spec = SynthSpec(
        task="delayed_copy", T=30, num_sequences=4, n_input=5,
        n_classes=5, context_span=3, noise_std=0.0, seed=9,
    )
    data = gen_delayed_copy(spec)
    for seq in data:
        symbols = np.argmax(seq.frames, axis=1)
        assert np.array_equal(seq.labels[:3], np.zeros(3))
        assert np.array_equal(seq.labels[3:], symbols[:-3])


def test_delayed_copy_label_distribution_matches_symbols():
    spec = SynthSpec(
        task="delayed_copy", T=500, num_sequences=4, n_input=6,
        n_classes=6, context_span=2, noise_std=0.0, seed=10,
    )
    data = gen_delayed_copy(spec)
    for seq in data:
        symbols = np.argmax(seq.frames, axis=1)
        sym_counts = np.bincount(symbols[:-2], minlength=6)
        lab_counts = np.bincount(seq.labels[2:], minlength=6)
        assert np.array_equal(sym_counts, lab_counts)


def test_delayed_copy_rejects_zero_delay():
    with pytest.raises(ValueError):
        gen_delayed_copy(SynthSpec(task="delayed_copy", context_span=0, n_input=4))


def test_delayed_copy_requires_one_hot_width():
    with pytest.raises(ValueError):
        gen_delayed_copy(
            SynthSpec(task="delayed_copy", context_span=1, n_input=2, n_classes=4)
        )


def test_generate_dispatch():
    assert len(generate(spec_cw(num_sequences=3))) == 3


def test_spec_validation():
    with pytest.raises(ValueError):
        SynthSpec(task="copy")
    with pytest.raises(ValueError):
        SynthSpec(n_classes=1)
    with pytest.raises(ValueError):
        SynthSpec(noise_std=-0.1)


def constant_predictor(n, n_in, n_out, favored=0):
    # U rows all zero except a positive row for the favored class
    U = np.zeros((n_out, n))
    U[favored] = 1.0
    return ModelParams(W=np.zeros((n, n)), Wi=np.zeros((n, n_in)), U=U, b=np.zeros(n))


def test_frame_error_of_constant_predictor():
    data = gen_context_window(spec_cw(seed=13))
    params = constant_predictor(3, 2, 4, favored=1)
    err = frame_error(params, ArmaConfig(), data)
    total = sum(s.T for s in data)
    freq1 = sum(int(np.count_nonzero(s.labels == 1)) for s in data) / total
    assert err == pytest.approx(1.0 - freq1)


def test_frame_error_uniform_outputs_ties_to_class_zero():
    # all-zero params give uniform outputs; argmax tie-break picks class 0
    data = gen_context_window(spec_cw(seed=14))
    params = ModelParams(
        W=np.zeros((3, 3)), Wi=np.zeros((3, 2)), U=np.zeros((4, 3)), b=np.zeros(3)
    )
    err = frame_error(params, ArmaConfig(), data)
    total = sum(s.T for s in data)
    freq0 = sum(int(np.count_nonzero(s.labels == 0)) for s in data) / total
    assert err == pytest.approx(1.0 - freq0)


def test_frame_error_perfect_on_noiseless_delayed_copy():
    # hand-built model that outputs the symbol delayed by one step:
    # hidden state stores tanh of the current one-hot, U reads it back
    spec = SynthSpec(
        task="delayed_copy", T=20, num_sequences=2, n_input=3,
        n_classes=3, context_span=1, noise_std=0.0, seed=15,
    )
    data = gen_delayed_copy(spec)
    n = 3
    params = ModelParams(
        W=np.zeros((n, n)), Wi=5.0 * np.eye(3), U=np.eye(3), b=np.zeros(n)
    )
    cfg = ArmaConfig(delta1=0, delta2=1, nonlin="tanh", output_head="softmax")
    # Wi reads only the look-back block: pad the current-frame block with zeros
    params = ModelParams(
        W=params.W, Wi=np.hstack([5.0 * np.eye(3), np.zeros((3, 3))]),
        U=params.U, b=params.b,
    )
    errs = []
    for seq in data:
        # first frame scores against the zero class by construction; the
        # delayed model has no signal there, so score frames 1.. only
        sub = Sequence(frames=seq.frames, labels=seq.labels)
        errs.append(frame_error(params, cfg, [sub]))
    # at most the first frame per sequence can be wrong
    for seq, err in zip(data, errs):
        assert err <= 1.0 / seq.T + 1e-12


def test_frame_error_invariant_under_joint_relabeling():
    data = gen_context_window(spec_cw(seed=16))
    rng = np.random.default_rng(0)
    n, n_in, n_out = 4, 2, 4
    params = ModelParams(
        W=0.2 * rng.normal(size=(n, n)), Wi=rng.normal(size=(n, n_in)),
        U=rng.normal(size=(n_out, n)), b=np.zeros(n),
    )
    cfg = ArmaConfig()
    base = frame_error(params, cfg, data)
    perm = np.array([2, 0, 3, 1])
    data_p = [Sequence(frames=s.frames, labels=perm[s.labels]) for s in data]
    # permute output rows consistently: row perm[c] of the new U is row c
    U_p = np.empty_like(params.U)
    U_p[perm] = params.U
    params_p = ModelParams(W=params.W, Wi=params.Wi, U=U_p, b=params.b)
    assert frame_error(params_p, cfg, data_p) == pytest.approx(base)
