"""File formats: text sequences, JSON manifests, binary checkpoints, CSV logs.

Feature files are plain text ("T n_input" header, then one frame per line);
label files hold one integer per line.  Checkpoints are a fixed binary layout
with a trailing byte-sum checksum so corruption is detected on load.
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ArmaConfig, ModelParams, Sequence
from .numerics import NONLINS
from .model import OUTPUT_HEADS

CHECKPOINT_MAGIC = b"ESRN"
CHECKPOINT_VERSION = 1


class DataError(Exception):
    """Malformed dataset file; message carries file and line."""


class CheckpointError(Exception):
    pass


class BadMagicError(CheckpointError):
    pass


class BadVersionError(CheckpointError):
    pass


class TruncatedError(CheckpointError):
    pass


class ChecksumError(CheckpointError):
    pass


@dataclass
class Manifest:
    pairs: list          # (features_path, labels_path), resolved
    n_input: int
    n_classes: int


@dataclass
class Checkpoint:
    cfg: ArmaConfig
    params: ModelParams
    lam: np.ndarray
    iteration: int
    n_input: int


def load_sequence(features_path, labels_path, n_classes=None):
    """Read one (features, labels) file pair into a validated Sequence."""
    features_path = Path(features_path)
    labels_path = Path(labels_path)
    with open(features_path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError(f"{features_path}:1: empty features file")
    head = lines[0].split()
    if len(head) != 2:
        raise DataError(f"{features_path}:1: header must be 'T n_input'")
    try:
        T, n_in = int(head[0]), int(head[1])
    except ValueError:
        raise DataError(f"{features_path}:1: non-integer header") from None
    if T < 1 or n_in < 1:
        raise DataError(f"{features_path}:1: header values must be positive")
    frames = np.empty((T, n_in), dtype=np.float64)
    for t in range(T):
        lineno = t + 2
        if t + 1 >= len(lines):
            raise DataError(f"{features_path}:{lineno}: expected {T} frames, file ended")
        parts = lines[t + 1].split()
        if len(parts) != n_in:
            raise DataError(
                f"{features_path}:{lineno}: expected {n_in} values, got {len(parts)}"
            )
        try:
            frames[t] = [float(p) for p in parts]
        except ValueError:
            raise DataError(f"{features_path}:{lineno}: non-numeric value") from None
    if len(lines) > T + 1 and any(s.strip() for s in lines[T + 1:]):
        raise DataError(f"{features_path}:{T + 2}: trailing data beyond {T} frames")

    with open(labels_path) as fh:
        lab_lines = [s for s in fh.read().splitlines() if s.strip()]
    if len(lab_lines) != T:
        raise DataError(
            f"{labels_path}:{len(lab_lines) + 1}: expected {T} labels, got {len(lab_lines)}"
        )
    labels = np.empty(T, dtype=np.int64)
    for t, s in enumerate(lab_lines):
        try:
            labels[t] = int(s)
        except ValueError:
            raise DataError(f"{labels_path}:{t + 1}: non-integer label") from None
        if labels[t] < 0 or (n_classes is not None and labels[t] >= n_classes):
            raise DataError(f"{labels_path}:{t + 1}: label {labels[t]} out of range")
    return Sequence(frames=frames, labels=labels)


def save_sequence(features_path, labels_path, seq: Sequence):
    T, n_in = seq.frames.shape
    with open(features_path, "w") as fh:
        fh.write(f"{T} {n_in}\n")
        for row in seq.frames:
            fh.write(" ".join(format(v, ".12g") for v in row) + "\n")
    with open(labels_path, "w") as fh:
        for lab in seq.labels:
            fh.write(f"{int(lab)}\n")


def load_manifest(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from None
    for key in ("n_input", "n_classes", "sequences"):
        if key not in doc:
            raise DataError(f"{path}: missing key {key!r}")
    pairs = []
    base = path.parent
    for entry in doc["sequences"]:
        feat, lab = (base / entry[0], base / entry[1])
        for p in (feat, lab):
            if not p.exists():
                raise DataError(f"{path}: referenced file {p} does not exist")
        pairs.append((feat, lab))
    if not pairs:
        raise DataError(f"{path}: manifest lists no sequences")
    return Manifest(pairs=pairs, n_input=int(doc["n_input"]), n_classes=int(doc["n_classes"]))


def save_manifest(path, pairs, n_input, n_classes):
    path = Path(path)
    base = path.parent
    doc = {
        "n_input": int(n_input),
        "n_classes": int(n_classes),
        "sequences": [
            [str(Path(f).relative_to(base)), str(Path(l).relative_to(base))]
            for f, l in pairs
        ],
    }
    path.write_text(json.dumps(doc, indent=1) + "\n")


def load_dataset(manifest: Manifest):
    out = []
    for feat, lab in manifest.pairs:
        seq = load_sequence(feat, lab, n_classes=manifest.n_classes)
        if seq.frames.shape[1] != manifest.n_input:
            raise DataError(
                f"{feat}:1: width {seq.frames.shape[1]} does not match "
                f"manifest n_input {manifest.n_input}"
            )
        out.append(seq)
    return out


_NONLIN_TAG = {name: i for i, name in enumerate(NONLINS)}
_HEAD_TAG = {name: i for i, name in enumerate(OUTPUT_HEADS)}


def _f64_bytes(a):
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def save_checkpoint(path, ckpt: Checkpoint):
    p = ckpt.params
    body = bytearray()
    body += CHECKPOINT_MAGIC
    body += struct.pack("<I", CHECKPOINT_VERSION)
    body += struct.pack(
        "<7I",
        p.n_hidden, ckpt.n_input, p.n_out,
        ckpt.cfg.delta1, ckpt.cfg.delta2,
        _NONLIN_TAG[ckpt.cfg.nonlin], _HEAD_TAG[ckpt.cfg.output_head],
    )
    body += _f64_bytes(p.W)
    body += _f64_bytes(p.Wi)
    body += _f64_bytes(p.U)
    body += _f64_bytes(p.b)
    body += _f64_bytes(ckpt.lam)
    body += struct.pack("<Q", ckpt.iteration)
    checksum = sum(body) % (1 << 64)
    body += struct.pack("<Q", checksum)
    Path(path).write_bytes(bytes(body))


def load_checkpoint(path):
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != CHECKPOINT_MAGIC:
        raise BadMagicError(f"{path}: bad magic bytes")
    if len(raw) < 8:
        raise TruncatedError(f"{path}: truncated header")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != CHECKPOINT_VERSION:
        raise BadVersionError(f"{path}: unsupported version {version}")
    if len(raw) < 8 + 28:
        raise TruncatedError(f"{path}: truncated dimension block")
    n, n_in, n_out, d1, d2, nl_tag, hd_tag = struct.unpack_from("<7I", raw, 8)
    if nl_tag >= len(NONLINS) or hd_tag >= len(OUTPUT_HEADS):
        raise CheckpointError(f"{path}: unknown nonlinearity/head tag")
    cfg = ArmaConfig(
        delta1=d1, delta2=d2, nonlin=NONLINS[nl_tag], output_head=OUTPUT_HEADS[hd_tag]
    )
    n_in_eff = cfg.window * n_in
    counts = [n * n, n * n_in_eff, n_out * n, n, n]
    need = 8 + 28 + 8 * sum(counts) + 8 + 8
    if len(raw) != need:
        raise TruncatedError(f"{path}: expected {need} bytes, got {len(raw)}")
    (stored_sum,) = struct.unpack_from("<Q", raw, len(raw) - 8)
    if sum(raw[:-8]) % (1 << 64) != stored_sum:
        raise ChecksumError(f"{path}: checksum mismatch")
    offset = 8 + 28
    blocks = []
    for cnt in counts:
        blocks.append(np.frombuffer(raw, dtype="<f8", count=cnt, offset=offset).copy())
        offset += 8 * cnt
    (iteration,) = struct.unpack_from("<Q", raw, offset)
    W = blocks[0].reshape(n, n)
    Wi = blocks[1].reshape(n, n_in_eff)
    U = blocks[2].reshape(n_out, n)
    b = blocks[3]
    lam = blocks[4]
    return Checkpoint(
        cfg=cfg,
        params=ModelParams(W=W, Wi=Wi, U=U, b=b),
        lam=lam,
        iteration=iteration,
        n_input=n_in,
    )


REPORT_COLUMNS = (
    "epoch", "mean_cost", "frame_error", "inf_norm_W",
    "max_lambda", "mean_lambda", "clip_events", "wall_ms",
)


def write_report_log(path, reports):
    """CSV report log, one row per epoch, 12 significant digits."""
    with open(path, "w") as fh:
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for r in reports:
            fh.write(
                f"{r.epoch},{r.mean_cost:.12g},{r.frame_error:.12g},"
                f"{r.inf_norm_w:.12g},{r.max_lambda:.12g},{r.mean_lambda:.12g},"
                f"{r.clip_events},{r.wall_ms:.12g}\n"
            )
