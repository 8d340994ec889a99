import io
from contextlib import redirect_stderr, redirect_stdout

import pytest

from esrn.cli import main


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def gen_data(tmp_path, seed=0, **kw):
    argv = [
        "gen-synth", "--out-dir", str(tmp_path / "data"), "--frames", "20",
        "--num-sequences", "3", "--n-input", "2", "--n-classes", "3",
        "--context-span", "1", "--noise-std", "0.05", "--seed", str(seed),
    ]
    for flag, val in kw.items():
        argv += [f"--{flag.replace('_', '-')}", str(val)]
    code, out, _ = run(argv)
    assert code == 0, out
    return str(tmp_path / "data" / "manifest.json")


def write_train_config(tmp_path, manifest, **kw):
    cfg = dict(
        n_hidden=6, delta1=1, delta2=1, optimizer="primal_dual",
        mu0=0.3, epochs=2, seed=1, manifest=manifest,
        checkpoint_out=str(tmp_path / "m.ckpt"),
        report_out=str(tmp_path / "r.csv"),
    )
    cfg.update(kw)
    path = tmp_path / "train.cfg"
    path.write_text(
        "# training configuration\n"
        + "".join(f"{k}={v}\n" for k, v in cfg.items())
    )
    return str(path)


def test_gen_synth_then_train_eval_contraction(tmp_path):
    manifest = gen_data(tmp_path)
    cfg = write_train_config(tmp_path, manifest)
    code, out, _ = run(["train", cfg])
    assert code == 0
    assert "epochs_run=2" in out and "frame_error=" in out

    code, out, _ = run(["eval", str(tmp_path / "m.ckpt"), manifest])
    assert code == 0
    assert out.startswith("frame_error=")

    code, out, _ = run(["contraction", str(tmp_path / "m.ckpt"), "--steps", "5"])
    assert code == 0
    assert "satisfied=True" in out
    assert out.count("t=") == 5


def test_gen_synth_same_seed_identical_bytes(tmp_path):
    gen_data(tmp_path / "a", seed=4)
    gen_data(tmp_path / "b", seed=4)
    for name in ["manifest.json", "seq_000.features.txt", "seq_000.labels.txt"]:
        ba = (tmp_path / "a" / "data" / name).read_bytes()
        bb = (tmp_path / "b" / "data" / name).read_bytes()
        assert ba == bb


def test_unknown_config_key_exit_2_names_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("n_hidden=4\nlearning_rate=0.1\n")
    code, _, err = run(["train", str(path)])
    assert code == 2
    assert "learning_rate" in err
    assert "bad.cfg:2" in err


def test_bad_config_value_exit_2(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("n_hidden=lots\n")
    code, _, err = run(["train", str(path)])
    assert code == 2
    assert "lots" in err


def test_missing_config_file_exit_2(tmp_path):
    code, _, err = run(["train", str(tmp_path / "nope.cfg")])
    assert code == 2
    assert "nope.cfg" in err


def test_override_flags_win(tmp_path):
    manifest = gen_data(tmp_path)
    cfg = write_train_config(tmp_path, manifest, epochs=1)
    code, out, _ = run(["train", cfg, "-o", "epochs=3"])
    assert code == 0
    assert "epochs_run=3" in out


def test_zero_epochs_header_only_report(tmp_path):
    manifest = gen_data(tmp_path)
    cfg = write_train_config(tmp_path, manifest, epochs=0)
    code, out, _ = run(["train", cfg])
    assert code == 0
    assert "epochs_run=0" in out
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 1


def test_server_rejection_maps_to_exit_2(tmp_path):
    manifest = gen_data(tmp_path)
    cfg = write_train_config(tmp_path, manifest, optimizer="adam")
    code, _, err = run(["train", cfg])
    assert code == 2
    assert "adam" in err


def test_manifest_plus_synth_keys_rejected(tmp_path):
    manifest = gen_data(tmp_path)
    cfg = write_train_config(tmp_path, manifest, task="context_window")
    code, _, err = run(["train", cfg])
    assert code == 2
    assert "manifest" in err


def test_eval_missing_checkpoint_exit_2(tmp_path):
    manifest = gen_data(tmp_path)
    code, _, err = run(["eval", str(tmp_path / "none.ckpt"), manifest])
    assert code == 2


def test_gradcheck_passes_exit_0():
    code, out, _ = run(["gradcheck", "--seed", "0"])
    assert code == 0
    assert "max_rel_error=" in out
    assert out.count("rel_error=") >= 24  # 24 cases + summary line


def test_gradcheck_perturb_exit_1():
    code, out, _ = run(["gradcheck", "--seed", "0", "--perturb"])
    assert code == 1


def test_contraction_infeasible_weights_exit_0_with_notice(tmp_path):
    import numpy as np

    from esrn.data_io import Checkpoint, save_checkpoint
    from esrn.model import ArmaConfig, ModelParams

    n = 4
    cfg = ArmaConfig(nonlin="sigmoid", output_head="softmax")
    params = ModelParams(
        W=np.full((n, n), 2.0), Wi=np.zeros((n, 2)),
        U=np.zeros((3, n)), b=np.zeros(n),
    )
    path = tmp_path / "big.ckpt"
    save_checkpoint(path, Checkpoint(cfg=cfg, params=params, lam=np.zeros(n),
                                     iteration=0, n_input=2))
    code, out, _ = run(["contraction", str(path), "--steps", "3"])
    assert code == 0
    assert "condition not met" in out
