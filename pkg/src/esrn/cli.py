"""Command-line client for the service.

By default commands run against an in-process instance of the FastAPI app;
pass --server to talk to a remote one (note that file paths in requests are
then resolved on the server side).

Config files are plain `key=value` lines (# comments allowed); `-o key=value`
flags override file values.  All randomness derives from the single `seed`
key, split in the fixed order (init, shuffle, synth).
"""

import argparse
import json
import sys

import httpx

_SYNTH_KEYS = {
    "task": str,
    "T": int,
    "num_sequences": int,
    "n_input": int,
    "n_classes": int,
    "context_span": int,
    "noise_std": float,
}

_TRAIN_KEYS = {
    "n_hidden": int,
    "delta1": int,
    "delta2": int,
    "nonlin": str,
    "output_head": str,
    "optimizer": str,
    "mu0": float,
    "schedule": str,
    "momentum": float,
    "dual_mu_scale": float,
    "variant": str,
    "threshold": float,
    "epochs": int,
    "batch": int,
    "seed": int,
    "manifest": str,
    "checkpoint_out": str,
    "report_out": str,
    **_SYNTH_KEYS,
}

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def parse_kv(pairs, source):
    """Parse key=value strings against the closed train-config schema."""
    out = {}
    for lineno, raw in pairs:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TRAIN_KEYS:
            raise CliError(f"{source}:{lineno}: unknown config key {key!r}")
        try:
            out[key] = _TRAIN_KEYS[key](value)
        except ValueError:
            raise CliError(
                f"{source}:{lineno}: bad value {value!r} for key {key!r}"
            ) from None
    return out


def load_config(path, overrides):
    try:
        with open(path) as fh:
            lines = list(enumerate(fh.read().splitlines(), start=1))
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    cfg = parse_kv(lines, path)
    cfg.update(parse_kv(list(enumerate(overrides, start=1)), "override"))
    return cfg


def build_train_request(cfg):
    body = {k: v for k, v in cfg.items() if k not in _SYNTH_KEYS}
    synth = {k: v for k, v in cfg.items() if k in _SYNTH_KEYS}
    if "manifest" in cfg and synth:
        raise CliError("config mixes 'manifest' with synthetic task keys")
    if synth:
        body["synth"] = synth
    if "n_hidden" not in body:
        raise CliError("config is missing required key 'n_hidden'")
    return body


def make_client(server):
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def post(client, path, body):
    resp = client.post(path, json=body)
    if resp.status_code == 200:
        return resp.json()
    try:
        doc = resp.json()
    except json.JSONDecodeError:
        doc = {}
    message = doc.get("message") or json.dumps(doc.get("detail", resp.text))
    code = EXIT_NUMERIC if doc.get("kind") == "numeric" else EXIT_USAGE
    raise CliError(f"{path} failed ({resp.status_code}): {message}", code=code)


def cmd_train(args):
    cfg = load_config(args.config, args.override)
    body = build_train_request(cfg)
    with make_client(args.server) as client:
        out = post(client, "/train", body)
    final = out.get("final")
    if final is None:
        print("epochs_run=0")
    else:
        print(
            f"epochs_run={out['epochs_run']} "
            f"cost={final['mean_cost']:.6f} "
            f"frame_error={final['frame_error']:.6f} "
            f"inf_norm_W={final['inf_norm_w']:.6f} "
            f"max_lambda={final['max_lambda']:.6f}"
        )
    return 0


def cmd_eval(args):
    with make_client(args.server) as client:
        out = post(client, "/eval", {"checkpoint": args.checkpoint, "manifest": args.manifest})
    print(f"frame_error={out['frame_error']:.6f}")
    return 0


def cmd_gradcheck(args):
    body = {"seed": args.seed, "perturb": args.perturb}
    with make_client(args.server) as client:
        out = post(client, "/gradcheck", body)
    for case in out["cases"]:
        print(
            f"nonlin={case['nonlin']} head={case['output_head']} "
            f"window=({case['delta1']},{case['delta2']}) "
            f"N={case['n_hidden']} N_I={case['n_input']} N_o={case['n_out']} "
            f"T={case['T']} rel_error={case['rel_error']:.3e}"
        )
    print(f"max_rel_error={out['max_rel_error']:.3e}")
    return 0 if out["passed"] else 1


def cmd_contraction(args):
    body = {"checkpoint": args.checkpoint, "steps": args.steps, "seed": args.seed}
    with make_client(args.server) as client:
        out = post(client, "/contraction", body)
    print(f"inf_norm_W={out['inf_norm']:.6f} bound={out['bound']:.6f}")
    for row in out["rows"]:
        print(f"t={row['t']} gap={row['gap']:.6e} bound={row['bound']:.6e}")
    if not out["sufficient"]:
        print("condition not met -- bound not applicable")
        return 0
    print(f"satisfied={out['satisfied']}")
    return 0 if out["satisfied"] else 1


def cmd_gen_synth(args):
    synth = {
        "task": args.task,
        "T": args.frames,
        "num_sequences": args.num_sequences,
        "n_input": args.n_input,
        "n_classes": args.n_classes,
        "context_span": args.context_span,
        "noise_std": args.noise_std,
    }
    body = {"synth": synth, "seed": args.seed, "out_dir": args.out_dir}
    with make_client(args.server) as client:
        out = post(client, "/gen-synth", body)
    print(f"manifest={out['manifest']} files={out['files_written']}")
    return 0


def cmd_serve(args):
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser():
    top = argparse.ArgumentParser(prog="esrn", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def add_server(p):
        p.add_argument("--server", default=None, help="remote service URL (default: in-process)")

    p = sub.add_parser("train", help="train a model from a key=value config")
    p.add_argument("config")
    p.add_argument("-o", "--override", action="append", default=[], metavar="KEY=VALUE")
    add_server(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="frame error of a checkpoint on a manifest")
    p.add_argument("checkpoint")
    p.add_argument("manifest")
    add_server(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="backprop vs finite differences")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", action="store_true", help="corrupt one gradient (harness sanity)")
    add_server(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("contraction", help="state-contraction check for a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    add_server(p)
    p.set_defaults(func=cmd_contraction)

    p = sub.add_parser("gen-synth", help="write a synthetic dataset + manifest")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--task", default="context_window")
    p.add_argument("--frames", type=int, default=50, help="frames per sequence")
    p.add_argument("--num-sequences", type=int, default=10)
    p.add_argument("--n-input", type=int, default=3)
    p.add_argument("--n-classes", type=int, default=4)
    p.add_argument("--context-span", type=int, default=2)
    p.add_argument("--noise-std", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    add_server(p)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return top


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
