"""Command-line workflow: synth -> train -> sweep/disentangle/rationality/serve.

Every subcommand resolves its options from, in order of precedence:
explicit flags, a JSON --config file (unknown keys rejected), the
ENCFORGE_SEED environment variable (seed only), then built-in defaults.
Each run writes a resolved_config.json snapshot next to its outputs and
exits 0 on success, 2 with a one-line diagnostic otherwise.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from . import data as dat
from . import metrics as met
from . import svgplot
from .model import TrainConfig, latent_sweep, train
from .server import serve

_DEFAULTS = {
    "synth": {"family": "crossing", "count": 100, "noise": 0.0, "seed": None,
              "speed_min": 5.0, "speed_max": 15.0, "duration": 10.0, "rate": 10.0,
              "out": "out"},
    "train": {"dataset": None, "variant": "mtg", "epochs": 2000, "batch": 16,
              "lr": 1e-3, "lr_schedule": "constant", "beta": 1.0, "hidden": 64,
              "latent": 10, "seed": None, "points": 50, "kl_warmup": 0,
              "literal_normalize": False, "no_teacher_forcing": False,
              "out": "out"},
    "sweep": {"checkpoint": None, "code": 0, "lo": -1.0, "hi": 1.0, "step": 0.1,
              "horizon": 50, "seed": None, "out": "out"},
    "disentangle": {"checkpoint": None, "sigma_grid": None, "samples": 100,
                    "seed": None, "horizon": 50, "latent": 10,
                    "identity_fixture": False, "prior_metric": False, "out": "out"},
    "rationality": {"checkpoint": None, "dataset": None, "index": 0, "z": None,
                    "reference": None, "points": 50, "horizon": 50, "seed": None,
                    "literal_normalize": False, "out": "out"},
    "serve": {"checkpoint": None, "port": 8787, "horizon": 50, "host": "127.0.0.1",
              "seed": None, "out": None},
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="encforge",
                                 description="two-vehicle encounter generator toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def opt(p, name, **kw):
        kw.setdefault("default", None)
        p.add_argument(name, **kw)

    p = sub.add_parser("synth", help="generate a synthetic encounter dataset")
    opt(p, "--family", choices=dat.SYNTH_FAMILIES)
    opt(p, "--count", type=int)
    opt(p, "--noise", type=float)
    opt(p, "--speed-min", type=float)
    opt(p, "--speed-max", type=float)
    opt(p, "--duration", type=float)
    opt(p, "--rate", type=float)
    _common(p, opt)

    p = sub.add_parser("train", help="train a model on a dataset CSV")
    opt(p, "--dataset")
    opt(p, "--variant", choices=("mtg", "baseline1"))
    opt(p, "--epochs", type=int)
    opt(p, "--batch", type=int)
    opt(p, "--lr", type=float)
    opt(p, "--lr-schedule", choices=("constant", "cosine"))
    opt(p, "--kl-warmup", type=int, help="epochs of linear KL annealing")
    opt(p, "--beta", type=float)
    opt(p, "--hidden", type=int)
    opt(p, "--latent", type=int)
    opt(p, "--points", type=int, help="resample every encounter to this length")
    p.add_argument("--literal-normalize", action="store_true", default=None,
                   help="per-sequence mean subtraction instead of the shared frame")
    p.add_argument("--no-teacher-forcing", action="store_true", default=None)
    _common(p, opt)

    p = sub.add_parser("sweep", help="decode while one latent code runs over a range")
    opt(p, "--checkpoint")
    opt(p, "--code", type=int)
    opt(p, "--lo", type=float)
    opt(p, "--hi", type=float)
    opt(p, "--step", type=float)
    opt(p, "--horizon", type=int)
    _common(p, opt)

    p = sub.add_parser("disentangle", help="latent-code variance scan")
    opt(p, "--checkpoint")
    opt(p, "--sigma-grid", help="comma-separated input sigmas")
    opt(p, "--samples", type=int)
    opt(p, "--horizon", type=int)
    opt(p, "--latent", type=int, help="K for --identity-fixture")
    p.add_argument("--identity-fixture", action="store_true", default=None,
                   help="scan a lossless identity loop instead of a checkpoint")
    p.add_argument("--prior-metric", action="store_true", default=None,
                   help="also export the classifier-free prior-metric profile")
    _common(p, opt)

    p = sub.add_parser("rationality", help="traffic-rationality profiles")
    opt(p, "--checkpoint")
    opt(p, "--dataset")
    opt(p, "--index", type=int)
    opt(p, "--z", help="comma-separated latent code (checkpoint mode)")
    opt(p, "--reference", help="dataset CSV for overlay means")
    opt(p, "--points", type=int)
    opt(p, "--horizon", type=int)
    p.add_argument("--literal-normalize", action="store_true", default=None)
    _common(p, opt)

    p = sub.add_parser("serve", help="local JSON inference service")
    opt(p, "--checkpoint")
    opt(p, "--port", type=int)
    opt(p, "--horizon", type=int)
    opt(p, "--host")
    _common(p, opt)
    return ap


def _common(p, opt):
    opt(p, "--config", help="JSON file with option defaults")
    opt(p, "--seed", type=int)
    opt(p, "--out", help="output directory")


def _resolve(args: argparse.Namespace) -> dict:
    """Merge flags > config file > env seed > defaults; reject unknown keys."""
    cmd = args.command
    defaults = _DEFAULTS[cmd]
    resolved = dict(defaults)
    if args.config:
        with open(args.config) as f:
            cfg = json.load(f)
        unknown = sorted(set(cfg) - set(defaults))
        if unknown:
            raise ValueError(f"unknown config keys for {cmd!r}: {', '.join(unknown)}")
        resolved.update(cfg)
    for key in defaults:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            resolved[key] = flag_val
    if resolved.get("seed") is None:
        resolved["seed"] = int(os.environ.get("ENCFORGE_SEED", "0"))
    return resolved


def _outdir(resolved: dict, command: str) -> Path | None:
    if resolved.get("out") is None:
        return None
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    snapshot = {"command": command, **resolved}
    with open(out / "resolved_config.json", "w") as f:
        json.dump(snapshot, f, indent=2, sort_keys=True)
        f.write("\n")
    return out


def _load_dataset(path, points: int, literal: bool) -> list[dat.Encounter]:
    encounters = dat.ingest(path)
    mode = "literal" if literal else "shared"
    prepared = []
    for enc in encounters:
        enc = dat.resample_encounter(enc, points)
        if not enc.normalized:
            enc = dat.normalize(enc, mode=mode)
        prepared.append(enc)
    return prepared


# ---------------------------------------------------------------------------
# subcommands


def _cmd_synth(resolved: dict) -> int:
    out = _outdir(resolved, "synth")
    spec = dat.SynthSpec(family=resolved["family"], count=resolved["count"],
                         noise=resolved["noise"],
                         speed_range=(resolved["speed_min"], resolved["speed_max"]),
                         seed=resolved["seed"], duration_s=resolved["duration"],
                         rate_hz=resolved["rate"])
    encounters = dat.synth_generate(spec)
    dat.export(encounters, out / "encounters.csv")
    print(f"wrote {len(encounters)} encounters to {out / 'encounters.csv'}")
    return 0


def _cmd_train(resolved: dict) -> int:
    if not resolved["dataset"]:
        raise ValueError("train needs --dataset")
    out = _outdir(resolved, "train")
    ds = _load_dataset(resolved["dataset"], resolved["points"],
                       resolved["literal_normalize"])
    cfg = TrainConfig(variant=resolved["variant"], beta=resolved["beta"],
                      epochs=resolved["epochs"], batch_size=resolved["batch"],
                      lr=resolved["lr"], lr_schedule=resolved["lr_schedule"],
                      seed=resolved["seed"], hidden=resolved["hidden"],
                      latent=resolved["latent"],
                      kl_warmup_epochs=resolved["kl_warmup"],
                      teacher_forcing=not resolved["no_teacher_forcing"])
    model, history = train(ds, cfg)
    ckpt.save_checkpoint(model, out / "checkpoint.json")
    with open(out / "history.csv", "w") as f:
        f.write("epoch,total,recon,kl\n")
        for e, (total, recon, kl) in enumerate(history):
            f.write(f"{e},{total:.17g},{recon:.17g},{kl:.17g}\n")
    svgplot.write(svgplot.render_history(history), out / "history.svg")
    print(f"trained {cfg.variant} for {cfg.epochs} epochs; "
          f"final total {history[-1][0]:.6f} -> {out / 'checkpoint.json'}")
    return 0


def _write_sweep_csv(frames, path) -> None:
    with open(path, "w") as f:
        f.write("frame,value,t_index,x1,y1,x2,y2\n")
        for n, (value, enc) in enumerate(frames):
            for t in range(enc.length):
                f.write(f"{n},{value:.17g},{t},{enc.s1[t,0]:.17g},{enc.s1[t,1]:.17g},"
                        f"{enc.s2[t,0]:.17g},{enc.s2[t,1]:.17g}\n")


def _cmd_sweep(resolved: dict) -> int:
    if not resolved["checkpoint"]:
        raise ValueError("sweep needs --checkpoint")
    out = _outdir(resolved, "sweep")
    model = ckpt.load_checkpoint(resolved["checkpoint"])
    frames = latent_sweep(model, resolved["code"], lo=resolved["lo"], hi=resolved["hi"],
                          step=resolved["step"], horizon=resolved["horizon"])
    code = resolved["code"]
    _write_sweep_csv(frames, out / f"sweep_code{code}.csv")
    svgplot.write(svgplot.render_sweep_panel(frames), out / f"sweep_code{code}.svg")
    print(f"swept code {code}: {len(frames)} frames -> {out}")
    return 0


def _cmd_disentangle(resolved: dict) -> int:
    out = _outdir(resolved, "disentangle")
    grid = met.PAPER_SIGMA_GRID
    if resolved["sigma_grid"]:
        grid = tuple(float(v) for v in str(resolved["sigma_grid"]).split(","))
    if resolved["identity_fixture"]:
        K = resolved["latent"]
        decode_fn, encode_fn = met.identity_scan_fns(K)
    elif resolved["checkpoint"]:
        model = ckpt.load_checkpoint(resolved["checkpoint"])
        K = model.latent
        decode_fn, encode_fn = met.model_scan_fns(model, horizon=resolved["horizon"])
    else:
        raise ValueError("disentangle needs --checkpoint or --identity-fixture")
    profile = met.disentanglement_scan(decode_fn, encode_fn, K, sigma_grid=grid,
                                       samples=resolved["samples"], seed=resolved["seed"])
    ratios = met.variance_ratio(profile)
    met.export_omega_csv(profile, out / "omega.csv")
    met.export_ratio_csv(ratios, out / "ratios.csv")
    svgplot.write(svgplot.render_disentanglement_bars(profile), out / "disentanglement.svg")
    if resolved["prior_metric"]:
        prior = met.prior_metric_profile(decode_fn, encode_fn, K,
                                         samples=resolved["samples"],
                                         seed=resolved["seed"])
        met.export_prior_metric_csv(prior, out / "prior_metric.csv")
        svgplot.write(svgplot.render_prior_metric_bars(prior), out / "prior_metric.svg")
    print(f"scanned {profile.group_count} groups (K={K}, L={profile.samples}) -> {out}")
    return 0


def _cmd_rationality(resolved: dict) -> int:
    out = _outdir(resolved, "rationality")
    if bool(resolved["checkpoint"]) == bool(resolved["dataset"]):
        raise ValueError("rationality needs exactly one of --checkpoint or --dataset")
    if resolved["checkpoint"]:
        model = ckpt.load_checkpoint(resolved["checkpoint"])
        z = np.zeros(model.latent)
        if resolved["z"]:
            z = np.array([float(v) for v in str(resolved["z"]).split(",")])
        enc = model.decode(z, resolved["horizon"])
    else:
        ds = _load_dataset(resolved["dataset"], resolved["points"],
                           resolved["literal_normalize"])
        idx = resolved["index"]
        if not 0 <= idx < len(ds):
            raise ValueError(f"--index {idx} out of range for {len(ds)} encounters")
        enc = ds[idx]
    reference = None
    if resolved["reference"]:
        reference = _load_dataset(resolved["reference"], enc.length,
                                  resolved["literal_normalize"])
    report = met.rationality_report(enc, reference=reference)
    ref = report.reference or {}
    for name in ("distance", "speed", "direction"):
        met.export_profile_csv(getattr(report, name), out / f"{name}.csv", name,
                               reference=ref.get(name))
    svgplot.write(svgplot.render_rationality(report), out / "rationality.svg")
    print(f"profiles (T={enc.length}) -> {out}")
    return 0


def _cmd_serve(resolved: dict) -> int:
    if not resolved["checkpoint"]:
        raise ValueError("serve needs --checkpoint")
    _outdir(resolved, "serve")
    model = ckpt.load_checkpoint(resolved["checkpoint"])
    serve(model, resolved["port"], horizon=resolved["horizon"], host=resolved["host"])
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "sweep": _cmd_sweep,
    "disentangle": _cmd_disentangle,
    "rationality": _cmd_rationality,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        resolved = _resolve(args)
        return _COMMANDS[args.command](resolved)
    except (ValueError, OSError, ckpt.CheckpointError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
