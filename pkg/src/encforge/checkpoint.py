"""Checkpoint persistence: self-describing JSON, bit-exact round trip.

The document header carries {format_version, variant, I, H, K,
gate_convention}; parameters are stored name -> {shape, values} with
values as decimal doubles in row-major order (shortest representation
that round-trips the exact bits).
"""

from __future__ import annotations

import json

import numpy as np

from .model import VARIANTS, TrajectoryVAE
from .recurrent import GATE_CONVENTION

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Checkpoint file is unreadable or inconsistent; message names the field."""


def save_checkpoint(model: TrajectoryVAE, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "variant": model.variant,
        "I": model.input_width,
        "H": model.hidden,
        "K": model.latent,
        "gate_convention": model.gate_convention,
        "params": {
            name: {"shape": list(t.shape), "values": t.data.reshape(-1).tolist()}
            for name, t in model.params.items()
        },
    }
    with open(str(path), "w") as f:
        json.dump(doc, f)
        f.write("\n")


def load_checkpoint(path, expect_variant: str | None = None) -> TrajectoryVAE:
    """Rebuild a model from disk; checks every field before accepting."""
    try:
        with open(str(path)) as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise CheckpointError(f"truncated or malformed checkpoint: {e}") from None
    if not isinstance(doc, dict):
        raise CheckpointError("checkpoint root must be an object")
    for key in ("format_version", "variant", "I", "H", "K", "gate_convention", "params"):
        if key not in doc:
            raise CheckpointError(f"checkpoint missing field {key!r}")
    if doc["format_version"] != FORMAT_VERSION:
        raise CheckpointError(
            f"format_version {doc['format_version']!r} unsupported (expected {FORMAT_VERSION})")
    variant = doc["variant"]
    if variant not in VARIANTS:
        raise CheckpointError(f"unknown variant {variant!r}")
    if expect_variant is not None and variant != expect_variant:
        raise CheckpointError(
            f"architecture mismatch: checkpoint is {variant!r}, expected {expect_variant!r}")
    if doc["gate_convention"] != GATE_CONVENTION:
        raise CheckpointError(
            f"gate_convention {doc['gate_convention']!r} differs from {GATE_CONVENTION!r}")

    model = VARIANTS[variant](hidden=int(doc["H"]), latent=int(doc["K"]), rng=0)
    if int(doc["I"]) != model.input_width:
        raise CheckpointError(f"I={doc['I']} unsupported (expected {model.input_width})")

    stored = doc["params"]
    expected = set(model.params.names())
    found = set(stored)
    if expected != found:
        missing = sorted(expected - found)
        extra = sorted(found - expected)
        detail = "; ".join(filter(None, [
            f"missing {missing}" if missing else "",
            f"unexpected {extra}" if extra else ""]))
        raise CheckpointError(f"parameter set mismatch: {detail}")
    for name, entry in stored.items():
        t = model.params[name]
        shape = tuple(entry.get("shape", ()))
        if shape != t.shape:
            raise CheckpointError(
                f"parameter {name!r}: shape {list(shape)} does not match expected {list(t.shape)}")
        values = np.asarray(entry.get("values", []), dtype=np.float64)
        if values.size != t.data.size:
            raise CheckpointError(
                f"parameter {name!r}: {values.size} values for shape {list(shape)}")
        if not np.all(np.isfinite(values)):
            raise CheckpointError(f"parameter {name!r}: non-finite values")
        t.data = values.reshape(shape)
    return model
