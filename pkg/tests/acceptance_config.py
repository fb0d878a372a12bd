"""Shared fixtures for the acceptance suite and the explorer parity script.

The overfit oracle: 16 noise-free synthetic encounters (four per family),
resampled to 50 points and normalized, trained on the full-size generator
for 2000 epochs at beta = 1. Free-running decoding keeps the latent code
load-bearing (teacher forcing lets the decoder overfit without z, which
the KL term then erases); the KL weight is applied per element like the
reconstruction term.
"""

from pathlib import Path

from encforge.data import SynthSpec, normalize, resample_encounter, synth_generate
from encforge.model import TrainConfig

HORIZON = 50

OVERFIT_CONFIG = TrainConfig(
    variant="mtg",
    beta=1.0,
    epochs=2000,
    batch_size=8,
    lr=3e-3,
    seed=0,
    hidden=64,
    latent=10,
    teacher_forcing=False,
    lr_schedule="cosine",
)

ARTIFACTS = Path(__file__).resolve().parent.parent / "artifacts"
OVERFIT_CHECKPOINT = ARTIFACTS / "overfit_checkpoint.json"


def overfit_dataset():
    families = ["crossing", "same-direction", "opposite-direction", "merging"]
    raw = []
    for i, family in enumerate(families):
        raw.extend(synth_generate(SynthSpec(family=family, count=4, noise=0.0, seed=i)))
    return [normalize(resample_encounter(e, HORIZON)) for e in raw]
