"""Train a small encounter generator end to end and save a checkpoint.

This uses a deliberately small model and short horizon so it finishes in
under a minute; scale hidden/latent/epochs up for real runs (the
acceptance suite trains the full-size configuration).
"""

import time
from pathlib import Path

from encforge import (SynthSpec, TrainConfig, normalize, reconstruction_error,
                      resample_encounter, save_checkpoint, synth_generate, train)
from encforge.svgplot import render_history, write

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

T = 25

raw = []
for i, family in enumerate(["crossing", "same-direction", "opposite-direction", "merging"]):
    raw.extend(synth_generate(SynthSpec(family=family, count=2, seed=10 + i)))
dataset = [normalize(resample_encounter(e, T)) for e in raw]
print(f"dataset: {len(dataset)} encounters, {T} points each")

# Free-running decoding (each branch consumes its own previous output) keeps
# the latent code load-bearing even on a tiny dataset; teacher forcing would
# let the decoder solve next-point prediction without z.
cfg = TrainConfig(variant="mtg", beta=1.0, epochs=400, batch_size=8, lr=2e-3,
                  hidden=32, latent=6, seed=0, teacher_forcing=False)
t0 = time.time()
model, history = train(dataset, cfg)
print(f"trained {cfg.epochs} epochs in {time.time() - t0:.0f} s")

for epoch in (0, 99, 199, 299, 399):
    total, recon, kl = history[epoch]
    print(f"  epoch {epoch + 1:>3}: total {total:.4f}  recon {recon:.4f}  kl {kl:.2f}")

print(f"generation-mode reconstruction error: "
      f"{reconstruction_error(model, dataset, teacher_forcing=False):.5f}")

write(render_history(history), OUT / "training_curve.svg")
save_checkpoint(model, OUT / "demo_checkpoint.json")
print(f"saved {OUT / 'demo_checkpoint.json'} and {OUT / 'training_curve.svg'}")
