"""Walk each latent code from -1 to 1 and render the decoded encounters.

Run 02_train_generator.py first to produce the checkpoint. Each panel row
shows one code's 21 traversal frames; codes that learned something produce
visibly different trajectories across a row, dead codes produce a constant
row.
"""

from pathlib import Path

import numpy as np

from encforge import latent_sweep, load_checkpoint
from encforge.svgplot import render_sweep_panel, write

OUT = Path(__file__).parent / "out"
ckpt = OUT / "demo_checkpoint.json"
if not ckpt.exists():
    raise SystemExit("run 02_train_generator.py first (missing demo_checkpoint.json)")

model = load_checkpoint(ckpt)
print(f"loaded {model.variant}: K={model.latent}, H={model.hidden}")

for code in range(model.latent):
    frames = latent_sweep(model, code, horizon=25)
    # how much does this code actually move the output?
    spread = max(float(np.abs(a.s1 - b.s1).max())
                 for (_, a), (_, b) in zip(frames[:-1], frames[1:]))
    print(f"code {code}: 21 frames, max step-to-step movement {spread:.4f}")
    write(render_sweep_panel(frames), OUT / f"sweep_code{code}.svg")

print(f"\npanels written to {OUT}/sweep_code*.svg")
print("start/end markers are green/red; values run -1.0 ... +1.0 left to right")
