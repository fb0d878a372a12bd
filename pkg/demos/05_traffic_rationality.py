"""Traffic-rationality profiles: are generated encounters plausible?

Three per-encounter criteria, all in normalized units:

  * inter-vehicle distance at each time step,
  * speed, as the distance between adjacent points,
  * direction change, the absolute angle between consecutive steps.

Generated encounters are compared against the synthetic reference set
(dashed overlay = reference mean). Straight constant-speed traffic shows
flat speed and zero direction change; circles and sharp turns show up as
direction spikes.
"""

from pathlib import Path

from encforge import SynthSpec, load_checkpoint, normalize, resample_encounter, synth_generate
from encforge.metrics import rationality_report
from encforge.svgplot import render_rationality, write

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

reference = [normalize(resample_encounter(e, 25))
             for e in synth_generate(SynthSpec(family="crossing", count=8, seed=21))]

report = rationality_report(reference[0], reference=reference[1:])
print("real synthetic encounter:")
print(f"  distance  mean {report.summary['distance']['mean']:.3f}  "
      f"max {report.summary['distance']['max']:.3f}")
print(f"  speed     mean {report.summary['speed']['mean']:.4f}")
print(f"  direction max  {report.summary['direction']['max']:.2e} deg (straight)")
write(render_rationality(report), OUT / "rationality_reference.svg")

ckpt = OUT / "demo_checkpoint.json"
if ckpt.exists():
    model = load_checkpoint(ckpt)
    gen = model.decode([0.5] * model.latent, 25)
    gen_report = rationality_report(gen, reference=reference)
    print("\ngenerated encounter (z = 0.5):")
    print(f"  distance  mean {gen_report.summary['distance']['mean']:.3f}")
    print(f"  speed     mean {gen_report.summary['speed']['mean']:.4f}")
    print(f"  direction max  {gen_report.summary['direction']['max']:.1f} deg")
    write(render_rationality(gen_report), OUT / "rationality_generated.svg")
    print(f"\nwrote {OUT}/rationality_*.svg (dashed line = reference mean)")
else:
    print("\n(no demo checkpoint; run 02_train_generator.py for the generated part)")
