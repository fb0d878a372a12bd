"""Criterion 9, explorer parity: run the browser client against a live service.

Reuses the overfit checkpoint written by the acceptance suite (training it
first if missing, ~5 minutes), generates the reference sweep CSV through
the CLI, starts `encforge serve`, and runs the frontend's integration
tests against it.

Usage: python scripts/secondary_acceptance.py [--checkpoint PATH]
"""

import argparse
import json
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from acceptance_config import (ARTIFACTS, HORIZON, OVERFIT_CHECKPOINT,  # noqa: E402
                               OVERFIT_CONFIG, overfit_dataset)

PORT = 8731


def ensure_checkpoint(path: Path) -> None:
    if path.exists():
        print(f"using checkpoint {path}")
        return
    print("no overfit checkpoint found; training it now (about 5 minutes)...")
    from encforge.checkpoint import save_checkpoint
    from encforge.model import train
    model, _ = train(overfit_dataset(), OVERFIT_CONFIG)
    ARTIFACTS.mkdir(exist_ok=True)
    save_checkpoint(model, path)
    print(f"wrote {path}")


def wait_for(url: str, timeout: float = 30.0) -> dict:
    deadline = time.time() + timeout
    while time.time() < deadline:
        try:
            with urllib.request.urlopen(url, timeout=2) as r:
                return json.loads(r.read())
        except OSError:
            time.sleep(0.2)
    raise RuntimeError(f"service did not come up at {url}")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--checkpoint", default=str(OVERFIT_CHECKPOINT))
    ap.add_argument("--port", type=int, default=PORT)
    args = ap.parse_args()

    ckpt = Path(args.checkpoint)
    ensure_checkpoint(ckpt)

    sweep_dir = ARTIFACTS / "secondary_sweep"
    code = subprocess.run(
        [sys.executable, "-m", "encforge.cli", "sweep", "--checkpoint", str(ckpt),
         "--code", "0", "--horizon", str(HORIZON), "--out", str(sweep_dir)],
        cwd=ROOT).returncode
    if code != 0:
        print("sweep generation failed", file=sys.stderr)
        return code
    sweep_csv = sweep_dir / "sweep_code0.csv"

    frontend = ROOT / "frontend"
    if not (frontend / "node_modules").exists():
        subprocess.run(["npm", "install", "--silent"], cwd=frontend, check=True)

    server = subprocess.Popen(
        [sys.executable, "-m", "encforge.cli", "serve", "--checkpoint", str(ckpt),
         "--port", str(args.port), "--horizon", str(HORIZON)],
        cwd=ROOT)
    try:
        info = wait_for(f"http://127.0.0.1:{args.port}/model")
        print(f"service up: {info}")
        env = {"EXPLORER_SERVICE_URL": f"http://127.0.0.1:{args.port}",
               "EXPLORER_SWEEP_CSV": str(sweep_csv)}
        result = subprocess.run(
            ["npx", "vitest", "run", "test/integration.test.ts"],
            cwd=frontend, env={**dict(__import__("os").environ), **env})
    finally:
        server.terminate()
        server.wait(timeout=10)

    if result.returncode == 0:
        print("\nACCEPTANCE 9: PASS - explorer consumes the /decode payload at z=0 "
              "and its 21 traversal frames match the sweep CSV to 1e-6")
    else:
        print("\nACCEPTANCE 9: FAIL", file=sys.stderr)
    return result.returncode


if __name__ == "__main__":
    sys.exit(main())
