"""Spin up the inference service in-process and talk to it over HTTP.

The same four endpoints back the browser explorer in frontend/:
GET /model, POST /decode, POST /rationality, GET /sweep?code=k.
"""

import json
import threading
import urllib.request
from pathlib import Path

from encforge import load_checkpoint
from encforge.server import make_server

OUT = Path(__file__).parent / "out"
ckpt = OUT / "demo_checkpoint.json"
if not ckpt.exists():
    raise SystemExit("run 02_train_generator.py first (missing demo_checkpoint.json)")

model = load_checkpoint(ckpt)
server = make_server(model, port=0, horizon=25)  # port 0: pick a free one
host, port = server.server_address
thread = threading.Thread(target=server.serve_forever, daemon=True)
thread.start()
base = f"http://{host}:{port}"
print(f"service up at {base}")

info = json.load(urllib.request.urlopen(base + "/model"))
print("GET /model ->", info)

req = urllib.request.Request(base + "/decode",
                             data=json.dumps({"z": [0.0] * info["K"]}).encode(),
                             headers={"Content-Type": "application/json"})
decoded = json.load(urllib.request.urlopen(req))
print(f"POST /decode -> s1[0]={decoded['s1'][0]}, {len(decoded['s1'])} points")

frames = json.load(urllib.request.urlopen(base + "/sweep?code=0"))["frames"]
print(f"GET /sweep?code=0 -> {len(frames)} frames, values "
      f"{frames[0]['value']} ... {frames[-1]['value']}")

server.shutdown()
server.server_close()
print("\nfor the browser explorer:")
print(f"  encforge serve --checkpoint {ckpt} --port 8787")
print("  cd frontend && npm install && npm run build")
print("  then open frontend/index.html (add ?endpoint=http://127.0.0.1:8787 if needed)")
