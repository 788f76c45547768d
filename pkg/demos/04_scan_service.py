"""Score functions with the trained toy model, then serve the HTTP API.

Needs artifacts/toy.shlk from demos/02_train_toy_model.py. Scans a few
snippets in-process, then starts the scan service (Ctrl-C to stop); with
the service up, the web UI under frontend/ can talk to it.

Run from the repository root:  python3 demos/04_scan_service.py
"""

import sys
from pathlib import Path

from sherlock import load_model, predict
from sherlock.service import make_server, serve_forever

MODEL_PATH = Path(__file__).resolve().parent.parent / "artifacts" / "toy.shlk"
if not MODEL_PATH.exists():
    sys.exit("artifacts/toy.shlk missing - run demos/02_train_toy_model.py first")

model, vocab = load_model(MODEL_PATH)

SNIPPETS = {
    "unchecked strcpy": "void f(char *d, char *s) { strcpy(d, s); }",
    "shell invocation": "int run(char *cmd) { return system(cmd); }",
    "plain arithmetic": "int add(int a, int b) { return a + b; }",
}

for label, code in SNIPPETS.items():
    result = predict(model, code, vocab)
    top = max(result.probabilities, key=result.probabilities.get)
    print(f"{label}: {result.token_count} tokens")
    for name, probability in result.probabilities.items():
        marker = " <-" if name == top and probability >= 0.5 else ""
        print(f"  {name:<10} {probability:.4f}{marker}")

server = make_server(model, vocab, host="127.0.0.1", port=8765)
print("\nPOST {\"code\": \"...\"} to http://127.0.0.1:8765/scan  (Ctrl-C stops)")
print('e.g. curl -s -X POST localhost:8765/scan -d \'{"code": "strcpy(a, b);"}\'')
serve_forever(server)
