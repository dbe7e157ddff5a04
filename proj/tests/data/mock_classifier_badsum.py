#!/usr/bin/env python3
"""Protocol violator: probability rows sum to 0.8."""
import json
import sys

for line in sys.stdin:
    req = json.loads(line)
    if req["op"] == "info":
        print(json.dumps({"classes": ["a", "b"], "n_channels": 1, "length": 8}),
              flush=True)
    else:
        rows = [[0.4, 0.4] for _ in req["instances"]]
        print(json.dumps({"proba": rows}), flush=True)
