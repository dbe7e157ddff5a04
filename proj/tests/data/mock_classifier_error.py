#!/usr/bin/env python3
"""Replies with an error object to predict_proba requests."""
import json
import sys

for line in sys.stdin:
    req = json.loads(line)
    if req["op"] == "info":
        print(json.dumps({"classes": ["a", "b"], "n_channels": 1, "length": 8}),
              flush=True)
    else:
        print(json.dumps({"error": "boom"}), flush=True)
