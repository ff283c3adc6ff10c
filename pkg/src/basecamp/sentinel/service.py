"""Line-delimited JSON command loop for the detection service.

One JSON object per input line, one JSON reply per line, errors
reported in-band so a bad command never kills the loop.

  {"cmd": "select", "data": [...], "labels": [...], "budget": 50}
  {"cmd": "detect", "model": {...}, "data": [...]}
  {"cmd": "refit",  "model": {...}, "data": [...]}
"""

from __future__ import annotations

import json
import sys

from ..errors import BasecampError
from .detectors import DetectorModel, detect, refit
from .select import select_model


def handle(cmd: dict) -> dict:
    kind = cmd.get("cmd")
    if kind == "select":
        res = select_model(
            cmd["data"],
            cmd.get("labels"),
            cmd.get("budget", 100),
            seed=int(cmd.get("seed", 0)))
        out = {
            "ok": True,
            "model": res.model.to_json(),
            "loss": res.loss,
            "score": res.score,
            "trials": res.trials,
        }
        if res.warning:
            out["warning"] = res.warning
        return out
    if kind == "detect":
        m = DetectorModel.from_json(cmd["model"])
        return {"ok": True, "report": detect(m, cmd["data"]).to_json()}
    if kind == "refit":
        m = DetectorModel.from_json(cmd["model"])
        return {"ok": True, "model": refit(m, cmd["data"]).to_json()}
    return {"ok": False, "error": f"unknown command {kind!r}"}


def serve(stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            reply = handle(json.loads(line))
        except (BasecampError, KeyError, ValueError, TypeError) as e:
            reply = {"ok": False, "error": str(e)}
        stdout.write(json.dumps(reply, sort_keys=True) + "\n")
        stdout.flush()
    return 0
