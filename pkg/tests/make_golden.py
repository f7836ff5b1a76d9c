"""Regenerate the golden protocol transcript.

Run from the repo root after any intentional protocol or numerics change:

    python tests/make_golden.py

The conformance test replays golden_requests.jsonl and requires the served
bytes to equal golden_responses.jsonl exactly.
"""
import io
import json
from pathlib import Path

from cfuav.config import load_config_path
from cfuav.protocol import serve_streams

DATA = Path(__file__).parent / "data"


def golden_requests() -> list[str]:
    actions = {
        "low": [[0.1, 0.0, 0.3, 0.0], [0.0, 0.2, 0.0, 0.0], [0.5, 0.0, 0.0, 0.4]],
        "full": [[1.0] * 4] * 3,
        "zero": [[0.0] * 4] * 3,
    }
    lines = [
        json.dumps({"cmd": "hello"}),
        json.dumps({"cmd": "step", "action": actions["low"]}),  # error: no reset
        json.dumps({"cmd": "reset", "seed": 42}),
        json.dumps({"cmd": "step", "action": actions["low"]}),
        json.dumps({"cmd": "step", "action": actions["low"]}),
        json.dumps({"cmd": "step", "action": actions["full"]}),
        json.dumps({"cmd": "step", "action": actions["zero"]}),
        json.dumps({"cmd": "nonsense"}),
        json.dumps({"cmd": "reset", "seed": 42}),
        json.dumps({"cmd": "step", "action": actions["low"]}),
        json.dumps({"cmd": "close"}),
    ]
    return lines


def main() -> None:
    config = load_config_path(DATA / "golden_scenario.toml")
    requests = golden_requests()
    reader = io.BytesIO(("\n".join(requests) + "\n").encode())
    writer = io.BytesIO()
    serve_streams(config, reader, writer)
    (DATA / "golden_requests.jsonl").write_bytes(("\n".join(requests) + "\n").encode())
    (DATA / "golden_responses.jsonl").write_bytes(writer.getvalue())
    print(f"wrote {len(requests)} request/response pairs")


if __name__ == "__main__":
    main()
