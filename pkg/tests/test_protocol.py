import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from cfuav.config import load_config_path
from cfuav.protocol import PROTOCOL_VERSION, Session, encode, serve_streams

DATA = Path(__file__).parent / "data"


def request(session, **payload):
    text, keep = session.handle_line(json.dumps(payload))
    return json.loads(text), keep


def serve_lines(config, lines, observer=None):
    reader = io.BytesIO(("\n".join(lines) + "\n").encode())
    writer = io.BytesIO()
    serve_streams(config, reader, writer, observer=observer)
    return writer.getvalue()


# -- encoding -----------------------------------------------------------------

def test_encode_full_precision_floats():
    assert encode(0.1) == "0.10000000000000001"
    assert encode(1.0) == "1"
    assert encode(2.0 / 3.0) == "0.66666666666666663"
    assert float(encode(0.1)) == 0.1


def test_encode_structures():
    assert encode({"a": [1, 2.5, True, None], "b": "x\"y"}) == \
        '{"a":[1,2.5,true,null],"b":"x\\"y"}'
    assert encode(np.float64(0.25)) == "0.25"
    assert encode(np.array([1.0, 0.5])) == "[1,0.5]"
    assert encode(np.int64(7)) == "7"


def test_encoded_floats_round_trip():
    rng = np.random.default_rng(1)
    for x in rng.uniform(-1e6, 1e6, 200):
        assert float(encode(float(x))) == float(x)


# -- session semantics -----------------------------------------------------------

def golden_config():
    return load_config_path(DATA / "golden_scenario.toml")


def test_hello_reports_dimensions(k19_cfg):
    session = Session(k19_cfg)
    reply, keep = request(session, cmd="hello")
    assert keep
    assert reply == {"ok": True, "n_max": 6, "k": 19, "obs_len": 138,
                     "protocol_version": PROTOCOL_VERSION}


def test_reset_deterministic_bytes():
    config = golden_config()
    a = Session(config).handle_line('{"cmd": "reset", "seed": 42}')[0]
    b = Session(config).handle_line('{"cmd": "reset", "seed": 42}')[0]
    assert a == b
    obs = json.loads(a)["obs"]
    assert len(obs) == 3 * (4 + 4)


def test_step_before_reset_is_error():
    session = Session(golden_config())
    reply, keep = request(session, cmd="step", action=[[0.0] * 4] * 3)
    assert keep
    assert reply["ok"] is False
    assert "reset" in reply["error"]


def test_step_response_fields():
    session = Session(golden_config())
    request(session, cmd="reset", seed=1)
    reply, _ = request(session, cmd="step", action=[[0.5] * 4] * 3)
    assert reply["ok"] is True
    for key in ("obs", "reward", "q1", "q2", "q3", "eps", "clusters", "done"):
        assert key in reply
    assert len(reply["eps"]) == 3
    assert len(reply["clusters"]) == 3
    assert all(isinstance(c, list) for c in reply["clusters"])


def test_out_of_range_action_is_error_and_state_survives():
    config = golden_config()
    session = Session(config)
    request(session, cmd="reset", seed=5)
    bad, _ = request(session, cmd="step", action=[[1.5] * 4] * 3)
    assert bad["ok"] is False
    assert "range" in bad["error"].lower() or "[0, 1]" in bad["error"]

    good_after_bad, _ = request(session, cmd="step", action=[[0.25] * 4] * 3)

    fresh = Session(config)
    request(fresh, cmd="reset", seed=5)
    good_fresh, _ = request(fresh, cmd="step", action=[[0.25] * 4] * 3)
    assert good_after_bad == good_fresh


def test_malformed_json_keeps_session_alive():
    session = Session(golden_config())
    reply, keep = session.handle_line("{nope")
    assert keep
    assert json.loads(reply)["ok"] is False
    ok_reply, _ = request(session, cmd="hello")
    assert ok_reply["ok"] is True


def test_unknown_command_is_error():
    reply, keep = request(Session(golden_config()), cmd="fly")
    assert keep and reply["ok"] is False


def test_close_ends_session():
    reply, keep = request(Session(golden_config()), cmd="close")
    assert reply == {"ok": True}
    assert not keep


def test_serve_streams_eof_is_clean():
    config = golden_config()
    out = serve_lines(config, ['{"cmd": "hello"}'])  # no close; EOF afterwards
    assert out.endswith(b"\n")
    assert json.loads(out.splitlines()[0])["ok"] is True


def test_serve_streams_skips_blank_lines():
    config = golden_config()
    reader = io.BytesIO(b'\n{"cmd": "hello"}\n\n{"cmd": "close"}\n')
    writer = io.BytesIO()
    served = serve_streams(config, reader, writer)
    assert served == 2
    assert len(writer.getvalue().splitlines()) == 2


def test_session_replay_byte_identical():
    config = golden_config()
    lines = [
        '{"cmd": "hello"}',
        '{"cmd": "reset", "seed": 9}',
        '{"cmd": "step", "action": %s}' % json.dumps([[0.3] * 4] * 3),
        '{"cmd": "step", "action": %s}' % json.dumps([[0.0] * 4] * 3),
        '{"cmd": "close"}',
    ]
    assert serve_lines(config, lines) == serve_lines(config, lines)


def test_golden_transcript_replay():
    config = golden_config()
    requests = (DATA / "golden_requests.jsonl").read_bytes()
    golden = (DATA / "golden_responses.jsonl").read_bytes()
    writer = io.BytesIO()
    serve_streams(config, io.BytesIO(requests), writer)
    assert writer.getvalue() == golden


def test_serve_subprocess_stdio():
    proc = subprocess.Popen(
        [sys.executable, "-m", "cfuav.cli", "serve",
         "--config", str(DATA / "golden_scenario.toml")],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE)
    try:
        requests = [
            {"cmd": "hello"},
            {"cmd": "reset", "seed": 2},
            {"cmd": "step", "action": [[0.1] * 4] * 3},
            {"cmd": "close"},
        ]
        payload = "".join(json.dumps(r) + "\n" for r in requests).encode()
        out, _ = proc.communicate(payload, timeout=30)
        replies = [json.loads(line) for line in out.splitlines()]
        assert len(replies) == 4
        assert all(r["ok"] for r in replies)
        assert replies[0]["obs_len"] == 24
        assert proc.wait(timeout=10) == 0
    finally:
        proc.kill()


def test_observer_sees_each_step():
    config = golden_config()
    seen = []
    lines = [
        '{"cmd": "reset", "seed": 3}',
        '{"cmd": "step", "action": %s}' % json.dumps([[0.2] * 4] * 3),
        '{"cmd": "step", "action": %s}' % json.dumps([[0.2] * 4] * 3),
        '{"cmd": "close"}',
    ]
    serve_lines(config, lines, observer=seen.append)
    assert len(seen) == 2
