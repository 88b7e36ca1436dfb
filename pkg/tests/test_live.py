"""Live tally stream against a real loopback server."""

from __future__ import annotations

import json
import threading

import httpx
import pytest

from flipdeck.app import App, LogicalClock
from flipdeck.gateway.http import build_api
from flipdeck.gateway.sim import LoopbackServer

POLL_TEXT = "Pick a side.\nA) left\nB) right"


def H(actor: str) -> dict:
    return {"Authorization": f"Bearer tok-{actor}"}


@pytest.fixture
def server():
    core = App(clock=LogicalClock())
    core.register_actor("prof", "instructor")
    for i in range(1, 5):
        core.register_actor(f"stu-{i}", "student")
    with LoopbackServer(build_api(core)) as base_url:
        yield base_url


def _collect_events(base_url: str, session_id: str, want: int, out: list, ready: threading.Event):
    with httpx.Client(base_url=base_url, timeout=20.0) as http:
        with http.stream("GET", f"/live/{session_id}", headers=H("prof")) as response:
            assert response.status_code == 200
            ready.set()
            for line in response.iter_lines():
                if line.startswith("data: "):
                    out.append(json.loads(line.removeprefix("data: ")))
                    if len(out) >= want:
                        return


def test_stream_emits_one_delta_per_vote_in_seq_order(server):
    http = httpx.Client(base_url=server, timeout=10.0)
    sid = http.post(
        "/sessions", json={"kind": "poll_prompt_quiz", "course": "c1"}, headers=H("prof")
    ).json()["id"]
    pid = http.post(f"/sessions/{sid}/polls", json={"text": POLL_TEXT}, headers=H("prof")).json()["id"]

    events: list = []
    ready = threading.Event()
    # one snapshot on subscribe + one delta per vote
    collector = threading.Thread(
        target=_collect_events, args=(server, sid, 4, events, ready), daemon=True
    )
    collector.start()
    assert ready.wait(timeout=10.0)

    for i, label in enumerate(["A", "B", "A"], start=1):
        response = http.post(
            f"/instances/{pid}/votes", json={"labels": [label]}, headers=H(f"stu-{i}")
        )
        assert response.status_code == 200
    collector.join(timeout=15.0)
    assert not collector.is_alive(), f"only saw {len(events)} events"

    deltas = events[1:]  # events[0] is the initial snapshot
    assert len(deltas) == 3
    seqs = [d["seq"] for d in deltas]
    assert seqs == sorted(seqs)
    assert [d["tally"]["voters"] for d in deltas] == [1, 2, 3]
    assert deltas[-1]["tally"]["counts"] == {"A": 2, "B": 1}

    # stream state matches a plain tally fetch (re-sync contract)
    tally = http.get(f"/instances/{pid}/tally", headers=H("prof")).json()
    assert tally == deltas[-1]["tally"]
    http.close()
