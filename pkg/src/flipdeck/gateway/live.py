"""In-process fan-out of tally updates to live-channel subscribers.

Delivery is at-least-once and ordered per subscriber; each message is a full
tally snapshot, so duplicates are harmless and a client can always re-sync
with a plain tally fetch.
"""

from __future__ import annotations

import queue
import threading
from ..app import App
from ..routine import QuestionInstance


class LiveHub:
    def __init__(self, app: App) -> None:
        self._app = app
        self._subs: dict[str, list[queue.Queue]] = {}
        self._lock = threading.Lock()
        app.on_vote(self._on_vote)

    def _on_vote(self, instance: QuestionInstance, seq: int) -> None:
        self.publish(instance, seq)

    def publish(self, instance: QuestionInstance, seq: int) -> None:
        if instance.open_ended:
            return
        message = {
            "event": "tally",
            "seq": seq,
            "instance": instance.id,
            "session": instance.session_id,
            "tally": instance.tally().to_dict(),
        }
        with self._lock:
            for q in self._subs.get(instance.session_id, []):
                q.put(message)

    def subscribe(self, session_id: str) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subs.setdefault(session_id, []).append(q)
        return q

    def unsubscribe(self, session_id: str, q: queue.Queue) -> None:
        with self._lock:
            subs = self._subs.get(session_id, [])
            if q in subs:
                subs.remove(q)

    def initial_snapshots(self, session_id: str) -> list[dict]:
        session = self._app.get_session(session_id)
        out = []
        for iid in session.instance_ids:
            instance = self._app.get_instance(iid)
            if instance.open_ended:
                continue
            out.append(
                {
                    "event": "tally",
                    "seq": self._app.applied_seq,
                    "instance": instance.id,
                    "session": session_id,
                    "tally": instance.tally().to_dict(),
                }
            )
        return out
