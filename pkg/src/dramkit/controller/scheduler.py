"""Request schedulers.

A scheduler picks, among the requests whose next command is issuable this
cycle, the one to serve.  Readiness itself comes from the controller's
queues (:meth:`ReqQueue.collect_ready`), so schedulers only rank.
"""

from __future__ import annotations

from ..registry import Component


class FRFCFS(Component):
    """First-ready, row-hit first, then oldest; ties broken by request id."""

    interface = "Scheduler"
    params = {}
    # precharges are held back while queued requests still hit the open row
    row_hits_first = True

    def select(self, ready: list):
        best = None
        best_key = None
        for req in ready:
            key = (req.cmd != req.stages[req.stage], req.arrive_clk, req.id)
            if best is None or key < best_key:
                best, best_key = req, key
        return best

    def schedule(self, queues, clk: int):
        """Return ``(request, queue)`` for this cycle or ``(None, None)``."""
        if queues.priority.items:
            req, queue = queues.first_ready_priority(clk)
            if req is not None:
                return req, queue
        queue = queues.active(clk)
        if queue is None:
            return None, None
        ready = queue.collect_ready(clk)
        best = self.select(ready) if ready else None
        queue.restore()
        if best is None:
            return None, None
        return best, queue


class FCFS(FRFCFS):
    """Strict arrival order: only the oldest eligible request may issue."""

    row_hits_first = False

    def schedule(self, queues, clk: int):
        if queues.priority.items:
            req, queue = queues.first_ready_priority(clk)
            if req is not None:
                return req, queue
        queue = queues.active(clk)
        if queue is None:
            return None, None
        ready = queue.collect_ready(clk)
        queue.restore()
        oldest = queues.oldest_eligible(queue, clk)
        if oldest is not None and any(r is oldest for r in ready):
            return oldest, queue
        return None, None
