"""Per-channel memory controller.

One tick runs, in order: the refresh manager, every plugin's ``on_tick``,
the scheduler, the issue of at most one command, every plugin's
``on_command_issued``, and finally the completion of requests whose data
has arrived.  Mitigations live entirely in plugins; nothing here knows
about any of them.
"""

from __future__ import annotations

import math
from heapq import heappop, heappush

from ..errors import BadParameter, ProtocolViolation, WatchdogTimeout
from ..registry import Component
from ..dramspec.library import require_bank_closed, require_row_open
from .plugin import PluginHost
from .queues import ReqQueue
from .request import MAINTENANCE, READ, Request

_STATE_KINDS = ("opens_row", "closes_row", "closes_all", "refresh")


class QueueSet:
    """The three request buffers plus the controller's view of eligibility."""

    def __init__(self, ctrl: "GenericController", read_cap: int, write_cap: int, prio_cap: int):
        self.read = ReqQueue(read_cap, "read")
        self.write = ReqQueue(write_cap, "write")
        self.priority = ReqQueue(prio_cap, "priority", indexed=False)
        self.first_ready_priority = ctrl._first_ready_priority
        self._ctrl = ctrl
        self.wr_high = max(1, math.ceil(ctrl.p["wr_high"] * write_cap))
        self.wr_low = int(ctrl.p["wr_low"] * write_cap)
        self.draining = False

    def active(self, clk: int):
        """The direction queue served this cycle (write drain with hysteresis)."""
        r, w = self.read, self.write
        n = len(w)
        if self.draining:
            if n <= self.wr_low:
                self.draining = False
        elif n >= self.wr_high:
            self.draining = True
        if self.draining and n:
            return w
        if r.items:
            return r
        if n:
            return w
        return None

    def oldest_eligible(self, queue: ReqQueue, clk: int):
        hold = self._ctrl._hold
        for req in queue.items:
            if not hold[req.bank]:
                return req
        return None


class GenericController(Component):
    interface = "Controller"
    params = {
        "read_queue": 32,
        "write_queue": 32,
        "priority_queue": 4096,
        "wr_high": 0.75,
        "wr_low": 0.25,
        "forward_latency": 1,
        "hit_cap": 16,
        "watchdog": 1_000_000,
        "audit": False,
    }
    slots = {
        "Scheduler": "Scheduler",
        "RefreshManager": "RefreshManager",
        "RowPolicy": "RowPolicy",
        "plugins": "ControllerPlugin",
    }
    list_slots = ("plugins",)

    @classmethod
    def validate(cls, params, path):
        for key in ("read_queue", "write_queue", "priority_queue", "forward_latency", "hit_cap", "watchdog"):
            if params[key] < 1:
                raise BadParameter(f"{path}.{key}", "must be >= 1")
        if not 0.0 <= params["wr_low"] < params["wr_high"] <= 1.0:
            raise BadParameter(f"{path}.wr_high", "need 0 <= wr_low < wr_high <= 1")

    def __init__(self, params, ctx):
        super().__init__(params, ctx)
        env = ctx.env
        self.tree = env["tree"]
        self.spec = self.tree.spec
        self.channel = env["channel"]
        self.shared = env.get("shared", {})
        self.seed = env.get("seed", 0)
        self.clk = 0
        self._setup_tables()

        self.queues = QueueSet(self, params["read_queue"], params["write_queue"], params["priority_queue"])
        for q in (self.queues.read, self.queues.write):
            q.next_ready = self._nr
            q.target_level = self._tl
            q.decode_bank = self._decode_bank
        self._hold = [0] * self.tree.n_banks
        # bank -> (request, queue) whose activation is still owed its first access
        self._pledge: dict = {}
        self._completions: list = []
        self._wq_addrs: dict[tuple, int] = {}
        self._prio_wake = None
        self.audit = params["audit"]
        self._hit_cap = params["hit_cap"]
        self._watchdog = params["watchdog"]

        self.scheduler = ctx.build_child("Scheduler")
        self._row_hits_first = getattr(self.scheduler, "row_hits_first", True)
        self.row_policy = ctx.build_child("RowPolicy")
        self.row_policy.bind(self.spec)
        self._policy_demand = getattr(self.row_policy, "uses_demand", True)
        self._policy_active = bool(self._auto) and self._policy_demand
        self.host = PluginHost(self)
        self.refresh = ctx.build_child("RefreshManager")
        self.refresh.bind(self.host)
        self.plugins = ctx.build_children("plugins")
        for plugin in self.plugins:
            plugin.bind(self.host)

        n = len(self.spec.commands)
        self.cmd_counts = [0] * n
        self.counters = {
            "reads": 0,
            "writes": 0,
            "forwarded": 0,
            "row_hits": 0,
            "row_misses": 0,
            "row_conflicts": 0,
            "read_latency_sum": 0,
            "maintenance_dropped": 0,
        }
        self.maintenance_done: dict[str, int] = {}

    def _setup_tables(self):
        spec, tree = self.spec, self.tree
        ci = spec.command_index

        def plain(kind):
            for c in spec.commands_of(kind):
                if "closes_row" not in spec.kinds[c]:
                    return ci[c]
            raise BadParameter(f"{self.ctx.path}", f"{spec.name} has no plain {kind} command")

        self._rd = plain("read")
        self._wr = plain("write")
        self._auto = {ci[a]: ci[b] for a, b in spec.autoprecharge.items()}
        self._closing = [bool({"closes_row", "closes_all"} & spec.kinds[c]) for c in spec.commands]
        n = len(spec.commands)
        # banks whose candidates a command can invalidate: its scope, or -1
        self._touch_scope = [
            tree.scope_level[i] if any(k in spec.kinds[c] for k in _STATE_KINDS) else -1
            for i, c in enumerate(spec.commands)
        ]
        self._bank_level = tree.bank_level
        self._opens = ["opens_row" in spec.kinds[c] for c in spec.commands]
        # targets whose prerequisite is the plain row check, decoded inline
        ids = self.tree.ids
        preq_fns = self.tree._preq
        inline = (
            hasattr(ids, "ACT") and hasattr(ids, "PRE")
            and preq_fns[ids.ACT] in (None, require_bank_closed) and preq_fns[ids.PRE] is None
        )
        self._row_gate = [inline and fn is require_row_open for fn in preq_fns]
        self._act_id = ids.ACT if inline else -1
        self._pre_id = ids.PRE if inline else -1
        # _completes[target][cmd]: issuing cmd finishes a stage aiming at target
        self._completes = [[c == t or self._auto.get(t) == c for c in range(n)] for t in range(n)]
        t = spec.timing
        self._data_latency = [0] * len(spec.commands)
        for i, c in enumerate(spec.commands):
            if "read" in spec.kinds[c]:
                self._data_latency[i] = t["nCL"] + t["nBL"]
            elif "write" in spec.kinds[c]:
                self._data_latency[i] = t["nCWL"] + t["nBL"]
        self._scope_full = [spec.level_index[spec.scopes[c]] for c in spec.commands]
        self._n_levels = len(spec.levels)
        self._nr = tree.next_ready
        self._tl = tree.target_level

    # -- request intake ----------------------------------------------------------

    def enqueue(self, req: Request, clk: int) -> bool:
        """Accept a read or write; False when its queue is full."""
        self.clk = clk
        addr = req.addr_vec
        if req.type == READ:
            if addr in self._wq_addrs:
                req.arrive_clk = clk
                self.counters["forwarded"] += 1
                heappush(self._completions, (clk + self.p["forward_latency"], req.id, req))
                return True
            queue = self.queues.read
            req.stages = (self._rd,)
        else:
            queue = self.queues.write
            req.stages = (self._wr,)
        if len(queue.items) >= queue.capacity:
            return False
        tree = self.tree
        req.arrive_clk = clk
        req.loc = tree.locate(addr)
        req.bank = req.loc[tree.bank_level]
        req.row = addr[tree.row_level]
        req.stage = 0
        queue.push(req)
        if queue is self.queues.write:
            self._wq_addrs[addr] = self._wq_addrs.get(addr, 0) + 1
        return True

    def inject(self, req: Request) -> bool:
        """Priority path for maintenance requests (refresh, plugins)."""
        prio = self.queues.priority
        if len(prio.items) >= prio.capacity:
            self.counters["maintenance_dropped"] += 1
            return False
        tree, spec = self.tree, self.spec
        req.type = MAINTENANCE
        req.stages = tuple(spec.command_index[c] for c in req.maintenance)
        req.stage = 0
        req.arrive_clk = self.clk
        req.loc = tree.locate([a if a >= 0 else 0 for a in req.addr_vec[: tree.n_node_levels]])
        scope = min(tree.scope_level[c] for c in req.stages)
        lo, hi = tree.banks_under(scope, req.loc)
        req.span = (lo, hi)
        req.bank = lo
        req.row = req.addr_vec[tree.row_level] if len(req.addr_vec) > tree.row_level else -1
        prio.push(req)
        hold = self._hold
        for b in range(lo, hi):
            hold[b] += 1
        span = range(lo, hi)
        self.queues.read.touch(span)
        self.queues.write.touch(span)
        return True

    # -- eligibility and decode --------------------------------------------------

    def _decode_bank(self, queue: ReqQueue, b: int, clk: int) -> list:
        """Candidates ``[(cmd, oldest request needing cmd), ...]`` for one bank.

        Empty while a maintenance request holds the bank.  With row-hit
        priority, closing the row is not a candidate while some queued
        request still hits it (up to ``hit_cap`` accesses per activation).
        """
        if self._hold[b]:
            return []
        tree = self.tree
        preq_fns = tree._preq
        gate = self._row_gate
        open_r = tree.open_row[b]
        miss = self._act_id if open_r < 0 else self._pre_id
        seen = {}
        for req in queue.in_bank(b):
            target = req.stages[0]
            if gate[target]:
                cmd = target if req.row == open_r else miss
                if cmd not in seen:
                    seen[cmd] = req
                    req.cmd = cmd
                continue
            fn = preq_fns[target]
            cmd = target if fn is None else fn(tree, target, req.loc, req.addr_vec)
            if cmd != target:
                cmd = tree.preq(target, req.loc, req.addr_vec)
            if cmd not in seen:
                seen[cmd] = req
                req.cmd = cmd
        if len(seen) > 1 and self._row_hits_first and tree.row_accesses[b] < self._hit_cap:
            if any(req.stages[0] == cmd for cmd, req in seen.items()):
                closing = self._closing
                return [(c, r) for c, r in seen.items() if not (closing[c] and c != r.stages[0])]
        return list(seen.items())

    def _first_ready_priority(self, clk: int):
        """``(request, queue)`` for the oldest ready maintenance request, or ``(None, None)``.

        Only the oldest request per bank range is eligible.  A bank whose row
        a demand request just activated is pledged to that request: its first
        access goes ahead here, in either direction, and maintenance covering
        the bank waits for it.  Without this an injected refresh could close
        the row each time before its access, forever.
        """
        items = self.queues.priority.items
        self._prio_wake = None
        if not items:
            return None, None
        tree = self.tree
        nr, tl = self._nr, self._tl
        wake = None
        claimed = set()
        pledge = self._pledge
        if pledge:
            open_row = tree.open_row
            for b in list(pledge):
                req, queue = pledge[b]
                if req.stage or open_row[b] != req.row or req.bank != b:
                    del pledge[b]
                    continue
                claimed.add(b)
                target = req.stages[0]
                cmd = tree.preq(target, req.loc, req.addr_vec)
                if cmd != target:
                    del pledge[b]
                    continue
                req.cmd = cmd
                ready = nr[cmd][req.loc[tl[cmd]]]
                if ready <= clk:
                    return req, queue
                if wake is None or ready < wake:
                    wake = ready
        prio = self.queues.priority
        for req in items:
            lo, hi = req.span
            if hi - lo == 1:
                if lo in claimed:
                    continue
                claimed.add(lo)
            else:
                span = range(lo, hi)
                if not claimed.isdisjoint(span):
                    claimed.update(span)
                    continue
                claimed.update(span)
            cmd = tree.preq(req.stages[req.stage], req.loc, req.addr_vec)
            ready = nr[cmd][req.loc[tl[cmd]]]
            req.cmd = cmd
            req.ready = ready
            if ready <= clk:
                return req, prio
            if wake is None or ready < wake:
                wake = ready
        self._prio_wake = wake
        return None, None

    # -- the cycle ---------------------------------------------------------------

    def tick(self, clk: int) -> list[Request]:
        self.clk = clk
        self.refresh.tick(clk)
        for plugin in self.plugins:
            plugin.on_tick(clk)
        req, queue = self.scheduler.schedule(self.queues, clk)
        if req is not None:
            self._issue(req, queue, clk)
        elif self.audit:
            self._audit(clk)
        done = []
        comp = self._completions
        while comp and comp[0][0] <= clk:
            depart, _, r = heappop(comp)
            r.depart_clk = depart
            self._retire(r)
            done.append(r)
        return done

    def _issue(self, req: Request, queue: ReqQueue, clk: int) -> None:
        tree = self.tree
        cmd = req.cmd
        target = req.stages[req.stage]
        loc = req.loc
        maint = req.type == MAINTENANCE
        if cmd == target and not maint and self._policy_active:
            cmd = self._apply_row_policy(req, cmd, clk)
        if self._nr[cmd][loc[self._tl[cmd]]] > clk:
            raise ProtocolViolation(f"{self.spec.commands[cmd]} issued at {clk} before it was ready")
        if self.audit and tree.preq(cmd, loc, req.addr_vec) != cmd:
            raise ProtocolViolation(f"{self.spec.commands[cmd]} issued at {clk} in an illegal state")
        tree.apply(cmd, loc, req.addr_vec, clk)
        self.cmd_counts[cmd] += 1

        q = self.queues
        scope = self._touch_scope[cmd]
        if scope >= 0:
            if scope == self._bank_level:
                b = (loc[scope],)
                q.read.touch(b)
                q.write.touch(b)
            else:
                span = range(*tree.banks_under(scope, loc))
                q.read.touch(span)
                q.write.touch(span)

        done = self._completes[target][cmd]
        if not maint:
            if self._opens[cmd]:
                self._pledge[req.bank] = (req, queue)
            elif done and self._pledge:
                p = self._pledge.get(req.bank)
                if p is not None and p[0] is req:
                    del self._pledge[req.bank]
        if not maint and not req.classified:
            req.classified = True
            c = self.counters
            if done:
                c["row_hits"] += 1
            elif self._opens[cmd]:
                c["row_misses"] += 1
            else:
                c["row_conflicts"] += 1

        if done:
            req.stage += 1
            if req.stage == len(req.stages):
                self._finish(req, queue, cmd, clk)
            elif queue.indexed:
                queue.touch((req.bank,))
        elif queue.indexed and scope < 0:
            queue.touch((req.bank,))

        if self.plugins:
            n = self._scope_full[cmd] + 1
            addr = req.addr_vec
            masked = tuple(addr[:n]) + (-1,) * (self._n_levels - n)
            for plugin in self.plugins:
                plugin.on_command_issued(cmd, masked, clk)

    def _apply_row_policy(self, req: Request, cmd: int, clk: int) -> int:
        auto = self._auto.get(cmd)
        if auto is None:
            return cmd
        demand = 0
        q = self.queues
        for peer in q.read.in_bank(req.bank):
            if peer.row == req.row:
                demand += 1
        for peer in q.write.in_bank(req.bank):
            if peer.row == req.row:
                demand += 1
        chosen = self.row_policy.adjust(cmd, req, demand)
        if chosen != cmd:
            if self._nr[chosen][req.loc[self._tl[chosen]]] > clk or self.tree.preq(chosen, req.loc, req.addr_vec) != chosen:
                return cmd
        return chosen

    def _finish(self, req: Request, queue: ReqQueue, cmd: int, clk: int) -> None:
        queue.remove(req)
        if req.type == MAINTENANCE:
            lo, hi = req.span
            hold = self._hold
            for b in range(lo, hi):
                hold[b] -= 1
            span = range(lo, hi)
            self.queues.read.touch(span)
            self.queues.write.touch(span)
            heappush(self._completions, (clk, req.id, req))
            return
        if clk - req.arrive_clk > self._watchdog:
            raise WatchdogTimeout(
                f"channel {self.channel}: request {req.id} queued at {req.arrive_clk} served at {clk}"
            )
        if queue is self.queues.write:
            n = self._wq_addrs[req.addr_vec] - 1
            if n:
                self._wq_addrs[req.addr_vec] = n
            else:
                del self._wq_addrs[req.addr_vec]
        heappush(self._completions, (clk + self._data_latency[cmd], req.id, req))

    def _retire(self, req: Request) -> None:
        c = self.counters
        if req.type == READ:
            c["reads"] += 1
            c["read_latency_sum"] += req.depart_clk - req.arrive_clk
        elif req.type == MAINTENANCE:
            key = req.origin or "maintenance"
            self.maintenance_done[key] = self.maintenance_done.get(key, 0) + 1
        else:
            c["writes"] += 1
        if req.callback is not None:
            req.callback(req)

    # -- clock skipping ----------------------------------------------------------

    def next_wakeup(self, clk: int) -> int | None:
        """Earliest cycle after ``clk`` at which ticking can change anything.

        Requests touched this cycle are decoded right away; nothing they
        depend on can change before the next tick without touching them
        again, so their readiness bounds are exact.  Completion times are
        carried in the completion heap, so retiring them late changes no
        statistic.
        """
        nxt = clk + 1
        best = None
        q = self.queues
        if q.priority.items:
            if self._first_ready_priority(nxt)[0] is not None:
                return nxt
            best = self._prio_wake
        active = q.active(clk)
        if active is not None:
            active.settle(clk)
            t = active.next_bound()
            if t is not None and (best is None or t < best):
                best = t
        # completions only report back; they are retired on whatever tick
        # comes next and need a wakeup of their own only once the queues drain
        if self._completions and not (q.read.items or q.write.items or q.priority.items):
            t = self._completions[0][0]
            if best is None or t < best:
                best = t
        t = self.refresh.next_wakeup(clk)
        if t is not None and (best is None or t < best):
            best = t
        for plugin in self.plugins:
            t = plugin.next_wakeup(clk)
            if t is not None and (best is None or t < best):
                best = t
        if best is None:
            return None
        return best if best > nxt else nxt

    def can_accept(self, req: Request) -> bool:
        q = self.queues.read if req.type == READ else self.queues.write
        if len(q.items) < q.capacity:
            return True
        return req.type == READ and req.addr_vec in self._wq_addrs

    # -- diagnostics -------------------------------------------------------------

    def _audit(self, clk: int) -> None:
        """Brute-force work-conservation check after an idle cycle."""
        tree = self.tree
        req, _ = self._first_ready_priority(clk)
        if req is not None:
            raise ProtocolViolation(f"idle at {clk} with ready maintenance or pledged {req!r}")
        active = self.queues.active(clk)
        if active is None:
            return
        for b in list(active.banks()):
            for cmd, req in self._decode_bank(active, b, clk):
                if tree.ready_at(cmd, req.loc) <= clk:
                    raise ProtocolViolation(f"idle at {clk} with ready request {req!r}")

    @property
    def idle(self) -> bool:
        q = self.queues
        return not (q.read.items or q.write.items or q.priority.items or self._completions)

    def oldest_pending(self) -> int | None:
        q = self.queues
        ages = [queue.items[0].arrive_clk for queue in (q.read, q.write, q.priority) if queue.items]
        return min(ages) if ages else None

    def check_watchdog(self, clk: int) -> None:
        oldest = self.oldest_pending()
        if oldest is not None and clk - oldest > self.p["watchdog"]:
            raise WatchdogTimeout(
                f"channel {self.channel}: a request queued at {oldest} is still pending at {clk}"
            )

    def finish(self, clk: int) -> None:
        for plugin in self.plugins:
            plugin.finish(clk)

    def stats(self) -> dict:
        out = dict(self.counters)
        for name, n in zip(self.spec.commands, self.cmd_counts):
            out[f"cmd.{name}"] = n
        for origin, n in sorted(self.maintenance_done.items()):
            out[f"maintenance.{origin}"] = n
        out["refreshes_injected"] = self.refresh.injected
        for i, plugin in enumerate(self.plugins):
            for k, v in plugin.stats().items():
                out[f"plugin.{type(plugin).__name__}.{k}"] = v
        return out
