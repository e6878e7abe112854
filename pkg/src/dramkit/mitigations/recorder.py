"""Command trace recorder."""

from __future__ import annotations

from pathlib import Path

from ..controller.plugin import ControllerPlugin
from ..errors import BadParameter


class TraceSink:
    """One output shared by the recorders of every channel.

    Channels tick in index order within a cycle, so appending as commands
    issue yields records ordered by cycle, then channel.
    """

    def __init__(self, path: str, spec):
        self.path = path
        self.names = spec.commands
        self.users = 0
        self.count = 0
        self.records: list[tuple] = []
        self._file = None
        if path:
            try:
                Path(path).parent.mkdir(parents=True, exist_ok=True)
                self._file = open(path, "w", buffering=1 << 20)
                self._file.write(",".join(("clk", "cmd", *spec.levels)) + "\n")
            except OSError as exc:
                raise BadParameter("CommandTraceRecorder.path", f"cannot write {path}: {exc}") from None

    def add(self, clk: int, cmd: int, addr_vec: tuple) -> None:
        self.count += 1
        if self._file is None:
            self.records.append((clk, self.names[cmd], addr_vec))
        else:
            self._file.write(f"{clk},{self.names[cmd]},{','.join(map(str, addr_vec))}\n")

    def release(self) -> None:
        self.users -= 1
        if self.users == 0 and self._file is not None:
            try:
                self._file.close()
            except OSError as exc:
                raise BadParameter("CommandTraceRecorder.path", f"cannot write {self.path}: {exc}") from None
            self._file = None


class CommandTraceRecorder(ControllerPlugin):
    """Record every issued command as ``clk,cmd,<one column per level>``.

    Levels below a command's scope are -1.  With an empty ``path`` the
    records stay in memory (``records``).
    """

    params = {"path": ""}

    def bind(self, host) -> None:
        super().bind(host)
        key = ("CommandTraceRecorder", self.p["path"])
        sink = host.shared.get(key)
        if sink is None:
            sink = host.shared[key] = TraceSink(self.p["path"], host.spec)
        sink.users += 1
        self.sink = sink
        self._add = sink.add
        self._finished = False

    @property
    def records(self) -> list[tuple]:
        return self.sink.records

    def on_command_issued(self, cmd: int, addr_vec: tuple, clk: int) -> None:
        self._add(clk, cmd, addr_vec)

    def next_wakeup(self, clk: int):
        return None

    def finish(self, clk: int) -> None:
        if not self._finished:
            self._finished = True
            self.sink.release()

    def stats(self) -> dict:
        return {"records": self.sink.count}
