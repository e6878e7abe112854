from .controller import GenericController, QueueSet
from .plugin import ControllerPlugin, NoOpPlugin, PluginHost
from .queues import ReqQueue
from .refresh import AllBankRefresh, NoRefresh
from .request import MAINTENANCE, READ, WRITE, Request
from .rowpolicy import ClosedRowPolicy, OpenRowPolicy
from .scheduler import FCFS, FRFCFS

__all__ = [
    "MAINTENANCE",
    "READ",
    "WRITE",
    "AllBankRefresh",
    "ClosedRowPolicy",
    "ControllerPlugin",
    "FCFS",
    "FRFCFS",
    "GenericController",
    "NoOpPlugin",
    "NoRefresh",
    "OpenRowPolicy",
    "PluginHost",
    "QueueSet",
    "ReqQueue",
    "Request",
    "register",
]


def register(catalog) -> None:
    for name, cls in (
        ("GenericController", GenericController),
        ("FRFCFS", FRFCFS),
        ("FCFS", FCFS),
        ("AllBankRefresh", AllBankRefresh),
        ("NoRefresh", NoRefresh),
        ("OpenRowPolicy", OpenRowPolicy),
        ("ClosedRowPolicy", ClosedRowPolicy),
        ("NoOpPlugin", NoOpPlugin),
    ):
        catalog.register_implementation(cls.interface, name, cls)
