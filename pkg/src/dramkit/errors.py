"""Exception types shared across the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""


class UnknownName(SimError, KeyError):
    def __init__(self, kind: str, name: str, known=()):
        self.kind = kind
        self.name = name
        msg = f"unknown {kind} {name!r}"
        if known:
            msg += f" (known: {', '.join(known)})"
        super().__init__(msg)

    def __str__(self):
        return self.args[0]


class DuplicateImplementation(SimError):
    pass


class UnknownInterface(SimError):
    pass


class UnknownImplementation(SimError):
    pass


class MissingComponent(SimError):
    def __init__(self, slot: str, path: str = ""):
        self.slot = slot
        self.path = path
        where = f" under {path}" if path else ""
        super().__init__(f"missing component {slot!r}{where}")


class BadParameter(SimError):
    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class ProtocolViolation(SimError):
    pass


class NoPathToCommand(SimError):
    pass


class OutOfRange(SimError, ValueError):
    pass


class ParseError(SimError, ValueError):
    def __init__(self, lineno: int, message: str, source: str = ""):
        self.lineno = lineno
        prefix = f"{source}:" if source else "line "
        super().__init__(f"{prefix}{lineno}: {message}")


class WatchdogTimeout(SimError):
    pass


class SpecError(SimError):
    """A device specification is internally inconsistent."""
