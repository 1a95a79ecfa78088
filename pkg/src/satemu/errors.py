"""Exception hierarchy for the satemu toolkit."""


class SatemuError(Exception):
    """Base class for all toolkit errors."""


class EmptyTrace(SatemuError):
    pass


class AllLost(SatemuError):
    pass


class InvalidEntry(SatemuError):
    def __init__(self, index: int, value: int):
        super().__init__(f"entry {index} has invalid value {value} (must be > 0 or -1)")
        self.index = index
        self.value = value


class LengthMismatch(SatemuError):
    pass


class WrongIndexing(SatemuError):
    pass


# The engine raises the same condition under its own contract name.
IndexingMismatch = WrongIndexing


class MalformedDocument(SatemuError):
    pass


class NoRecords(SatemuError):
    pass


class ParseError(SatemuError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class QueueFull(SatemuError):
    pass


class ConfigError(SatemuError):
    pass


class BindFailure(SatemuError):
    pass


class ForwardFailure(SatemuError):
    pass


class ValueOverflow(SatemuError):
    pass


class EmptyImage(SatemuError):
    pass


class InvalidRole(SatemuError):
    pass


class InvalidParams(SatemuError):
    pass
