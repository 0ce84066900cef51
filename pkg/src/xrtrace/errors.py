"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) and, when known, the
``op`` that raised it (``module.operation``) so the CLI can report where a
pipeline failed without a traceback.
"""


class XRTraceError(Exception):
    code = "XRTraceError"

    def __init__(self, message: str, op: str | None = None):
        super().__init__(message)
        self.op = op

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        cls.code = cls.__name__


# trace ingest
class UnsupportedCapture(XRTraceError):
    pass


class TruncatedCapture(XRTraceError):
    def __init__(self, message: str, offset: int, op: str | None = None):
        super().__init__(f"{message} (byte offset {offset})", op)
        self.offset = offset


class ParseError(XRTraceError):
    def __init__(self, message: str, line: int, op: str | None = None):
        super().__init__(f"line {line}: {message}", op)
        self.line = line


class SchemaError(XRTraceError):
    pass


# numerics
class DomainError(XRTraceError, ValueError):
    pass


class ZeroVarianceError(XRTraceError, ValueError):
    pass


class InsufficientData(XRTraceError, ValueError):
    pass


class SingularDesign(XRTraceError):
    pass


class OrderSelectionError(XRTraceError):
    pass


class InsufficientHistory(XRTraceError, ValueError):
    pass


# generation
class EmptyTrace(XRTraceError):
    pass
