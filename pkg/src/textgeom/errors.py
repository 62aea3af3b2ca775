"""Exception types raised across the package."""


class TextGeomError(Exception):
    """Base class for all errors raised by textgeom."""


class InvalidGeometryError(TextGeomError, ValueError):
    pass


class EmptyMaskError(TextGeomError, ValueError):
    pass


class InvalidBoxError(TextGeomError, ValueError):
    pass


class ParseError(TextGeomError, ValueError):
    """Malformed input line. ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}"
        if lineno is not None:
            where += f":{lineno}" if where else f"line {lineno}"
        super().__init__(f"{where}: {message}" if where else message)


class FormatError(ParseError):
    """Structurally valid JSON whose payload is inconsistent (e.g. RLE length)."""


class CapacityError(TextGeomError, RuntimeError):
    pass
