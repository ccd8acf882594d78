"""Exception hierarchy shared across webcheck modules."""


class WebcheckError(Exception):
    """Base class for every error raised by webcheck."""


class SourceError(WebcheckError):
    """An HTML or rule source could not be read or fetched."""
