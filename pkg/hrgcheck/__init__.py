__version__ = "1.0.0"


class HrgcheckError(Exception):
    """Base class for every error raised by hrgcheck."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
