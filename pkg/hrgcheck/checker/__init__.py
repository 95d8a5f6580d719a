from hrgcheck import HrgcheckError


class UnknownColorError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)
