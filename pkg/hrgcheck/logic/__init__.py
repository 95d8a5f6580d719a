from typing import Optional

from hrgcheck import HrgcheckError


class FormulaSyntaxError(HrgcheckError):
    def __init__(self, message: str, position: Optional[int] = None) -> None:
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class UndeclaredAtomError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)


class UnsupportedBoundError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)
