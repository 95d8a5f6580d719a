from hrgcheck import HrgcheckError


class ReplacementArityError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)


class IncompleteAssignmentError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)


class NodeNotFoundError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)


class InvalidPinningError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)


class InvalidViewError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)


class TreeShapeError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)
