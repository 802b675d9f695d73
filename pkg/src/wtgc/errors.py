"""Exception types shared across the library."""


class WtgcError(Exception):
    """Base class for all library errors."""


class SemiringError(WtgcError):
    pass


class TreeError(WtgcError):
    pass


class InvalidPositionError(TreeError):
    pass


class GrammarError(WtgcError):
    pass


class ParseError(WtgcError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)
        self.line = line


class TransformError(WtgcError):
    pass


class HomomorphismError(WtgcError):
    pass


class PumpError(WtgcError):
    pass


class DecisionError(WtgcError):
    pass
