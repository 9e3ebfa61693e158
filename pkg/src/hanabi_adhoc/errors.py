class HanabiError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfigError(HanabiError):
    pass


class TerminalStateError(HanabiError):
    pass


class NotYourTurnError(HanabiError):
    pass


class IllegalMoveError(HanabiError):
    def __init__(self, rule: str, move=None) -> None:
        super().__init__(f"illegal move {move}: {rule}" if move is not None else rule)
        self.rule = rule
        self.move = move


class EncodingError(HanabiError):
    pass


class NoCardError(HanabiError):
    pass


class AgentConfigError(HanabiError):
    pass


class ProtocolViolation(HanabiError):
    pass


class IncompatibleAgentsError(HanabiError):
    pass


class CorruptRecordError(HanabiError):
    pass


class InvalidInputError(HanabiError, ValueError):
    pass


class UndefinedCorrelationError(HanabiError, ValueError):
    pass


class InvalidMatrixError(HanabiError, ValueError):
    pass


class AlignmentError(HanabiError):
    pass


class IncompleteTableError(HanabiError):
    pass
