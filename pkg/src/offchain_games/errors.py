"""Exception types shared across the package."""


class GameError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(GameError, ValueError):
    pass


class InvalidParams(GameError, ValueError):
    pass


class NoSuchHistory(GameError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else "no such history"


class StrategyIncomplete(GameError):
    pass


class EmptyStrategySet(GameError):
    pass
