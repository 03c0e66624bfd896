"""Exception types raised across the package.

Every error derives from ``AfsharError`` so callers (the CLI in particular)
can map whole families onto exit codes.
"""


class AfsharError(Exception):
    pass


class ConfigError(AfsharError, ValueError):
    """Bad user input: config files, overrides, grammars."""

    def __init__(self, message, line=None, position=None):
        self.line = line
        self.position = position
        where = ""
        if line is not None:
            where = f"line {line}: "
        elif position is not None:
            where = f"position {position}: "
        super().__init__(where + message)


class InvalidConfigError(ConfigError):
    pass


class ParseError(ConfigError):
    pass


class InvalidParameterError(AfsharError, ValueError):
    pass


class NumericalError(AfsharError):
    """A run completed but violated a numerical-validation check."""


class InvalidFieldError(NumericalError, ValueError):
    pass


class AlignmentError(NumericalError, ValueError):
    pass


class InsufficientFringesError(NumericalError):
    pass


class WindowTooSmallError(NumericalError):
    pass


class UndefinedConditionalError(AfsharError, ZeroDivisionError):
    pass


class IncompleteTimelineError(AfsharError, ValueError):
    pass
