"""Exception hierarchy shared by every stage."""


class GanithaError(Exception):
    """Base class; the CLI maps these to exit status 1."""


class FormatError(GanithaError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedVersionError(FormatError):
    pass


class ConfigurationError(GanithaError, ValueError):
    pass


class ContractError(GanithaError, ValueError):
    pass


class TrainingError(GanithaError, RuntimeError):
    pass


class DataError(GanithaError, ValueError):
    pass


class OutOfRangeError(GanithaError, OverflowError):
    pass


class NoModelError(GanithaError, ValueError):
    pass


class NoVerbError(GanithaError, ValueError):
    pass


class NoFocusError(GanithaError, ValueError):
    pass


class UnanswerableError(GanithaError):
    pass
