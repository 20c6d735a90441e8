"""Exception hierarchy shared by every doda module."""


class DodaError(Exception):
    """Base class for all doda errors."""


class SequenceParseError(DodaError, ValueError):
    """A sequence file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ContractViolation(DodaError):
    """A decision rule returned something the model forbids."""


class ConfigurationError(DodaError):
    """A run or experiment was configured in an unsatisfiable way."""


class KnowledgeError(DodaError):
    """A decision rule read knowledge it did not declare."""


class MemoryWriteError(DodaError):
    """An oblivious decision rule tried to write node memory."""


class InstanceTooLarge(DodaError, ValueError):
    """The exhaustive oracle refuses instances beyond its size guard."""
