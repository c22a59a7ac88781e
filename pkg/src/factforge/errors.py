"""Typed domain errors. The CLI maps every subclass to exit code 1."""


class FactforgeError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(FactforgeError):
    """A malformed line or record in an input file."""

    def __init__(self, message: str, *, source=None, line: int | None = None):
        self.source = source
        self.line = line
        prefix = ""
        if source is not None:
            prefix = f"{source}"
            if line is not None:
                prefix += f":{line}"
            prefix += ": "
        elif line is not None:
            prefix = f"line {line}: "
        super().__init__(prefix + message)


class ConfigError(FactforgeError):
    """An invalid configuration value (flag ranges, config files)."""


class KbLookupError(FactforgeError):
    """An entity or relation id outside the knowledge base's id range."""


class SynthesisError(FactforgeError):
    """Corpus synthesis cannot proceed (e.g. no entity has out-edges)."""


class IntegrityError(FactforgeError):
    """A masked document or corpus record violates its own invariants."""


class DatasetError(FactforgeError):
    """A dataset adapter or prediction join failure."""


class UndefinedMetricError(FactforgeError):
    """A metric has no defined value for the given inputs (e.g. single-class gold)."""
