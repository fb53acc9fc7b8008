"""Exception hierarchy shared by every procscope module."""


class ProcScopeError(Exception):
    """Base class for all procscope errors."""


class EncodingError(ProcScopeError, ValueError):
    """A bit pattern or hex string is malformed."""


class SpecificationError(ProcScopeError, ValueError):
    """An expression, predicate or request references something undefined."""


class DomainError(ProcScopeError, ValueError):
    """A probe or construction was called outside its input domain."""


class SchemaError(ProcScopeError, ValueError):
    """A battery result set or fingerprint violates the probe registry schema."""


class ConfigurationError(ProcScopeError, ValueError):
    """Invalid configuration (empty signature database, bad FpConfig, ...)."""


class UnknownProbeError(ProcScopeError, KeyError):
    """A probe identifier is not in the registry."""


class ParseError(ProcScopeError, ValueError):
    """A fingerprint or signature file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.reason = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


class VersionError(ParseError):
    """The document declares a schema version this build does not read."""


class DigestError(ParseError):
    """The digest line does not match the canonical content."""
