"""Exception types shared across the toolkit."""


class FmvcError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(FmvcError):
    """An argument or object state violates a documented precondition."""


class ParseError(FmvcError):
    """Input text or container data could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedFormat(FmvcError):
    """Input is well-formed but uses a format this codec does not accept."""


class TruncatedStream(FmvcError):
    """Input ended before a complete frame payload was read."""


class BitstreamError(FmvcError):
    """Coded bitstream is malformed; carries the byte offset when known."""

    def __init__(self, message, byte_offset=None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class UnsupportedVersion(BitstreamError):
    """Bitstream declares a version this decoder does not implement."""


class ConfigError(FmvcError):
    """Command-line or run configuration is invalid."""


class IoError(FmvcError):
    """An underlying read or write to a file or sink failed."""
