"""Exception hierarchy shared across the toolkit."""


class GenderLensError(Exception):
    """Base class for all toolkit errors."""


class ParseError(GenderLensError):
    """Malformed input file; carries the offending path and line number."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}:"
        if line is not None:
            loc += f"{line}: "
        elif loc:
            loc += " "
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line


class ValidationError(GenderLensError):
    """Input violates a documented precondition or invariant."""


class PairingError(ValidationError):
    """Ambiguous minimal-pair construction (duplicate key within one gender)."""


class DumpFormatError(ValidationError):
    """Attention dump fails magic/version/layout/sum-to-one validation."""
