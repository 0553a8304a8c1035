"""Exceptions."""


class EmbedLouvainError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EmbedLouvainError):
    """Error to indicate a text input file is malformed."""


class InvalidData(EmbedLouvainError):
    """Error to indicate well-formed input that violates a domain invariant."""


class InvalidConfig(EmbedLouvainError):
    """Error to indicate an invalid or incomplete configuration."""
