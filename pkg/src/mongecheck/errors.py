"""Shared exception types."""


class DomainError(ValueError):
    """Input lies outside an operation's documented domain."""


class ConvergenceError(RuntimeError):
    """An iterative scheme exhausted its budget without converging."""
