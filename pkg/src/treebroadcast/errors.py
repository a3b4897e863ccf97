"""Exception hierarchy shared by all engines.

Exit-code mapping used by the CLI: ValidationError -> 2,
CapacityError -> 3, BracketError -> 4.
"""


class TreeBroadcastError(Exception):
    """Base class for all library errors."""


class ValidationError(TreeBroadcastError):
    """An input violates a documented constraint (bad probabilities,
    malformed posterior vector, state out of range, ...)."""


class CapacityError(TreeBroadcastError):
    """A requested computation exceeds a configured size cap."""


class BracketError(TreeBroadcastError):
    """A bisection bracket does not straddle the sought transition."""
