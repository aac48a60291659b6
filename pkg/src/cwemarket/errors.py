"""Exception types shared across the package.

The CLI maps these onto process exit codes, so solver and oracle code
should raise the most specific type that applies.
"""


class MarketError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MarketError):
    """Malformed or out-of-contract input (bad file, bad parameter)."""


class ResourceLimitError(MarketError):
    """An exhaustive routine was asked to exceed its configured cap."""


class VerificationError(MarketError):
    """A requested verification did not hold."""


class SolverInvariantError(MarketError):
    """Internal solver invariant broke; indicates a bug, not bad input."""


class SolverDeadlockError(SolverInvariantError):
    """The ascending-auction conflict loop reached a fully tied state it
    cannot break: every utility-maximizing bundle set of the active agent
    is held by another agent and every such conflict is an exact tie in
    both directions.  Termination is not possible without a price move,
    so we stop loudly instead of cycling.
    """
