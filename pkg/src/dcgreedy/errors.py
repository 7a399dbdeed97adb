"""Exception types shared across the package."""


class MassOverflow(ValueError):
    """Accumulated membership mass for a policy exceeded 1 beyond tolerance."""


class MassNotOne(ValueError):
    """A block's membership mass was expected to sum to 1 but does not."""


class UnknownPolicy(ValueError):
    """Policy id outside the ground set."""


class UnknownAgent(ValueError):
    """Agent id outside the agent set."""


class GroundSetTooLarge(ValueError):
    """Exhaustive enumeration requested beyond its size cap."""


class Disconnected(ValueError):
    """The communication graph is not connected."""


class SearchSpaceTooLarge(ValueError):
    """Brute-force search requested beyond its size cap."""


class InfeasibleOutput(RuntimeError):
    """An algorithm terminated in a state that cannot be rounded feasibly."""
