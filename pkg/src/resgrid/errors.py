"""Exception hierarchy shared across the simulator."""


class SimulationError(Exception):
    """Base class for all resgrid errors."""


# -- topology --------------------------------------------------------------

class TopologyError(SimulationError):
    pass


class DuplicateRegion(TopologyError):
    pass


class DuplicateLine(TopologyError):
    pass


class DanglingLine(TopologyError):
    pass


class NonPositiveCapacity(TopologyError):
    pass


class UnknownRegion(TopologyError):
    pass


# -- hazard ----------------------------------------------------------------

class TooLarge(SimulationError):
    """Exact spread enumeration rejected: state space too big."""


# -- agents ----------------------------------------------------------------

class SocBoundViolation(SimulationError):
    """A storage update would push the state of charge outside its bounds."""


class WrongAddressee(SimulationError):
    """An offer was evaluated by an agent it does not target."""


# -- market ----------------------------------------------------------------

class DimensionMismatch(SimulationError):
    pass


class NoAgents(SimulationError):
    pass


class InvalidTransition(SimulationError):
    """Illegal offer state-machine transition."""


# -- metrics ---------------------------------------------------------------

class EmptyTimeline(SimulationError):
    pass


class NegativePower(SimulationError):
    pass


# -- scenario / oracle -----------------------------------------------------

class ParseError(SimulationError):
    """Scenario file could not be parsed."""


class ValidationError(SimulationError):
    """Scenario parsed but violates the schema; message names the field path."""


class TooLargeForOracle(SimulationError):
    """Instance exceeds the size the brute-force LP oracle can enumerate."""
