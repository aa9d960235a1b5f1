"""Exception hierarchy shared by the simulator, the protocol and the front ends."""


class SimulationError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgumentError(SimulationError, ValueError):
    """A caller passed a value outside an operation's domain."""


class ProtocolViolationError(SimulationError, RuntimeError):
    """A protocol step was invoked out of order or on inconsistent data."""


class InternalSimulationError(SimulationError, RuntimeError):
    """The simulator reached a state that correct sampling cannot produce."""
