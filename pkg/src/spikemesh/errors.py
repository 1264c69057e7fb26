"""Exception hierarchy shared by the simulator, mappers and CLI."""


class SpikemeshError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SpikemeshError, ValueError):
    """A network, core or neuron description is invalid.

    ``path`` names the offending element, e.g. ``cores[1].neurons[3].dest``.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class SimulationError(SpikemeshError, RuntimeError):
    """Fatal runtime failure of a simulation."""


class PotentialOverflow(SimulationError, OverflowError):
    """A neuron potential left the representable range."""

    def __init__(self, message, tick=None, core=None, neuron=None):
        self.tick = tick
        self.core = core
        self.neuron = neuron
        super().__init__(message)


class DecodeError(SpikemeshError, ValueError):
    """A trace cannot be decoded with the given metadata."""


class UnsupportedSize(SpikemeshError, ValueError):
    """A problem does not fit the architectural limits of a mapping."""


class KernelTooLarge(SpikemeshError, ValueError):
    """A single convolution window does not fit one core."""
