"""Exception hierarchy shared by the engine, protocol and analysis layers."""


class QPQError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(QPQError, ValueError):
    """A scalar argument (length, shift, index, probability) is out of range."""


class InvalidStateError(QPQError, ValueError):
    """A state vector or density operator fails its validity checks."""


class ResourceLimitError(QPQError):
    """The requested computation exceeds a declared memory/size cap."""


class ChannelFailureError(QPQError):
    """Every transmission attempt of a session was lost on the channel.

    This is distinct from a protocol failure, which cannot happen for an
    honest, lossless run.
    """

    def __init__(self, rounds: int):
        super().__init__(f"all {rounds} transmission rounds were lost")
        self.rounds = rounds
