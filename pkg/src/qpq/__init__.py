"""Quantum private query over single-photon multi-pulse signals.

Modules
-------
engine
    Signal preparation, Alice's interferometer, sampling, entropy.
protocol
    Bit sharing, oblivious-key distribution and private queries.
adversary
    Holevo leakage bound, pure-state and entangled attacks by Bob.
harness / cli
    Seeded batch experiments, reports and the ``qpq`` command.
"""

from qpq._accel import USE_NUMBA, backend_name
from qpq.errors import (
    ChannelFailureError,
    InvalidParameterError,
    InvalidStateError,
    QPQError,
    ResourceLimitError,
)

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA",
    "backend_name",
    "ChannelFailureError",
    "InvalidParameterError",
    "InvalidStateError",
    "QPQError",
    "ResourceLimitError",
]
