"""Bit sharing (Protocol I) and the oblivious-key private query (Protocol II / II').

Both parties run in-process.  Scalar functions here are the reference
implementation of a single session; :func:`run_honest_sessions` drives the
batch kernel for Monte Carlo work and is checked against the scalar path.

Key indexing: after Alice announces ``t``, Bob's N-bit key lists
``s_t ^ s_j`` for ``j = 0..N`` skipping ``j = t``.  Alice knows the bit at
the position ``p`` that ``j = t + r (mod N+1)`` occupies in that list.  A
declared shift ``s`` makes Bob encrypt item ``m`` with ``key[(m + s) mod N]``.
"""

from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from qpq import kernels
from qpq.engine import Detector, interfere, prepare_signal, sample_outcome
from qpq.errors import ChannelFailureError, InvalidParameterError

__all__ = [
    "Mode",
    "SessionConfig",
    "Detected",
    "LOST",
    "SharedBit",
    "PassRecord",
    "SessionTranscript",
    "MAX_HONEST_MODES",
    "bob_prepare_round",
    "alice_measure",
    "run_bit_share",
    "derive_key_bob",
    "derive_known_position",
    "alice_declare_shift",
    "bob_encrypt",
    "alice_decrypt",
    "run_query",
    "run_honest_sessions",
    "HonestBlock",
]

MAX_HONEST_MODES = 2 ** 20


class Mode(str, Enum):
    II = "II"
    II_PRIME = "II'"


@dataclass(frozen=True)
class SessionConfig:
    n: int
    mode: Mode = Mode.II
    loss_prob: float = 0.0
    max_rounds: int = 1000
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f"database size must be >= 1, got {self.n!r}")
        if self.n + 1 > MAX_HONEST_MODES:
            raise InvalidParameterError(f"N+1 exceeds the {MAX_HONEST_MODES} mode cap")
        if not 0.0 <= self.loss_prob < 1.0:
            raise InvalidParameterError(f"loss_prob must be in [0, 1), got {self.loss_prob!r}")
        if int(self.max_rounds) != self.max_rounds or self.max_rounds < 1:
            raise InvalidParameterError("max_rounds must be a positive integer")
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def n_modes(self) -> int:
        return self.n + 1


@dataclass(frozen=True)
class Detected:
    t: int
    detector: Detector
    bit: int


class _Lost:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "LOST"


LOST = _Lost()


@dataclass(frozen=True)
class SharedBit:
    """Outcome of one bit-share round.

    ``value`` is what Alice read off her detector; ``bob_value`` is Bob's
    reconstruction ``s[i0] ^ s[i0 + r]`` from the public ``(i0, r)``.
    """

    i0: int
    r: int
    value: int
    bob_value: int

    @property
    def agree(self) -> bool:
        return self.value == self.bob_value


def _check_bits(bits, name, length=None):
    arr = np.asarray(bits)
    if arr.ndim != 1 or not np.all((arr == 0) | (arr == 1)):
        raise InvalidParameterError(f"{name} must be a 1-D sequence of 0/1")
    if length is not None and arr.shape[0] != length:
        raise InvalidParameterError(f"{name} has length {arr.shape[0]}, expected {length}")
    return arr.astype(np.int64)


def bob_prepare_round(L, rng):
    """Draw a uniform sign string of length ``L`` and Bob's matching signal."""
    if L < 2:
        raise InvalidParameterError(f"need at least 2 pulses, got {L}")
    S = rng.integers(0, 2, size=L, dtype=np.int64)
    return S, prepare_signal(S)


def alice_measure(signal, r, loss_prob, rng):
    """Alice's detection of one signal; returns :class:`Detected` or ``LOST``.

    One uniform decides loss; if the photon arrives a second uniform samples
    the interferometer outcome.
    """
    if not 0.0 <= loss_prob < 1.0:
        raise InvalidParameterError(f"loss_prob must be in [0, 1), got {loss_prob!r}")
    table = interfere(signal, r)
    if loss_prob > 0.0 and rng.random() < loss_prob:
        return LOST
    k, d = sample_outcome(table, rng)
    return Detected(t=k, detector=d, bit=int(d))


def run_bit_share(L, rng) -> SharedBit:
    """One Protocol I round: fresh sign string, fresh delay, shared bit.

    Alice's value comes from her detector; Bob recomputes it from ``S`` and the
    announced ``(i0, r)``.
    """
    S, signal = bob_prepare_round(L, rng)
    r = int(rng.integers(1, L))
    outcome = alice_measure(signal, r, 0.0, rng)
    bob_value = int(S[outcome.t] ^ S[(outcome.t + r) % L])
    return SharedBit(i0=outcome.t, r=r, value=outcome.bit, bob_value=bob_value)


def derive_key_bob(S, t):
    """Bob's N-bit oblivious key ``s_t ^ s_j`` for ``j != t`` in increasing ``j``."""
    S = _check_bits(S, "phase string")
    n = S.shape[0] - 1
    if int(t) != t or not 0 <= t <= n:
        raise InvalidParameterError(f"announced pair t must be in 0..{n}, got {t!r}")
    t = int(t)
    return S[t] ^ np.delete(S, t)


def derive_known_position(t, r, n):
    """Position in Bob's key of the single bit Alice knows."""
    partner = (t + r) % (n + 1)
    return partner if partner < t else partner - 1


def alice_declare_shift(p, i, n):
    """Shift that moves key bit ``p`` onto item ``i``."""
    return (p - i) % n


def bob_encrypt(db, key, shift):
    db = _check_bits(db, "database")
    key = _check_bits(key, "key", length=db.shape[0])
    n = db.shape[0]
    return db ^ key[(np.arange(n) + shift) % n]


def alice_decrypt(cipher, i, known_val):
    if not 0 <= i < len(cipher):
        raise InvalidParameterError(f"item index {i} out of range")
    return int(cipher[i]) ^ int(known_val)


@dataclass
class PassRecord:
    """One full Protocol II pass: public announcements and both private views."""

    t: int
    shift: int
    ciphertext: list
    bob_S: list
    bob_key: list
    alice_r: int
    alice_detector: int
    known_pos: int
    known_val: int
    decoded: int
    rounds_used: int

    def public(self):
        return {"t": self.t, "shift": self.shift, "ciphertext": list(self.ciphertext)}

    def to_dict(self):
        return {
            "public": self.public(),
            "bob_private": {"S": list(self.bob_S), "key": list(self.bob_key)},
            "alice_private": {
                "r": self.alice_r,
                "detector": self.alice_detector,
                "known_pos": self.known_pos,
                "known_val": self.known_val,
                "decoded": self.decoded,
            },
            "rounds_used": self.rounds_used,
        }


@dataclass
class SessionTranscript:
    mode: Mode
    item: int
    passes: list = field(default_factory=list)
    consistent: bool | None = None

    @property
    def rounds_used(self) -> int:
        return sum(p.rounds_used for p in self.passes)

    def to_dict(self):
        return {
            "mode": self.mode.value,
            "item": self.item,
            "passes": [p.to_dict() for p in self.passes],
            "rounds_used": self.rounds_used,
            "consistent": self.consistent,
        }


def _one_pass(config, db, item, rng):
    n = config.n
    L = n + 1
    r = int(rng.integers(1, L))
    for rounds in range(1, config.max_rounds + 1):
        # a lost photon restarts the round with a fresh S; nothing was announced
        S, signal = bob_prepare_round(L, rng)
        outcome = alice_measure(signal, r, config.loss_prob, rng)
        if outcome is not LOST:
            break
    else:
        raise ChannelFailureError(config.max_rounds)
    t = outcome.t
    key = derive_key_bob(S, t)
    p = derive_known_position(t, r, n)
    known_val = outcome.bit
    shift = alice_declare_shift(p, item, n)
    cipher = bob_encrypt(db, key, shift)
    decoded = alice_decrypt(cipher, item, known_val)
    return PassRecord(
        t=t, shift=int(shift), ciphertext=cipher.tolist(), bob_S=S.tolist(),
        bob_key=key.tolist(), alice_r=r, alice_detector=int(outcome.detector),
        known_pos=int(p), known_val=int(known_val), decoded=decoded,
        rounds_used=rounds)


def run_query(config: SessionConfig, db, item, rng):
    """Retrieve ``db[item]`` with one Protocol II (or two Protocol II') passes.

    Returns
    -------
    bits : tuple of int
        Decoded item, once per pass.
    transcript : SessionTranscript

    Raises
    ------
    ChannelFailureError
        If every one of ``config.max_rounds`` transmissions was lost.
    """
    db = _check_bits(db, "database", length=config.n)
    if int(item) != item or not 0 <= item < config.n:
        raise InvalidParameterError(f"item must be in 0..{config.n - 1}, got {item!r}")
    item = int(item)
    n_passes = 2 if config.mode is Mode.II_PRIME else 1
    transcript = SessionTranscript(mode=config.mode, item=item)
    for _ in range(n_passes):
        transcript.passes.append(_one_pass(config, db, item, rng))
    bits = tuple(p.decoded for p in transcript.passes)
    if config.mode is Mode.II_PRIME:
        transcript.consistent = bits[0] == bits[1]
    return bits, transcript


@dataclass
class HonestBlock:
    """Aggregated outcomes of a block of honest sessions."""

    sessions: int = 0
    completed: int = 0
    passes: int = 0
    channel_failures: int = 0
    successes: int = 0
    known_exactly_one: int = 0
    key_consistent: int = 0
    consistent_repeats: int = 0
    rounds_sum: int = 0
    rounds_sq_sum: int = 0
    rounds_min: int = 0
    rounds_max: int = 0
    t_counts: np.ndarray | None = None

    def merge(self, other: "HonestBlock") -> "HonestBlock":
        t_counts = self.t_counts
        if other.t_counts is not None:
            t_counts = other.t_counts.copy() if t_counts is None else t_counts + other.t_counts
        mins = [b.rounds_min for b in (self, other) if b.completed]
        maxs = [b.rounds_max for b in (self, other) if b.completed]
        return HonestBlock(
            *(getattr(self, f) + getattr(other, f) for f in (
                "sessions", "completed", "passes", "channel_failures", "successes",
                "known_exactly_one", "key_consistent", "consistent_repeats",
                "rounds_sum", "rounds_sq_sum")),
            rounds_min=min(mins, default=0),
            rounds_max=max(maxs, default=0),
            t_counts=t_counts)

    def as_dict(self):
        d = asdict(self)
        d["t_counts"] = None if self.t_counts is None else self.t_counts.tolist()
        return d


def run_honest_sessions(config: SessionConfig, db, item, sessions, rng, r_fixed=None):
    """Batch of honest sessions through the accelerated kernel.

    Loss is applied per transmission with fresh ``S`` on every retry, which
    makes the number of rounds of a pass geometric with success probability
    ``1 - loss_prob``; the round count is drawn directly from that law and the
    kernel only simulates the surviving transmission.  ``r_fixed`` pins Alice's
    delay (used by independence checks).
    """
    db = _check_bits(db, "database", length=config.n)
    n = config.n
    L = n + 1
    n_passes = 2 if config.mode is Mode.II_PRIME else 1
    ok = np.ones(sessions, dtype=bool)
    rounds = np.zeros(sessions, dtype=np.int64)
    results = []
    for _ in range(n_passes):
        if config.loss_prob > 0.0:
            pass_rounds = rng.geometric(1.0 - config.loss_prob, size=sessions)
        else:
            pass_rounds = np.ones(sessions, dtype=np.int64)
        ok &= pass_rounds <= config.max_rounds
        rounds += np.minimum(pass_rounds, config.max_rounds)
        signs = rng.integers(0, 2, size=(sessions, L), dtype=np.int64)
        if r_fixed is None:
            shifts = rng.integers(1, L, size=sessions, dtype=np.int64)
        else:
            shifts = np.full(sessions, int(r_fixed), dtype=np.int64)
        u = rng.random(sessions)
        results.append(kernels.honest_batch(signs, shifts, u, db, item))

    block = HonestBlock(sessions=sessions, t_counts=np.zeros(L, dtype=np.int64))
    block.completed = int(ok.sum())
    block.channel_failures = sessions - block.completed
    block.passes = block.completed * n_passes
    correct = ok.copy()
    for t, _, _, _, dec, count, consistent in results:
        correct &= dec == db[item]
        block.t_counts += np.bincount(t[ok], minlength=L)
        block.known_exactly_one += int(np.sum((count == 1) & ok))
        block.key_consistent += int(np.sum(consistent & ok))
    block.successes = int(correct.sum())
    if n_passes == 2:
        block.consistent_repeats = int(np.sum((results[0][4] == results[1][4]) & ok))
    block.rounds_sum = int(rounds[ok].sum())
    block.rounds_sq_sum = int((rounds[ok] ** 2).sum())
    if block.completed:
        block.rounds_min = int(rounds[ok].min())
        block.rounds_max = int(rounds[ok].max())
    return block
