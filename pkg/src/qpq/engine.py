"""Exact single-photon multi-pulse state algebra.

States live in the single-photon subspace: a photon spread over ``L`` time
bins is an ``L``-vector of complex amplitudes (a *mode vector*).  An
adversary may entangle the photon with an ancilla of dimension ``D``; such a
*joint state* is stored as a ``(D, L)`` array, so the flattened C-order index
is ``ancilla * L + mode``.

Alice's two-arm interferometer with a cyclic delay ``r`` on one arm is an
isometry from ``L`` modes onto ``2L`` outcomes ``(k, d)``::

    amp(k, D0) = (a[k] + a[k+r]) / 2
    amp(k, D1) = i (a[k] - a[k+r]) / 2        (indices mod L)

Global phases are dropped throughout; nothing observable depends on them.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from qpq.errors import InvalidParameterError, InvalidStateError

__all__ = [
    "Detector",
    "OutcomeTable",
    "JointOutcome",
    "NORM_TOL",
    "EXACT_TOL",
    "validate_mode_vector",
    "validate_joint_state",
    "validate_density",
    "prepare_signal",
    "interfere",
    "interfere_joint",
    "sample_outcome",
    "von_neumann_entropy",
    "entropies_of_pure_batch",
    "ensemble_density",
    "fidelity",
]

NORM_TOL = 1e-9
EXACT_TOL = 1e-12
# outcomes with smaller probability are treated as impossible
_ZERO_PROB = 1e-15


class Detector(IntEnum):
    D0 = 0  # constructive port: s_k == s_{k+r}, bit 0
    D1 = 1  # destructive port: s_k != s_{k+r}, bit 1


def validate_mode_vector(a, tol=NORM_TOL):
    """Return ``a`` as a complex array after checking finiteness and unit norm."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 1:
        raise InvalidStateError(f"mode vector must be 1-D, got shape {a.shape}")
    if a.shape[0] < 2:
        raise InvalidStateError("mode vector needs at least 2 modes")
    if not np.all(np.isfinite(a)):
        raise InvalidStateError("mode vector has non-finite amplitudes")
    norm2 = float(np.vdot(a, a).real)
    if abs(norm2 - 1.0) > tol:
        raise InvalidStateError(f"mode vector is not normalised (|a|^2 = {norm2!r})")
    return a


def validate_joint_state(psi, n_modes=None, tol=NORM_TOL):
    """Return ``psi`` as a ``(D, L)`` complex array after validity checks."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim == 1:
        psi = psi[None, :]
    if psi.ndim != 2:
        raise InvalidStateError(f"joint state must be (D, L), got shape {psi.shape}")
    if n_modes is not None and psi.shape[1] != n_modes:
        raise InvalidStateError(
            f"joint state has {psi.shape[1]} modes, expected {n_modes}")
    if psi.shape[1] < 2:
        raise InvalidStateError("joint state needs at least 2 modes")
    if not np.all(np.isfinite(psi)):
        raise InvalidStateError("joint state has non-finite amplitudes")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise InvalidStateError(f"joint state is not normalised (|psi|^2 = {norm2!r})")
    return psi


def validate_density(rho, tol=NORM_TOL):
    """Check Hermiticity, unit trace and positivity of a density operator."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density operator must be square, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density operator has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > tol:
        raise InvalidStateError("density operator is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvalidStateError(f"density operator has trace {tr!r}")
    eig = np.linalg.eigvalsh(rho)
    if eig.min(initial=0.0) < -tol:
        raise InvalidStateError(f"density operator has eigenvalue {eig.min()!r}")
    return rho


def _check_shift(r, L):
    if isinstance(r, bool) or int(r) != r or not 1 <= r <= L - 1:
        raise InvalidParameterError(f"shift r must be in 1..{L - 1}, got {r!r}")
    return int(r)


def prepare_signal(S):
    """Bob's legal signal: amplitude ``(-1)**s_k / sqrt(L)`` on pulse ``k``.

    >>> prepare_signal([0, 1]).real.round(6).tolist()
    [0.707107, -0.707107]
    """
    bits = np.asarray(S)
    if bits.ndim != 1 or bits.shape[0] < 2:
        raise InvalidParameterError("phase string must have length >= 2")
    if not np.all((bits == 0) | (bits == 1)):
        raise InvalidParameterError("phase string entries must be 0 or 1")
    L = bits.shape[0]
    return (1.0 - 2.0 * bits.astype(np.float64)).astype(np.complex128) / np.sqrt(L)


@dataclass(frozen=True)
class OutcomeTable:
    """Amplitudes and probabilities over ``(pair k, detector d)`` for one shift.

    ``amplitudes[k, d]`` and ``probabilities[k, d]`` with ``d`` a
    :class:`Detector` value.
    """

    r: int
    amplitudes: np.ndarray
    probabilities: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.probabilities.shape[0]

    def probability(self, k, d) -> float:
        return float(self.probabilities[k, int(d)])

    def amplitude(self, k, d) -> complex:
        return complex(self.amplitudes[k, int(d)])

    def pair_marginal(self):
        return self.probabilities.sum(axis=1)

    def support(self):
        """Set of ``(k, Detector)`` outcomes with non-negligible probability."""
        ks, ds = np.nonzero(self.probabilities > _ZERO_PROB)
        return {(int(k), Detector(int(d))) for k, d in zip(ks, ds)}


def _interfere_amplitudes(a, r):
    # axis -1 is the mode axis; roll(-r)[k] == a[k + r mod L]
    shifted = np.roll(a, -r, axis=-1)
    return (a + shifted) / 2.0, 1j * (a - shifted) / 2.0


def interfere(a, r) -> OutcomeTable:
    """Send a mode vector through Alice's interferometer with delay ``r``."""
    a = validate_mode_vector(a)
    r = _check_shift(r, a.shape[0])
    d0, d1 = _interfere_amplitudes(a, r)
    amps = np.stack([d0, d1], axis=1)
    probs = np.abs(amps) ** 2
    return OutcomeTable(r=r, amplitudes=amps, probabilities=probs)


@dataclass(frozen=True)
class JointOutcome:
    k: int
    detector: Detector
    probability: float
    ancilla: np.ndarray


def interfere_joint(psi, r, n_modes=None):
    """Apply ``identity (x) interferometer`` to a joint ancilla/photon state.

    Parameters
    ----------
    psi : array_like, shape (D, L)
        Joint state; a 1-D input is read as ``D = 1``.
    r : int
        Delay, ``1 <= r <= L-1``.
    n_modes : int, optional
        Expected ``L``; a mismatch raises :class:`InvalidStateError`.

    Returns
    -------
    list of JointOutcome
        One entry per outcome with positive probability, in ``(k, d)`` order,
        each carrying the renormalised conditional ancilla state.
    """
    psi = validate_joint_state(psi, n_modes=n_modes)
    L = psi.shape[1]
    r = _check_shift(r, L)
    d0, d1 = _interfere_amplitudes(psi, r)
    out = []
    for k in range(L):
        for det, block in ((Detector.D0, d0), (Detector.D1, d1)):
            column = block[:, k]
            prob = float(np.vdot(column, column).real)
            if prob > _ZERO_PROB:
                out.append(JointOutcome(k, det, prob, column / np.sqrt(prob)))
    return out


def sample_outcome(table: OutcomeTable, rng):
    """Draw ``(k, Detector)`` from ``table`` using one uniform from ``rng``."""
    probs = table.probabilities.ravel()
    cdf = np.cumsum(probs / probs.sum())
    positive = np.nonzero(probs > 0)[0]
    cdf[positive[-1]:] = 1.0
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return idx // 2, Detector(idx % 2)


def _entropy_from_eigenvalues(eig):
    eig = np.clip(eig, 0.0, None)
    nz = eig > 0
    return float(-np.sum(eig[nz] * np.log2(eig[nz])))


def von_neumann_entropy(rho) -> float:
    """Entropy in bits, with the ``0 log 0 = 0`` convention."""
    rho = validate_density(rho)
    return _entropy_from_eigenvalues(np.linalg.eigvalsh(rho))


def entropies_of_pure_batch(states, chunk=4096):
    """Von Neumann entropy of ``|psi><psi|`` for each row of ``states``.

    Projectors are diagonalised in chunks so memory stays bounded for
    ensembles of ~10^5 states.
    """
    states = np.asarray(states, dtype=np.complex128)
    out = np.empty(states.shape[0])
    for start in range(0, states.shape[0], chunk):
        block = states[start:start + chunk]
        proj = block[:, :, None] * block[:, None, :].conj()
        eig = np.clip(np.linalg.eigvalsh(proj), 0.0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(eig > 0, -eig * np.log2(eig), 0.0)
        out[start:start + chunk] = terms.sum(axis=1)
    return out


def ensemble_density(states, probs):
    """Density operator ``sum_k p_k |psi_k><psi_k|`` of a pure-state ensemble."""
    states = np.atleast_2d(np.asarray(states, dtype=np.complex128))
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.shape[0] != states.shape[0]:
        raise InvalidParameterError(
            f"{states.shape[0]} states but {probs.shape} probabilities")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > NORM_TOL:
        raise InvalidParameterError("probabilities must be non-negative and sum to 1")
    norms = np.einsum("ij,ij->i", states.conj(), states).real
    if np.any(np.abs(norms - 1.0) > NORM_TOL):
        raise InvalidStateError("ensemble contains a non-normalised state")
    return (states.T * probs) @ states.conj()


def fidelity(a, b) -> float:
    """``|<a|b>|^2`` for normalised pure states."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    return float(abs(np.vdot(a, b)) ** 2)
