"""Security analysis: database leakage and dishonest-Bob attacks.

Conventions
-----------
* Shifts ``r`` run over ``1..N`` with ``N = L - 1``; arrays indexed by shift
  use ``r - 1``.
* Ancilla qubit registers map qubit ``k`` to bit ``k`` of the basis index,
  i.e. ``index = sum_k s_k 2**k``.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from qpq import kernels
from qpq.engine import (
    Detector,
    EXACT_TOL,
    NORM_TOL,
    entropies_of_pure_batch,
    ensemble_density,
    fidelity,
    interfere_joint,
    validate_joint_state,
    validate_mode_vector,
    von_neumann_entropy,
)
from qpq.errors import InvalidParameterError, InvalidStateError, ResourceLimitError
from qpq.protocol import derive_key_bob, derive_known_position

__all__ = [
    "MAX_ENUMERATE_N",
    "MAX_GHZ_N",
    "all_sign_strings",
    "legal_signals",
    "holevo_bound",
    "joint_outcome_distribution",
    "PminReport",
    "pmin",
    "legal_overlap",
    "legal_distance",
    "haar_states",
    "EntangledAttack",
    "build_ghz_attack",
    "bell_pair_collapse",
    "ghz_collapse_check",
    "StrategyKind",
    "BobStrategy",
    "AttackRunRecord",
    "run_entangled_attack",
    "AttackTally",
    "entangled_attack_trials",
    "SearchReport",
    "search_attack_states",
    "MCReport",
    "compare_frequencies",
    "monte_carlo_vs_analytic",
]

MAX_ENUMERATE_N = 16
MAX_GHZ_N = 12


def all_sign_strings(L):
    """Every length-``L`` bit string, row ``x`` holding the bits of ``x``."""
    idx = np.arange(2 ** L, dtype=np.int64)
    return (idx[:, None] >> np.arange(L)) & 1


def legal_signals(L):
    """Matrix whose rows are all ``2**L`` legal signals of ``L`` pulses."""
    return (1.0 - 2.0 * all_sign_strings(L)) / np.sqrt(L)


# -- database leakage -------------------------------------------------------

def holevo_bound(n, method="analytic"):
    """Holevo quantity of Bob's signal ensemble for an ``n``-item database, in bits.

    ``analytic`` returns ``log2(n + 1)``.  ``enumerate`` builds all
    ``2**(n+1)`` equiprobable signals and evaluates
    ``S(rho) - mean S(|psi><psi|)`` numerically.
    """
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if method == "analytic":
        return float(np.log2(n + 1))
    if method != "enumerate":
        raise InvalidParameterError(f"unknown method {method!r}")
    if n > MAX_ENUMERATE_N:
        raise ResourceLimitError(
            f"enumeration needs 2**{n + 1} states; cap is n <= {MAX_ENUMERATE_N}")
    signals = legal_signals(n + 1)
    probs = np.full(signals.shape[0], 1.0 / signals.shape[0])
    rho = ensemble_density(signals, probs)
    mixed = von_neumann_entropy(rho)
    pure = entropies_of_pure_batch(signals)
    return mixed - float(np.dot(probs, pure))


# -- pure-state attacks -------------------------------------------------------

def joint_outcome_distribution(a):
    """Probability of (shift, pair, detector) for Alice receiving ``a``.

    Returns
    -------
    ndarray, shape (N, L, 2)
        Entry ``[r - 1, k, d]``; the shift is uniform on ``1..N``.
    """
    a = validate_mode_vector(a)
    L = a.shape[0]
    n = L - 1
    idx = (np.arange(L)[None, :] + np.arange(1, L)[:, None]) % L
    b = a[idx]
    out = np.empty((n, L, 2))
    out[:, :, 0] = np.abs(a[None, :] + b) ** 2 / (4 * n)
    out[:, :, 1] = np.abs(a[None, :] - b) ** 2 / (4 * n)
    return out


@dataclass(frozen=True)
class PminReport:
    pmin: float
    per_shift: dict
    is_legal: bool


def pmin(a) -> PminReport:
    """Minimum probability that Bob's best guess of Alice's bit is wrong.

    For each (shift, pair) Bob can at best predict the likelier detector; the
    unavoidable error is the smaller of the two detector probabilities, summed
    over shifts and pairs.
    """
    a = validate_mode_vector(a)
    terms = kernels.pmin_terms(a)
    total = float(terms.sum())
    return PminReport(
        pmin=total,
        per_shift={r: float(v) for r, v in enumerate(terms, start=1)},
        is_legal=total <= EXACT_TOL,
    )


def legal_overlap(a):
    """``max_S |<psi_S|a>|`` over all legal signals, computed exactly.

    The maximum of ``|sum_k eps_k a_k|`` over sign vectors is attained by the
    sign pattern of ``Re(exp(-i theta) a_k)`` for some direction ``theta``;
    that pattern only changes where some term crosses zero, so checking one
    direction inside each of the ``2L`` arcs between crossings is exhaustive.
    """
    a = np.asarray(a, dtype=np.complex128)
    L = a.shape[0]
    nz = np.abs(a) > 0
    if not nz.any():
        return 0.0
    cuts = np.sort(np.mod(np.concatenate([np.angle(a[nz]) + np.pi / 2,
                                          np.angle(a[nz]) - np.pi / 2]), 2 * np.pi))
    nxt = np.roll(cuts, -1)
    nxt[-1] += 2 * np.pi
    mids = 0.5 * (cuts + nxt)
    proj = np.real(np.exp(-1j * mids)[:, None] * a[None, :])
    signs = np.where(proj >= 0, 1.0, -1.0)
    return float(np.max(np.abs(signs @ a)) / np.sqrt(L))


def legal_distance(a):
    """Euclidean distance from ``a`` to the nearest legal signal up to global phase."""
    ov = min(legal_overlap(a), 1.0)
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * ov)))


def haar_states(L, count, rng):
    """``count`` Haar-random unit vectors in ``C^L`` (normalised complex Gaussians)."""
    z = rng.standard_normal((count, L)) + 1j * rng.standard_normal((count, L))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


# -- entangled attacks --------------------------------------------------------

@dataclass(frozen=True)
class EntangledAttack:
    """Joint state Bob prepares; Alice receives the mode factor.

    ``joint`` has shape ``(D, L)``.  ``n_qubits`` is set when the ancilla is a
    register of ``L`` qubits (``D = 2**L``), ``None`` for a generic ancilla.
    """

    joint: np.ndarray
    n_qubits: int | None = None

    def __post_init__(self):
        joint = validate_joint_state(self.joint)
        object.__setattr__(self, "joint", joint)
        if self.n_qubits is not None and joint.shape[0] != 2 ** self.n_qubits:
            raise InvalidStateError(
                f"qubit register of {self.n_qubits} needs D = {2 ** self.n_qubits}")

    @property
    def n_modes(self) -> int:
        return self.joint.shape[1]

    @property
    def anc_dim(self) -> int:
        return self.joint.shape[0]


def build_ghz_attack(n) -> EntangledAttack:
    """Bob keeps one qubit per pulse holding that pulse's sign bit.

    Amplitude at (ancilla string S, mode k) is ``(-1)**s_k`` over
    ``sqrt((n+1) * 2**(n+1))``, summed over all ``2**(n+1)`` strings.
    """
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"n must be a positive integer, got {n!r}")
    if n > MAX_GHZ_N:
        raise ResourceLimitError(f"GHZ attack capped at n <= {MAX_GHZ_N}")
    L = int(n) + 1
    joint = (1.0 - 2.0 * all_sign_strings(L)) / np.sqrt(L * 2.0 ** L)
    return EntangledAttack(joint=joint.astype(np.complex128), n_qubits=L)


def bell_pair_collapse(n, t, r, detector, signed=True):
    """Bell pair on qubits ``(t, t+r)`` with ``|+>`` on every other qubit.

    With ``signed=False`` this is ``phi+`` (detector D0) or ``psi+`` (D1).
    With ``signed=True`` each basis string picks up ``(-1)**s_t``, giving
    ``phi-`` / ``psi-``: the states the GHZ preset actually collapses to.  The
    two forms differ by a Pauli Z on qubit ``t``.
    """
    L = n + 1
    u = (t + r) % L
    bits = all_sign_strings(L)
    same = bits[:, t] == bits[:, u]
    mask = same if Detector(detector) is Detector.D0 else ~same
    amp = mask.astype(np.float64)
    if signed:
        amp = amp * (1.0 - 2.0 * bits[:, t])
    return (amp / np.linalg.norm(amp)).astype(np.complex128)


def ghz_collapse_check(attack: EntangledAttack, signed=True):
    """Compare every conditional ancilla of ``attack`` with the Bell-pair form.

    Returns
    -------
    dict
        ``min_fidelity`` over all shifts and outcomes, and
        ``max_mass_error``: the largest deviation of an outcome's probability
        from half of its pair's probability.
    """
    L = attack.n_modes
    n = L - 1
    min_fid = 1.0
    mass_err = 0.0
    for r in range(1, L):
        outcomes = interfere_joint(attack.joint, r)
        pair_mass = np.zeros(L)
        for o in outcomes:
            pair_mass[o.k] += o.probability
        seen = set()
        for o in outcomes:
            ref = bell_pair_collapse(n, o.k, r, o.detector, signed=signed)
            min_fid = min(min_fid, fidelity(ref, o.ancilla))
            mass_err = max(mass_err, abs(o.probability - 0.5 * pair_mass[o.k]))
            seen.add((o.k, o.detector))
        # a missing member of a pair is a maximal mass error
        for k in range(L):
            for d in Detector:
                if pair_mass[k] > 0 and (k, d) not in seen:
                    mass_err = max(mass_err, 0.5 * pair_mass[k])
    return {"min_fidelity": min_fid, "max_mass_error": mass_err}


class StrategyKind(str, Enum):
    HONEST_Z = "z"
    PRIVACY_X = "x"
    CUSTOM = "custom"


@dataclass(frozen=True)
class BobStrategy:
    """How Bob measures his ancilla after Alice announces ``t``.

    For ``CUSTOM`` the rows of ``basis`` are the orthonormal measurement
    vectors and ``labels[b]`` is the sign string Bob adopts on outcome ``b``
    (defaults to the bits of ``b`` for qubit registers).
    """

    kind: StrategyKind
    basis: np.ndarray | None = None
    labels: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind(self.kind))
        if self.kind is StrategyKind.CUSTOM:
            if self.basis is None:
                raise InvalidParameterError("custom strategy needs a basis")
            basis = np.asarray(self.basis, dtype=np.complex128)
            gram = basis.conj() @ basis.T
            if basis.ndim != 2 or basis.shape[0] != basis.shape[1] or \
                    np.max(np.abs(gram - np.eye(basis.shape[0]))) > NORM_TOL:
                raise InvalidParameterError("custom basis rows must be orthonormal")
            object.__setattr__(self, "basis", basis)

    @classmethod
    def honest_z(cls):
        return cls(StrategyKind.HONEST_Z)

    @classmethod
    def privacy_x(cls):
        return cls(StrategyKind.PRIVACY_X)

    @classmethod
    def custom(cls, basis, labels=None):
        return cls(StrategyKind.CUSTOM, basis=basis, labels=labels)


@dataclass(frozen=True)
class AttackRunRecord:
    t: int
    detector: Detector
    alice_bit: int
    bob_bit_guess: int
    bob_r_guess: int | None
    privacy_breached: bool
    cheat_detected: bool
    alice_r: int


def _hadamard_all(vec, n_qubits):
    """Amplitudes of ``vec`` in the product X basis (bit 1 = ``|->``)."""
    out = np.asarray(vec, dtype=np.complex128).reshape((2,) * n_qubits)
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    for axis in range(n_qubits):
        out = np.moveaxis(np.tensordot(h, out, axes=([1], [axis])), 0, axis)
    return out.reshape(-1)


def _strategy_amplitudes(strategy, attack, ancilla):
    if strategy.kind is StrategyKind.HONEST_Z:
        return ancilla
    if strategy.kind is StrategyKind.PRIVACY_X:
        return _hadamard_all(ancilla, attack.n_qubits)
    return strategy.basis.conj() @ ancilla


def _check_strategy(attack, strategy, n):
    if n is not None and attack.n_modes != n + 1:
        raise InvalidParameterError(
            f"attack has {attack.n_modes} modes but n = {n}")
    if strategy.kind is StrategyKind.CUSTOM:
        if strategy.basis.shape[0] != attack.anc_dim:
            raise InvalidParameterError(
                f"basis dimension {strategy.basis.shape[0]} != ancilla {attack.anc_dim}")
        if strategy.labels is None and attack.n_qubits is None:
            raise InvalidParameterError("generic ancilla needs explicit labels")
    elif attack.n_qubits != attack.n_modes:
        raise InvalidParameterError(
            "Z/X strategies need one ancilla qubit per pulse")


def _labels(strategy, attack):
    if strategy.kind is StrategyKind.CUSTOM and strategy.labels is not None:
        return np.asarray(strategy.labels, dtype=np.int64)
    return all_sign_strings(attack.n_modes)


def _draw(probs, u):
    cdf = kernels.build_cdf(probs)[0]
    return int(np.searchsorted(cdf, u, side="right"))


def run_entangled_attack(attack, strategy, n, rng) -> AttackRunRecord:
    """One query against an entangled attack, simulated end to end.

    Alice draws a private shift, measures her half through
    :func:`interfere_joint` and announces ``t``.  Bob then measures the
    collapsed ancilla.  Z-type outcomes (``HONEST_Z``, ``CUSTOM``) are read as
    a sign string from which Bob builds his key; his effective guess of
    Alice's bit is that key at her known position.  Under ``PRIVACY_X`` a
    ``|->`` on a qubit other than ``t`` reveals the partner pulse and hence
    ``r``, and the bit guess is a fair coin.
    """
    _check_strategy(attack, strategy, n)
    L = attack.n_modes
    r = int(rng.integers(1, L))
    outcomes = interfere_joint(attack.joint, r)
    chosen = outcomes[_draw([o.probability for o in outcomes], rng.random())]
    t, det = chosen.k, chosen.detector
    alice_bit = int(det)
    amps = _strategy_amplitudes(strategy, attack, chosen.ancilla)
    b = _draw(np.abs(amps) ** 2, rng.random())
    r_guess = None
    if strategy.kind is StrategyKind.PRIVACY_X:
        minus = [q for q in range(L) if (b >> q) & 1 and q != t]
        if minus:
            r_guess = (minus[0] - t) % L
        bit_guess = int(rng.integers(0, 2))
    else:
        key = derive_key_bob(_labels(strategy, attack)[b], t)
        bit_guess = int(key[derive_known_position(t, r, L - 1)])
    return AttackRunRecord(
        t=t, detector=det, alice_bit=alice_bit, bob_bit_guess=bit_guess,
        bob_r_guess=r_guess, privacy_breached=r_guess is not None,
        cheat_detected=bit_guess != alice_bit, alice_r=r)


@dataclass
class AttackTally:
    """Counts over many entangled-attack trials."""

    trials: int
    cheat_detected: int
    privacy_breached: int
    breach_correct: int
    alice_ones: int
    per_r_trials: np.ndarray
    per_r_breached: np.ndarray
    per_r_detected: np.ndarray

    def merge(self, other):
        return AttackTally(*(getattr(self, f) + getattr(other, f) for f in (
            "trials", "cheat_detected", "privacy_breached", "breach_correct",
            "alice_ones", "per_r_trials", "per_r_breached", "per_r_detected")))


class _AttackTables:
    """Outcome and ancilla-measurement sampling tables for every shift."""

    def __init__(self, attack, strategy):
        L = attack.n_modes
        cells = 2 * L
        D = attack.anc_dim
        self.outcome_probs = np.zeros((L - 1, cells))
        anc_probs = np.full(((L - 1) * cells, D), 1.0)
        for r in range(1, L):
            for o in interfere_joint(attack.joint, r):
                cell = 2 * o.k + int(o.detector)
                self.outcome_probs[r - 1, cell] = o.probability
                amps = _strategy_amplitudes(strategy, attack, o.ancilla)
                anc_probs[(r - 1) * cells + cell] = np.abs(amps) ** 2
        self.outcome_cdf = kernels.build_cdf(self.outcome_probs)
        self.anc_cdf = kernels.build_cdf(anc_probs)
        self.cells = cells


def entangled_attack_trials(attack, strategy, trials, rng, tables=None) -> AttackTally:
    """Vectorised equivalent of repeated :func:`run_entangled_attack` calls.

    The conditional ancilla for every (shift, outcome) is computed once; each
    trial then costs two table lookups plus the strategy's decision rule.
    """
    _check_strategy(attack, strategy, None)
    L = attack.n_modes
    if tables is None:
        tables = _AttackTables(attack, strategy)
    r = rng.integers(1, L, size=trials, dtype=np.int64)
    cell = kernels.sample_rows(tables.outcome_cdf, r - 1, rng.random(trials))
    b = kernels.sample_rows(tables.anc_cdf, (r - 1) * tables.cells + cell,
                            rng.random(trials))
    t = cell // 2
    alice_bit = cell % 2
    partner = (t + r) % L
    breached = np.zeros(trials, dtype=bool)
    correct = np.zeros(trials, dtype=bool)
    if strategy.kind is StrategyKind.PRIVACY_X:
        bits = (b[:, None] >> np.arange(L)) & 1
        bits[np.arange(trials), t] = 0
        breached = bits.any(axis=1)
        first = np.argmax(bits, axis=1)
        correct = breached & (((first - t) % L) == r)
        guess = rng.integers(0, 2, size=trials)
    else:
        s = _labels(strategy, attack)[b]
        rows = np.arange(trials)
        guess = s[rows, t] ^ s[rows, partner]
    detected = guess != alice_bit
    return AttackTally(
        trials=trials,
        cheat_detected=int(detected.sum()),
        privacy_breached=int(breached.sum()),
        breach_correct=int(correct.sum()),
        alice_ones=int(alice_bit.sum()),
        per_r_trials=np.bincount(r - 1, minlength=L - 1),
        per_r_breached=np.bincount(r - 1, weights=breached, minlength=L - 1).astype(np.int64),
        per_r_detected=np.bincount(r - 1, weights=detected, minlength=L - 1).astype(np.int64),
    )


# -- exploratory search -------------------------------------------------------

@dataclass
class SearchReport:
    n: int
    samples: int
    min_pmin: float
    min_pmin_distance: float
    min_nonlegal_pmin: float
    min_ratio_pmin_over_dist2: float
    pmin_quantiles: dict
    max_injected_pmin: float | None
    refined_pmin: float
    refined_distance: float
    counterexamples: list = field(default_factory=list)


def _normalise_polar(mag, phase):
    a = mag * np.exp(1j * phase)
    return a / np.linalg.norm(a)


def _refine(a, step=0.2, min_step=1e-7, max_sweeps=400):
    """Coordinate descent on magnitudes and phases to lower ``pmin``."""
    mag = np.abs(a).copy()
    phase = np.angle(a).copy()
    best = float(kernels.pmin_terms(_normalise_polar(mag, phase)).sum())
    sweeps = 0
    while step > min_step and sweeps < max_sweeps:
        improved = False
        for params in (mag, phase):
            for j in range(params.shape[0]):
                for delta in (step, -step):
                    old = params[j]
                    params[j] = old + delta
                    if params is mag and params[j] < 0:
                        params[j] = old
                        continue
                    val = float(kernels.pmin_terms(_normalise_polar(mag, phase)).sum())
                    if val < best:
                        best = val
                        improved = True
                        break
                    params[j] = old
        if not improved:
            step *= 0.5
        sweeps += 1
    return _normalise_polar(mag, phase), best


def search_attack_states(n, samples, rng, legal_radius=0.1, inject_legal=0,
                         refine=True, counterexample_tol=1e-6) -> SearchReport:
    """Random search for non-legal states that Bob could send without risk.

    Haar-random states are scored by :func:`pmin`; states farther than
    ``legal_radius`` from every legal signal with ``pmin`` below
    ``counterexample_tol`` are reported as counterexample candidates.  The best
    non-legal sample is then refined by coordinate descent.
    """
    if samples < 1:
        raise InvalidParameterError("samples must be >= 1")
    L = int(n) + 1
    states = haar_states(L, samples, rng)
    n_injected = int(inject_legal)
    if n_injected:
        S = rng.integers(0, 2, size=(n_injected, L))
        phase = np.exp(2j * np.pi * rng.random(n_injected))
        legal = phase[:, None] * (1.0 - 2.0 * S) / np.sqrt(L)
        states = np.vstack([states, legal])
    pm = np.array([kernels.pmin_terms(s).sum() for s in states])
    dist = np.array([legal_distance(s) for s in states])
    nonlegal = dist > legal_radius
    counterexamples = [
        {"state": [[float(z.real), float(z.imag)] for z in s], "pmin": float(p),
         "distance": float(d)}
        for s, p, d in zip(states, pm, dist) if d > legal_radius and p < counterexample_tol
    ]
    haar_pm = pm[:samples]
    if nonlegal.any():
        best_idx = int(np.flatnonzero(nonlegal)[np.argmin(pm[nonlegal])])
        min_nonlegal = float(pm[best_idx])
        ratio = float(np.min(pm[nonlegal] / dist[nonlegal] ** 2))
    else:
        best_idx = int(np.argmin(pm))
        min_nonlegal = float("inf")
        ratio = float("inf")
    refined_pm, refined_dist = float(pm[best_idx]), float(dist[best_idx])
    if refine:
        refined, refined_pm = _refine(states[best_idx])
        refined_dist = legal_distance(refined)
        if refined_dist > legal_radius and refined_pm < counterexample_tol:
            counterexamples.append({
                "state": [[float(z.real), float(z.imag)] for z in refined],
                "pmin": refined_pm, "distance": refined_dist})
    i_min = int(np.argmin(pm))
    return SearchReport(
        n=int(n),
        samples=samples,
        min_pmin=float(pm[i_min]),
        min_pmin_distance=float(dist[i_min]),
        min_nonlegal_pmin=min_nonlegal,
        min_ratio_pmin_over_dist2=ratio,
        pmin_quantiles={q: float(np.quantile(haar_pm, q)) for q in (0.0, 0.01, 0.5, 1.0)},
        max_injected_pmin=float(pm[samples:].max()) if n_injected else None,
        refined_pmin=refined_pm,
        refined_distance=refined_dist,
        counterexamples=counterexamples,
    )


# -- Monte Carlo validation ---------------------------------------------------

@dataclass
class MCReport:
    trials: int
    max_abs_deviation: float
    max_sigma: float
    chi_square: float
    dof: int
    cells_outside: int
    tol_sigma: float

    @property
    def passed(self) -> bool:
        return self.cells_outside == 0


def compare_frequencies(counts, probs, trials, tol_sigma=5.0) -> MCReport:
    """Cell-wise binomial comparison of observed counts with probabilities.

    A cell passes when ``|freq - p| <= tol_sigma * sqrt(p (1 - p) / trials)``;
    cells with ``p = 0`` must be empty.
    """
    counts = np.asarray(counts, dtype=np.float64).ravel()
    probs = np.asarray(probs, dtype=np.float64).ravel()
    freq = counts / trials
    dev = np.abs(freq - probs)
    se = np.sqrt(probs * (1.0 - probs) / trials)
    positive = probs > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = np.where(se > 0, dev / se, np.where(dev > 0, np.inf, 0.0))
        chi = np.where(positive, (counts - trials * probs) ** 2 / (trials * probs), 0.0)
    outside = int(np.sum(dev > tol_sigma * se))
    return MCReport(
        trials=int(trials),
        max_abs_deviation=float(dev.max(initial=0.0)),
        max_sigma=float(sigma.max(initial=0.0)),
        chi_square=float(chi.sum()),
        dof=max(int(positive.sum()) - 1, 0),
        cells_outside=outside,
        tol_sigma=tol_sigma,
    )


def monte_carlo_vs_analytic(a, trials, rng, tol_sigma=5.0) -> MCReport:
    """Sample Alice's (shift, pair, detector) and compare with the exact law."""
    if trials < 1000:
        raise InvalidParameterError("at least 10^3 trials are required")
    dist = joint_outcome_distribution(a)
    n, L, _ = dist.shape
    cdf = kernels.build_cdf(dist.reshape(n, 2 * L))
    r = rng.integers(1, L, size=trials, dtype=np.int64)
    cell = kernels.sample_rows(cdf, r - 1, rng.random(trials))
    counts = np.bincount((r - 1) * 2 * L + cell, minlength=n * 2 * L)
    return compare_frequencies(counts, dist, trials, tol_sigma)
