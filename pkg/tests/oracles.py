"""Independent reference computations used to freeze expected values.

Everything here is deliberately naive (explicit matrices, itertools
enumeration, pure-Python sums) and shares no code with ``qpq``.
"""

import cmath
import itertools
import math

import numpy as np


def interferometer_matrix(L, r):
    """Explicit 2L x L matrix; row 2k is (k, D0), row 2k+1 is (k, D1)."""
    M = np.zeros((2 * L, L), dtype=complex)
    for k in range(L):
        partner = (k + r) % L
        M[2 * k, k] += 0.5
        M[2 * k, partner] += 0.5
        M[2 * k + 1, k] += 0.5j
        M[2 * k + 1, partner] -= 0.5j
    return M


def outcome_probs(a, r):
    """Dict (k, d) -> probability by direct matrix application."""
    out = interferometer_matrix(len(a), r) @ np.asarray(a, dtype=complex)
    return {(i // 2, i % 2): abs(z) ** 2 for i, z in enumerate(out)}


def pmin_terms_enumerated(a):
    """Every (r, k) term of the minimum-error sum, by explicit enumeration."""
    L = len(a)
    N = L - 1
    terms = {}
    for r in range(1, L):
        for k in range(L):
            x = a[k]
            y = a[(k + r) % L]
            plus = abs(x + y) ** 2 / (4 * N)
            minus = abs(x - y) ** 2 / (4 * N)
            terms[(r, k)] = min(plus, minus)
    return terms


def pmin_enumerated(a):
    return math.fsum(pmin_terms_enumerated(a).values())


def legal_overlap_bruteforce(a):
    L = len(a)
    best = 0.0
    for signs in itertools.product((1, -1), repeat=L):
        best = max(best, abs(sum(s * z for s, z in zip(signs, a))))
    return best / math.sqrt(L)


def entropy_bits_eig(rho):
    eig = np.linalg.eigvals(np.asarray(rho, dtype=complex)).real
    return -sum(float(x) * math.log2(float(x)) for x in eig if x > 1e-15)


def enumerated_density(L):
    """Average projector of all 2^L legal signals, built by explicit loops."""
    rho = np.zeros((L, L))
    for bits in itertools.product((0, 1), repeat=L):
        v = np.array([(-1) ** b for b in bits]) / math.sqrt(L)
        rho += np.outer(v, v)
    return rho / 2 ** L


def partial_trace_ancilla(joint):
    """Reduced mode state of a (D, L) joint state, summing over the ancilla."""
    D, L = joint.shape
    rho = np.zeros((L, L), dtype=complex)
    for d in range(D):
        for i in range(L):
            for j in range(L):
                rho[i, j] += joint[d, i] * joint[d, j].conjugate()
    return rho


def ghz_joint_literal(N):
    """Joint GHZ attack state written term by term; qubit k is bit k of the index."""
    L = N + 1
    D = 2 ** L
    joint = np.zeros((D, L), dtype=complex)
    norm = math.sqrt(L * 2 ** L)
    for idx in range(D):
        for k in range(L):
            s_k = (idx >> k) & 1
            joint[idx, k] = (-1) ** s_k / norm
    return joint


def random_phase():
    return cmath.exp(1j * 0.7331)
