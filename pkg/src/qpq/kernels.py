"""Hot inner loops.

Every kernel has two implementations with identical semantics:

* ``*_loop`` -- explicit scalar loops, compiled by numba when enabled;
* ``*_numpy`` -- vectorised numpy, used when numba is disabled.

The public names (``sample_rows``, ``honest_batch``, ``pmin_terms``) dispatch
according to :data:`qpq._accel.USE_NUMBA`.  Both paths consume the same
pre-drawn random inputs, so they produce identical discrete outputs; the
random numbers themselves are always drawn by numpy generators outside the
kernels.
"""

import numpy as np

from qpq._accel import USE_NUMBA, njit

__all__ = [
    "build_cdf",
    "sample_rows",
    "sample_rows_loop",
    "sample_rows_numpy",
    "honest_batch",
    "honest_batch_loop",
    "honest_batch_numpy",
    "pmin_terms",
    "pmin_terms_loop",
    "pmin_terms_numpy",
]


def build_cdf(probs):
    """Row-wise cumulative table for inverse-CDF sampling.

    Rows are normalised and every entry from the last positive cell onwards
    is pinned to exactly 1.0, so a uniform draw in [0, 1) can never land on
    a zero-probability cell through round-off.
    """
    probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    totals = probs.sum(axis=1, keepdims=True)
    cdf = np.cumsum(probs / totals, axis=1)
    positive = probs > 0
    last = probs.shape[1] - 1 - np.argmax(positive[:, ::-1], axis=1)
    cols = np.arange(probs.shape[1])
    cdf[cols[None, :] >= last[:, None]] = 1.0
    return np.ascontiguousarray(cdf)


def _sample_rows_loop(cdf, rows, u):
    n = u.shape[0]
    m = cdf.shape[1]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        row = rows[i]
        lo = 0
        hi = m - 1
        # first column whose cumulative value exceeds u
        while lo < hi:
            mid = (lo + hi) // 2
            if cdf[row, mid] > u[i]:
                hi = mid
            else:
                lo = mid + 1
        out[i] = lo
    return out


def sample_rows_numpy(cdf, rows, u):
    """Inverse-CDF categorical draws, one per (row, uniform) pair."""
    rows = np.asarray(rows, dtype=np.int64)
    u = np.asarray(u, dtype=np.float64)
    out = np.empty(u.shape[0], dtype=np.int64)
    for row in np.unique(rows):
        mask = rows == row
        out[mask] = np.searchsorted(cdf[row], u[mask], side="right")
    return np.minimum(out, cdf.shape[1] - 1)


sample_rows_loop = njit(_sample_rows_loop)


def _honest_batch_loop(signs, shifts, u, db, item):
    n_sessions, L = signs.shape
    n = L - 1
    t_out = np.empty(n_sessions, dtype=np.int64)
    d_out = np.empty(n_sessions, dtype=np.int64)
    p_out = np.empty(n_sessions, dtype=np.int64)
    known_out = np.empty(n_sessions, dtype=np.int64)
    decoded_out = np.empty(n_sessions, dtype=np.int64)
    count_out = np.empty(n_sessions, dtype=np.int64)
    consistent_out = np.empty(n_sessions, dtype=np.bool_)
    amp = 1.0 / np.sqrt(L)
    key = np.empty(n, dtype=np.int64)
    for b in range(n_sessions):
        r = shifts[b]
        # inverse-CDF over cells ordered (k, D0), (k, D1), k = 0..L-1
        acc = 0.0
        chosen = -1
        last_pos = 0
        for k in range(L):
            ak = amp * (1 - 2 * signs[b, k])
            au = amp * (1 - 2 * signs[b, (k + r) % L])
            plus = ak + au
            minus = ak - au
            p0 = plus * plus * 0.25
            p1 = minus * minus * 0.25
            if p0 > 0.0:
                last_pos = 2 * k
            acc += p0
            if chosen < 0 and u[b] < acc:
                chosen = 2 * k
            if p1 > 0.0:
                last_pos = 2 * k + 1
            acc += p1
            if chosen < 0 and u[b] < acc:
                chosen = 2 * k + 1
        if chosen < 0:
            chosen = last_pos
        t = chosen // 2
        d = chosen % 2
        partner = (t + r) % L
        p = partner if partner < t else partner - 1
        s_t = signs[b, t]
        count = 0
        for m in range(n):
            idx = m if m < t else m + 1
            key[m] = s_t ^ signs[b, idx]
            if idx == partner:
                count += 1
        shift = (p - item) % n
        cipher_item = db[item] ^ key[(item + shift) % n]
        t_out[b] = t
        d_out[b] = d
        p_out[b] = p
        known_out[b] = d
        decoded_out[b] = cipher_item ^ d
        count_out[b] = count
        consistent_out[b] = key[p] == d
    return t_out, d_out, p_out, known_out, decoded_out, count_out, consistent_out


def honest_batch_numpy(signs, shifts, u, db, item):
    """Vectorised honest Protocol II sessions; see :func:`honest_batch`."""
    signs = np.asarray(signs, dtype=np.int64)
    n_sessions, L = signs.shape
    n = L - 1
    rows = np.arange(n_sessions)[:, None]
    k = np.arange(L)[None, :]
    amp = 1.0 / np.sqrt(L)
    a = amp * (1 - 2 * signs)
    a_shift = a[rows, (k + shifts[:, None]) % L]
    plus = a + a_shift
    minus = a - a_shift
    cells = np.empty((n_sessions, 2 * L))
    cells[:, 0::2] = plus * plus * 0.25
    cells[:, 1::2] = minus * minus * 0.25
    acc = np.cumsum(cells, axis=1)
    hit = u[:, None] < acc
    cols = np.arange(2 * L)
    last_pos = np.max(np.where(cells > 0.0, cols, 0), axis=1)
    chosen = np.where(hit.any(axis=1), np.argmax(hit, axis=1), last_pos)
    t = chosen // 2
    d = chosen % 2
    partner = (t + shifts) % L
    p = np.where(partner < t, partner, partner - 1)
    m = np.arange(n)[None, :]
    idx = np.where(m < t[:, None], m, m + 1)
    s_t = signs[np.arange(n_sessions), t]
    key = s_t[:, None] ^ signs[rows, idx]
    count = np.sum(idx == partner[:, None], axis=1)
    shift = (p - item) % n
    cipher_item = db[item] ^ key[np.arange(n_sessions), (item + shift) % n]
    consistent = key[np.arange(n_sessions), p] == d
    return (t, d, p, d.copy(), cipher_item ^ d, count, consistent)


honest_batch_loop = njit(_honest_batch_loop)


def _pmin_terms_loop(a):
    L = a.shape[0]
    n = L - 1
    out = np.zeros(n, dtype=np.float64)
    for r in range(1, L):
        total = 0.0
        for k in range(L):
            b = a[(k + r) % L]
            plus = abs(a[k] + b) ** 2
            minus = abs(a[k] - b) ** 2
            total += min(plus, minus)
        out[r - 1] = total / (4.0 * n)
    return out


def pmin_terms_numpy(a):
    """Per-shift contributions to the minimum wrong-value probability."""
    a = np.asarray(a, dtype=np.complex128)
    L = a.shape[0]
    n = L - 1
    idx = (np.arange(L)[None, :] + np.arange(1, L)[:, None]) % L
    b = a[idx]
    plus = np.abs(a[None, :] + b) ** 2
    minus = np.abs(a[None, :] - b) ** 2
    return np.minimum(plus, minus).sum(axis=1) / (4.0 * n)


pmin_terms_loop = njit(_pmin_terms_loop)


def sample_rows(cdf, rows, u):
    """Draw one categorical index per uniform ``u[i]`` from row ``rows[i]``.

    Parameters
    ----------
    cdf : ndarray, shape (R, M)
        Table from :func:`build_cdf`.
    rows : ndarray of int, shape (n,)
    u : ndarray of float, shape (n,)
        Uniforms in [0, 1).

    Returns
    -------
    ndarray of int, shape (n,)
        Smallest column ``j`` with ``cdf[row, j] > u``.
    """
    cdf = np.ascontiguousarray(cdf, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    if USE_NUMBA:
        return sample_rows_loop(cdf, rows, u)
    return sample_rows_numpy(cdf, rows, u)


def honest_batch(signs, shifts, u, db, item):
    """Run a block of honest, lossless Protocol II sessions.

    Parameters
    ----------
    signs : ndarray of int, shape (B, L)
        Bob's sign strings, one per session.
    shifts : ndarray of int, shape (B,)
        Alice's private shifts, each in 1..L-1.
    u : ndarray of float, shape (B,)
        Uniforms driving Alice's detection outcome.
    db : ndarray of int, shape (L-1,)
        Database bits.
    item : int
        Index Alice queries.

    Returns
    -------
    tuple of ndarrays, each shape (B,)
        ``(t, detector, known_pos, known_val, decoded, known_count,
        key_consistent)``.
    """
    signs = np.ascontiguousarray(signs, dtype=np.int64)
    shifts = np.ascontiguousarray(shifts, dtype=np.int64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    db = np.ascontiguousarray(db, dtype=np.int64)
    if USE_NUMBA:
        return honest_batch_loop(signs, shifts, u, db, int(item))
    return honest_batch_numpy(signs, shifts, u, db, int(item))


def pmin_terms(a):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if USE_NUMBA:
        return pmin_terms_loop(a)
    return pmin_terms_numpy(a)
