"""Both kernel paths must agree exactly on discrete outputs."""

import numpy as np
import pytest

from qpq import kernels
from qpq.engine import interfere, prepare_signal

import oracles


@pytest.fixture(params=["loop", "numpy"])
def honest_impl(request):
    return {"loop": kernels.honest_batch_loop, "numpy": kernels.honest_batch_numpy}[request.param]


def _honest_inputs(rng, B, L):
    signs = rng.integers(0, 2, size=(B, L), dtype=np.int64)
    shifts = rng.integers(1, L, size=B, dtype=np.int64)
    u = rng.random(B)
    db = rng.integers(0, 2, size=L - 1, dtype=np.int64)
    return signs, shifts, u, db


@pytest.mark.parametrize("L", [2, 3, 5, 17, 65])
def test_honest_paths_identical(rng, L):
    signs, shifts, u, db = _honest_inputs(rng, 2000, L)
    item = int(rng.integers(0, L - 1))
    a = kernels.honest_batch_loop(signs, shifts, u, db, item)
    b = kernels.honest_batch_numpy(signs, shifts, u, db, item)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(np.asarray(x), np.asarray(y))


def test_honest_kernel_matches_engine_sampling(honest_impl, rng):
    # same uniform through the engine's table must pick the same cell
    L = 6
    signs, shifts, u, db = _honest_inputs(rng, 300, L)
    t, d, *_ = honest_impl(signs, shifts, u, db, 2)
    for b in range(300):
        table = interfere(prepare_signal(signs[b]), int(shifts[b]))
        cdf = kernels.build_cdf(table.probabilities.ravel())[0]
        cell = int(np.searchsorted(cdf, u[b], side="right"))
        assert (t[b], d[b]) == (cell // 2, cell % 2)


def test_honest_kernel_invariants(honest_impl, rng):
    L = 9
    signs, shifts, u, db = _honest_inputs(rng, 5000, L)
    item = 4
    t, d, p, known, decoded, count, consistent = honest_impl(signs, shifts, u, db, item)
    rows = np.arange(len(t))
    assert np.all(d == signs[rows, t] ^ signs[rows, (t + shifts) % L])
    assert np.all(decoded == db[item])
    assert np.all(count == 1)
    assert np.all(consistent)
    assert np.all((0 <= p) & (p < L - 1))


def test_sample_rows_paths_identical(rng):
    probs = rng.random((7, 11))
    probs[:, 3] = 0.0
    probs[2, 7:] = 0.0
    cdf = kernels.build_cdf(probs)
    rows = rng.integers(0, 7, size=20_000)
    u = rng.random(20_000)
    u[:5] = [0.0, np.nextafter(1.0, 0.0), 0.5, 0.999999999999, 1e-300]
    a = kernels.sample_rows_loop(cdf, rows, u)
    b = kernels.sample_rows_numpy(cdf, rows, u)
    np.testing.assert_array_equal(a, b)
    assert not np.any(b == 3)
    assert not np.any(b[rows == 2] >= 7)


def test_build_cdf_pins_tail():
    cdf = kernels.build_cdf([[0.1, 0.2, 0.7, 0.0, 0.0]])
    assert cdf[0, 2] == cdf[0, 3] == cdf[0, 4] == 1.0


@pytest.mark.parametrize("impl", [kernels.pmin_terms_loop, kernels.pmin_terms_numpy])
def test_pmin_terms_against_enumeration(impl, rng):
    for L in (2, 3, 4, 7, 12):
        z = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        a = z / np.linalg.norm(z)
        terms = oracles.pmin_terms_enumerated(a)
        per_r = [sum(v for (r, _), v in terms.items() if r == rr) for rr in range(1, L)]
        np.testing.assert_allclose(impl(a), per_r, atol=1e-13)


@pytest.mark.parametrize("flag, expected", [("1", "numpy"), ("", None)])
def test_env_flag_selects_backend(flag, expected):
    import os
    import subprocess
    import sys

    env = {**os.environ, "QPQ_DISABLE_NUMBA": flag}
    code = "import qpq; print(qpq.backend_name())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.strip()
    if expected is not None:
        assert out == expected
    else:
        assert out in ("numba", "numpy")


def test_cli_output_independent_of_backend(tmp_path):
    import os
    import subprocess
    import sys

    outputs = []
    for flag in ("1", ""):
        path = tmp_path / f"r{flag or 0}.json"
        subprocess.run([sys.executable, "-m", "qpq", "query", "--n", "6", "--trials", "20000",
                        "--loss", "0.3", "--seed", "5", "-o", str(path)],
                       env={**os.environ, "QPQ_DISABLE_NUMBA": flag}, check=True,
                       capture_output=True)
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
