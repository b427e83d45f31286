import itertools
import math

import numpy as np
import pytest
from scipy import stats

from qpq.adversary import (
    BobStrategy,
    EntangledAttack,
    all_sign_strings,
    bell_pair_collapse,
    build_ghz_attack,
    compare_frequencies,
    entangled_attack_trials,
    ghz_collapse_check,
    haar_states,
    holevo_bound,
    joint_outcome_distribution,
    legal_distance,
    legal_overlap,
    legal_signals,
    monte_carlo_vs_analytic,
    pmin,
    run_entangled_attack,
    search_attack_states,
)
from qpq.engine import Detector, interfere, interfere_joint
from qpq.errors import InvalidParameterError, InvalidStateError, ResourceLimitError

import oracles


# -- Holevo ------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 7, 15])
def test_holevo_enumerated_equals_log(n):
    assert holevo_bound(n, "enumerate") == pytest.approx(math.log2(n + 1), abs=1e-9)
    assert holevo_bound(n, "analytic") == pytest.approx(math.log2(n + 1), abs=1e-12)


def test_holevo_enumeration_capped():
    with pytest.raises(ResourceLimitError):
        holevo_bound(17, "enumerate")
    with pytest.raises(InvalidParameterError):
        holevo_bound(0)


def test_legal_signals_count_and_norm():
    sig = legal_signals(4)
    assert sig.shape == (16, 4)
    np.testing.assert_allclose(np.linalg.norm(sig, axis=1), 1.0)
    assert len({tuple(row) for row in all_sign_strings(4)}) == 16


# -- pmin --------------------------------------------------------------------

def test_pmin_frozen_examples():
    assert pmin([1, 0, 0, 0]).pmin == pytest.approx(0.5, abs=1e-12)
    assert pmin(np.array([1, 1j, 1, 1j]) / 2).pmin == pytest.approx(1 / 3, abs=1e-12)


def test_pmin_matches_enumeration(rng):
    for L in (2, 3, 4, 6, 9):
        for a in haar_states(L, 20, rng):
            assert pmin(a).pmin == pytest.approx(oracles.pmin_enumerated(a), abs=1e-12)


@pytest.mark.parametrize("L", range(2, 7))
def test_pmin_zero_on_every_legal_state(L):
    for S in itertools.product((0, 1), repeat=L):
        a = (1.0 - 2.0 * np.array(S)) / math.sqrt(L) * oracles.random_phase()
        rep = pmin(a)
        assert rep.pmin <= 1e-12 and rep.is_legal


def test_pmin_positive_off_legal(rng):
    for L in (3, 4, 8):
        base = (1.0 - 2.0 * rng.integers(0, 2, size=L)) / math.sqrt(L)
        for eps in (1e-3, 1e-2, 0.1):
            z = rng.standard_normal(L) + 1j * rng.standard_normal(L)
            a = base + eps * z
            a /= np.linalg.norm(a)
            if legal_distance(a) > 1e-6:
                assert pmin(a).pmin > 0


def test_pmin_bounds_and_symmetries(rng):
    for a in haar_states(5, 200, rng):
        p = pmin(a).pmin
        assert -1e-15 <= p <= 0.5 + 1e-12
        assert pmin(np.roll(a, 2)).pmin == pytest.approx(p, abs=1e-12)
        assert pmin(np.exp(0.4j) * a).pmin == pytest.approx(p, abs=1e-12)


def test_pmin_per_shift_sums():
    rep = pmin(np.array([1, 1j, 1, 1j]) / 2)
    assert sorted(rep.per_shift) == [1, 2, 3]
    assert sum(rep.per_shift.values()) == pytest.approx(rep.pmin)


def test_joint_distribution_consistency(rng):
    a = haar_states(4, 1, rng)[0]
    dist = joint_outcome_distribution(a)
    assert dist.shape == (3, 4, 2)
    assert dist.sum() == pytest.approx(1.0, abs=1e-12)
    for r in range(1, 4):
        np.testing.assert_allclose(dist[r - 1] * 3, interfere(a, r).probabilities, atol=1e-12)
    # frozen: r=1, k=0 marginal of a basis state
    assert joint_outcome_distribution([1, 0, 0, 0])[0, 0].sum() == pytest.approx(1 / 6)


def test_legal_overlap_exact(rng):
    for L in (2, 3, 5, 8):
        for a in haar_states(L, 30, rng):
            assert legal_overlap(a) == pytest.approx(oracles.legal_overlap_bruteforce(a), abs=1e-12)
    a = legal_signals(5)[7] * np.exp(1.1j)
    assert legal_overlap(a) == pytest.approx(1.0, abs=1e-12)
    assert legal_distance(a) == pytest.approx(0.0, abs=1e-6)


# -- entangled attack --------------------------------------------------------

def test_ghz_state_matches_literal():
    for n in (1, 2, 3):
        np.testing.assert_allclose(build_ghz_attack(n).joint, oracles.ghz_joint_literal(n),
                                   atol=1e-15)
    joint = build_ghz_attack(1).joint
    # |00>(1,1) + |01>(-1,1) + |10>(1,-1) + |11>(-1,-1), all over sqrt(8)
    expected = np.array([[1, 1], [-1, 1], [1, -1], [-1, -1]]) / math.sqrt(8)
    np.testing.assert_allclose(joint, expected, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_ghz_reduced_state_maximally_mixed(n):
    rho = oracles.partial_trace_ancilla(build_ghz_attack(n).joint)
    np.testing.assert_allclose(rho, np.eye(n + 1) / (n + 1), atol=1e-12)


def test_ghz_caps():
    with pytest.raises(ResourceLimitError):
        build_ghz_attack(13)
    with pytest.raises(InvalidParameterError):
        build_ghz_attack(0)
    with pytest.raises(InvalidStateError):
        EntangledAttack(joint=np.ones((4, 3)) / math.sqrt(12), n_qubits=3)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_ghz_collapses_to_signed_bell_pairs(n):
    check = ghz_collapse_check(build_ghz_attack(n), signed=True)
    assert check["min_fidelity"] == pytest.approx(1.0, abs=1e-9)
    assert check["max_mass_error"] < 1e-12


def test_ghz_unsigned_bell_pairs_differ_by_local_z():
    # signed and unsigned forms are related by Z on qubit t
    for n in (1, 3):
        L = n + 1
        for t, r in itertools.product(range(L), range(1, L)):
            for d in Detector:
                s = bell_pair_collapse(n, t, r, d, signed=True)
                u = bell_pair_collapse(n, t, r, d, signed=False)
                z = 1.0 - 2.0 * ((np.arange(2 ** L) >> t) & 1)
                np.testing.assert_allclose(z * u, s, atol=1e-15)


def test_ghz_each_pair_equally_likely():
    attack = build_ghz_attack(3)
    for r in range(1, 4):
        probs = {(o.k, o.detector): o.probability for o in interfere_joint(attack.joint, r)}
        for k in range(4):
            for d in Detector:
                assert probs[(k, d)] == pytest.approx(1 / 8, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_honest_z_rates_zero(rng, n):
    tally = entangled_attack_trials(build_ghz_attack(n), BobStrategy.honest_z(), 10_000, rng)
    assert tally.cheat_detected == 0 and tally.privacy_breached == 0


def test_honest_z_never_caught_never_breaches(rng):
    attack = build_ghz_attack(3)
    for _ in range(300):
        rec = run_entangled_attack(attack, BobStrategy.honest_z(), 3, rng)
        assert not rec.cheat_detected and not rec.privacy_breached
        assert rec.bob_bit_guess == rec.alice_bit


@pytest.mark.parametrize("n", [1, 3, 5])
def test_privacy_x_rates(rng, n):
    attack = build_ghz_attack(n)
    trials = 40_000
    tally = entangled_attack_trials(attack, BobStrategy.privacy_x(), trials, rng)
    se = math.sqrt(0.25 / trials)
    assert abs(tally.cheat_detected / trials - 0.5) < 5 * se
    assert abs(tally.privacy_breached / trials - 0.5) < 5 * se
    assert tally.breach_correct == tally.privacy_breached
    assert tally.per_r_trials.sum() == trials


def test_privacy_x_indicators_independent_of_r():
    tally = entangled_attack_trials(build_ghz_attack(4), BobStrategy.privacy_x(), 100_000,
                                    np.random.default_rng(8))
    for counts in (tally.per_r_breached, tally.per_r_detected):
        _, pvalue = stats.chi2_contingency(np.vstack([counts, tally.per_r_trials - counts]))[:2]
        assert pvalue > 1e-4


def test_scalar_and_batch_attack_agree(rng):
    attack = build_ghz_attack(2)
    strategy = BobStrategy.privacy_x()
    trials = 3000
    recs = [run_entangled_attack(attack, strategy, 2, rng) for _ in range(trials)]
    assert all(r.bob_r_guess == r.alice_r for r in recs if r.privacy_breached)
    scalar = np.mean([r.privacy_breached for r in recs])
    batch = entangled_attack_trials(attack, strategy, 30_000, rng)
    se = math.sqrt(0.25 / trials) + math.sqrt(0.25 / 30_000)
    assert abs(scalar - batch.privacy_breached / 30_000) < 5 * se


def test_custom_identity_basis_is_z(rng):
    attack = build_ghz_attack(2)
    strategy = BobStrategy.custom(np.eye(8))
    tally = entangled_attack_trials(attack, strategy, 5000, rng)
    assert tally.cheat_detected == 0
    rec = run_entangled_attack(attack, strategy, 2, rng)
    assert not rec.cheat_detected


def test_custom_strategy_validation():
    with pytest.raises(InvalidParameterError):
        BobStrategy.custom(np.ones((2, 2)))
    with pytest.raises(InvalidParameterError):
        entangled_attack_trials(build_ghz_attack(2), BobStrategy.custom(np.eye(4)), 10,
                                np.random.default_rng())
    with pytest.raises(InvalidParameterError):
        run_entangled_attack(build_ghz_attack(2), BobStrategy.honest_z(), 3,
                             np.random.default_rng())
    generic = EntangledAttack(joint=np.ones((3, 3)) / 3)
    with pytest.raises(InvalidParameterError):
        entangled_attack_trials(generic, BobStrategy.honest_z(), 10, np.random.default_rng())


# -- search and Monte Carlo --------------------------------------------------

def test_search_finds_no_counterexample():
    rep = search_attack_states(3, 10_000, np.random.default_rng(11), inject_legal=50)
    assert rep.min_nonlegal_pmin > 0
    assert rep.max_injected_pmin <= 1e-12
    assert rep.min_pmin <= 1e-12
    assert rep.counterexamples == []
    again = search_attack_states(3, 10_000, np.random.default_rng(11), inject_legal=50)
    assert again.min_nonlegal_pmin == rep.min_nonlegal_pmin
    assert again.refined_pmin == rep.refined_pmin


def test_search_rejects_empty():
    with pytest.raises(InvalidParameterError):
        search_attack_states(3, 0, np.random.default_rng())


def test_compare_frequencies_exact_counts():
    probs = np.array([0.0, 0.25, 0.75])
    rep = compare_frequencies([0, 250, 750], probs, 1000)
    assert rep.max_abs_deviation == 0.0 and rep.passed and rep.dof == 1
    bad = compare_frequencies([10, 240, 750], probs, 1000)
    assert not bad.passed and math.isinf(bad.max_sigma)


def test_monte_carlo_vs_analytic(rng):
    for L in (2, 4, 8):
        a = haar_states(L, 1, rng)[0]
        rep = monte_carlo_vs_analytic(a, 100_000, rng)
        assert rep.passed, rep
    with pytest.raises(InvalidParameterError):
        monte_carlo_vs_analytic([1, 0], 999, rng)


def test_monte_carlo_legal_state_reproducible():
    a = legal_signals(4)[5]
    first = monte_carlo_vs_analytic(a, 100_000, np.random.default_rng(3))
    again = monte_carlo_vs_analytic(a, 100_000, np.random.default_rng(3))
    assert first.passed and first == again
