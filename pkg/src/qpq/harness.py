"""Seeded batch experiments and their reports.

Randomness: trials are cut into fixed-size blocks and block ``b`` draws from
``PCG64(SeedSequence(seed, spawn_key=(0, b)))``.  Results therefore depend
only on ``(config, seed)``, never on how blocks are spread over workers.
"""

import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial, reduce

import numpy as np

from qpq import adversary, protocol
from qpq.engine import NORM_TOL
from qpq.errors import InvalidParameterError, InvalidStateError

__all__ = [
    "BLOCK_SIZE",
    "RNG_ALGORITHM",
    "Metric",
    "Verdict",
    "StatReport",
    "block_rng",
    "aux_rng",
    "rate_metric",
    "value_metric",
    "emit_report",
    "render_report",
    "load_state_file",
    "run_query_experiment",
    "run_bitshare_experiment",
    "run_holevo_experiment",
    "run_pure_attack_experiment",
    "run_entangled_experiment",
    "run_search_experiment",
    "run_mc_experiment",
    "PURE_PRESETS",
    "preset_state",
]

BLOCK_SIZE = 10_000
RNG_ALGORITHM = "numpy PCG64 seeded by SeedSequence(seed, spawn_key=(0, block)); block size 10000"


def block_rng(seed, block):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(0, block))))


def aux_rng(seed, tag):
    """Stream for experiment-level draws (database contents, random presets)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1, tag))))


def _blocks(trials):
    return [(b, min(BLOCK_SIZE, trials - b * BLOCK_SIZE))
            for b in range(math.ceil(trials / BLOCK_SIZE))]


def _map_blocks(func, trials, workers):
    blocks = _blocks(trials)
    if workers and workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, blocks))
    else:
        parts = [func(b) for b in blocks]
    return reduce(lambda x, y: x.merge(y), parts)


@dataclass
class Metric:
    name: str
    count: int
    mean: float
    stderr: float
    min: float
    max: float


@dataclass
class Verdict:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class StatReport:
    command: str
    config: dict
    seed: int
    metrics: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    rng: str = RNG_ALGORITHM

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def metric(self, name) -> Metric:
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(name)

    def check(self, name, passed, detail=""):
        self.verdicts.append(Verdict(name, bool(passed), detail))

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{m.name}={_fmt(m.mean)}" for m in self.metrics[:4])
        return f"{self.command}: {status} ({shown})"


def rate_metric(name, hits, count):
    """Bernoulli indicator summary: mean, binomial standard error, min/max."""
    if count == 0:
        return Metric(name, 0, float("nan"), float("nan"), float("nan"), float("nan"))
    p = hits / count
    return Metric(name, count, p, math.sqrt(p * (1 - p) / count),
                  0.0 if hits < count else 1.0, 1.0 if hits > 0 else 0.0)


def value_metric(name, value):
    return Metric(name, 1, float(value), 0.0, float(value), float(value))


def _fmt(x):
    return format(x, ".12g")


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(_fmt(x)) if math.isfinite(x) else None
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _num(obj)


CSV_FIELDS = ("name", "count", "mean", "stderr", "min", "max")


def render_report(report: StatReport, fmt="json") -> str:
    if fmt == "json":
        doc = {
            "command": report.command,
            "config": _jsonable(report.config),
            "seed": report.seed,
            "rng": report.rng,
            "metrics": [_jsonable(vars(m)) for m in report.metrics],
            "verdicts": [vars(v) for v in report.verdicts],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for m in report.metrics:
            writer.writerow([m.name, m.count] + [_fmt(getattr(m, f)) for f in CSV_FIELDS[2:]])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report: StatReport, fmt, path):
    """Write ``report`` to ``path`` (``"-"`` for stdout).

    Raises
    ------
    OSError
        If the path cannot be written.
    """
    text = render_report(report, fmt)
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def load_state_file(path, tol=1e-6):
    """Read a JSON array of ``[re, im]`` pairs; renormalise after a 1e-6 check."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        a = np.array([complex(float(re), float(im)) for re, im in data])
    except (TypeError, ValueError) as exc:
        raise InvalidStateError(f"{path}: expected an array of [re, im] pairs") from exc
    norm = float(np.linalg.norm(a))
    if a.ndim != 1 or a.shape[0] < 2 or abs(norm ** 2 - 1.0) > tol:
        raise InvalidStateError(f"{path}: state must have >= 2 entries and unit norm")
    return a / norm


# -- experiments ---------------------------------------------------------------

def _honest_block(block, *, config, db, item, seed, r_fixed=None):
    b, size = block
    return protocol.run_honest_sessions(config, db, item, size, block_rng(seed, b),
                                        r_fixed=r_fixed)


def _truncated_geometric_mean(q, cap):
    """Mean of a geometric(q) round count conditioned on finishing within ``cap``."""
    p = 1.0 - q
    if p == 0.0:
        return 1.0
    k = np.arange(1, cap + 1, dtype=np.float64)
    w = q * p ** (k - 1)
    return float(np.dot(k, w) / w.sum())


def run_query_experiment(n, item, trials, seed, mode="II", loss_prob=0.0,
                         max_rounds=1000, db=None, workers=1, tol_sigma=5.0):
    config = protocol.SessionConfig(n=n, mode=mode, loss_prob=loss_prob,
                                    max_rounds=max_rounds, seed=seed)
    if not 0 <= item < n:
        raise InvalidParameterError(f"item must be in 0..{n - 1}")
    if db is None:
        db = aux_rng(seed, 0).integers(0, 2, size=n)
    db = np.asarray(db, dtype=np.int64)
    func = partial(_honest_block, config=config, db=db, item=item, seed=seed)
    agg = _map_blocks(func, trials, workers)

    report = StatReport("query", {
        "n": n, "item": item, "trials": trials, "mode": config.mode.value,
        "loss_prob": loss_prob, "max_rounds": max_rounds,
    }, seed)
    done = agg.completed
    report.metrics.append(rate_metric("success_rate", agg.successes, done))
    report.metrics.append(rate_metric("known_bit_exactly_one", agg.known_exactly_one, agg.passes))
    report.metrics.append(rate_metric("key_consistency", agg.key_consistent, agg.passes))
    if done:
        mean = agg.rounds_sum / done
        var = max(agg.rounds_sq_sum / done - mean ** 2, 0.0)
        report.metrics.append(Metric("rounds_used", done, mean, math.sqrt(var / done),
                                     float(agg.rounds_min), float(agg.rounds_max)))
    report.metrics.append(rate_metric("channel_failure_rate", agg.channel_failures, trials))
    expected_t = agg.passes / (n + 1)
    chi = float(np.sum((agg.t_counts - expected_t) ** 2 / expected_t)) if agg.passes else 0.0
    report.metrics.append(Metric("announced_t_chi_square", agg.passes, chi, 0.0, chi, chi))
    if config.mode is protocol.Mode.II_PRIME:
        report.metrics.append(rate_metric("repeat_consistency", agg.consistent_repeats, done))
        report.check("repeat_consistency == 1", agg.consistent_repeats == done)

    report.check("success_rate == 1", agg.successes == done,
                 f"{agg.successes}/{done}")
    report.check("exactly one known key bit", agg.known_exactly_one == agg.passes)
    report.check("known bit matches Bob's key", agg.key_consistent == agg.passes)
    if done:
        n_passes = 2 if config.mode is protocol.Mode.II_PRIME else 1
        expected = n_passes * _truncated_geometric_mean(1.0 - loss_prob, max_rounds)
        rm = report.metric("rounds_used")
        tol = tol_sigma * rm.stderr
        report.check("mean rounds_used", abs(rm.mean - expected) <= tol,
                     f"mean {rm.mean:.6g} vs {expected:.6g} +/- {tol:.3g}")
    return report


@dataclass
class _ShareTally:
    trials: int
    agree: int
    ones: int

    def merge(self, other):
        return _ShareTally(self.trials + other.trials, self.agree + other.agree,
                           self.ones + other.ones)


def _share_block(block, *, L, seed):
    b, size = block
    rng = block_rng(seed, b)
    agree = ones = 0
    for _ in range(size):
        sb = protocol.run_bit_share(L, rng)
        agree += sb.agree
        ones += sb.value
    return _ShareTally(size, agree, ones)


def run_bitshare_experiment(pulses, trials, seed, workers=1, tol_sigma=5.0):
    if pulses < 2:
        raise InvalidParameterError("need at least 2 pulses")
    agg = _map_blocks(partial(_share_block, L=pulses, seed=seed), trials, workers)
    report = StatReport("bitshare", {"pulses": pulses, "trials": trials}, seed)
    report.metrics.append(rate_metric("agreement_rate", agg.agree, agg.trials))
    report.metrics.append(rate_metric("bit_value_mean", agg.ones, agg.trials))
    report.check("agreement_rate == 1", agg.agree == agg.trials)
    vm = report.metric("bit_value_mean")
    report.check("bit value uniform", abs(vm.mean - 0.5) <= tol_sigma * 0.5 / math.sqrt(agg.trials))
    return report


def run_holevo_experiment(n, method="enumerate", seed=0):
    report = StatReport("bound holevo", {"n": n, "method": method}, seed)
    analytic = adversary.holevo_bound(n, "analytic")
    report.metrics.append(value_metric("holevo_analytic", analytic))
    report.check("analytic == log2(n+1)", analytic == math.log2(n + 1))
    if method in ("enumerate", "both"):
        value = adversary.holevo_bound(n, "enumerate")
        report.metrics.append(value_metric("holevo_enumerate", value))
        report.check("enumerate == log2(n+1) within 1e-9",
                     abs(value - math.log2(n + 1)) <= 1e-9, f"{value!r}")
    return report


def preset_state(preset, n, seed):
    L = n + 1
    if preset == "basis":
        a = np.zeros(L, dtype=complex)
        a[0] = 1.0
        return a
    if preset == "iphase":
        return np.array([1.0 if k % 2 == 0 else 1j for k in range(L)]) / np.sqrt(L)
    if preset == "legal":
        S = aux_rng(seed, 1).integers(0, 2, size=L)
        return (1.0 - 2.0 * S) / np.sqrt(L) + 0j
    if preset == "random":
        return adversary.haar_states(L, 1, aux_rng(seed, 1))[0]
    raise ValueError(f"unknown preset {preset!r}")


PURE_PRESETS = ("basis", "iphase", "legal", "random")


def run_pure_attack_experiment(state, seed=0, expect=None, label="state"):
    rep = adversary.pmin(state)
    n = len(state) - 1
    report = StatReport("attack pure", {"n": n, "state": label}, seed)
    report.metrics.append(value_metric("pmin", rep.pmin))
    for r, v in rep.per_shift.items():
        report.metrics.append(value_metric(f"pmin_shift_{r}", v))
    report.metrics.append(value_metric("legal_distance", adversary.legal_distance(state)))
    report.metrics.append(value_metric("is_legal", float(rep.is_legal)))
    report.check("0 <= pmin <= 1/2", -1e-12 <= rep.pmin <= 0.5 + 1e-12)
    if expect is not None:
        report.check("pmin matches expectation within 1e-12",
                     abs(rep.pmin - expect) <= 1e-12, f"{rep.pmin!r} vs {expect!r}")
    return report


def _attack_block(block, *, attack, strategy, seed):
    b, size = block
    return adversary.entangled_attack_trials(attack, strategy, size, block_rng(seed, b))


def run_entangled_experiment(n, strategy, trials, seed, preset="ghz", workers=1,
                             tol_sigma=5.0):
    if preset != "ghz":
        raise ValueError(f"unknown entangled preset {preset!r}")
    attack = adversary.build_ghz_attack(n)
    strat = adversary.BobStrategy(strategy)
    agg = _map_blocks(partial(_attack_block, attack=attack, strategy=strat, seed=seed),
                      trials, workers)
    report = StatReport("attack entangled", {
        "n": n, "preset": preset, "strategy": strat.kind.value, "trials": trials,
    }, seed)
    report.metrics.append(rate_metric("detection_rate", agg.cheat_detected, agg.trials))
    report.metrics.append(rate_metric("privacy_breach_rate", agg.privacy_breached, agg.trials))
    report.metrics.append(rate_metric("breach_identifies_r", agg.breach_correct,
                                      agg.privacy_breached))
    check = adversary.ghz_collapse_check(attack, signed=True)
    report.metrics.append(value_metric("collapse_fidelity_signed_bell", check["min_fidelity"]))
    report.metrics.append(value_metric("collapse_fidelity_unsigned_bell",
                                       adversary.ghz_collapse_check(attack, signed=False)["min_fidelity"]))
    report.metrics.append(value_metric("collapse_mass_error", check["max_mass_error"]))
    if strat.kind is adversary.StrategyKind.HONEST_Z:
        report.check("detection_rate == 0", agg.cheat_detected == 0)
        report.check("privacy_breach_rate == 0", agg.privacy_breached == 0)
    else:
        band = tol_sigma * 0.5 / math.sqrt(agg.trials)
        for name in ("detection_rate", "privacy_breach_rate"):
            m = report.metric(name)
            report.check(f"{name} == 1/2", abs(m.mean - 0.5) <= band,
                         f"{m.mean:.6g} +/- {band:.3g}")
        report.check("every breach identifies r", agg.breach_correct == agg.privacy_breached)
    return report


def run_search_experiment(n, samples, seed, inject_legal=0, legal_radius=0.1):
    rng = block_rng(seed, 0)
    res = adversary.search_attack_states(n, samples, rng, legal_radius=legal_radius,
                                         inject_legal=inject_legal)
    report = StatReport("attack search", {
        "n": n, "samples": samples, "inject_legal": inject_legal,
        "legal_radius": legal_radius,
    }, seed)
    for name in ("min_pmin", "min_pmin_distance", "min_nonlegal_pmin",
                 "min_ratio_pmin_over_dist2", "refined_pmin", "refined_distance"):
        report.metrics.append(value_metric(name, getattr(res, name)))
    for q, v in res.pmin_quantiles.items():
        report.metrics.append(value_metric(f"pmin_quantile_{q:g}", v))
    report.metrics.append(value_metric("counterexamples", len(res.counterexamples)))
    report.check("no counterexample candidates", not res.counterexamples)
    if res.max_injected_pmin is not None:
        report.metrics.append(value_metric("max_injected_pmin", res.max_injected_pmin))
        report.check("injected legal states have pmin <= 1e-12",
                     res.max_injected_pmin <= 1e-12)
    return report


def run_mc_experiment(n, trials, seed, states=1, state=None, tol_sigma=5.0):
    report = StatReport("validate mc", {
        "n": n, "trials": trials, "states": 1 if state is not None else states,
    }, seed)
    if state is not None:
        batch = [np.asarray(state)]
    else:
        batch = list(adversary.haar_states(n + 1, states, aux_rng(seed, 2)))
    worst_sigma = []
    outside = 0
    for idx, a in enumerate(batch):
        if abs(np.linalg.norm(a) - 1.0) > NORM_TOL:
            a = a / np.linalg.norm(a)
        mc = adversary.monte_carlo_vs_analytic(a, trials, block_rng(seed, idx), tol_sigma)
        worst_sigma.append(mc.max_sigma)
        outside += mc.cells_outside
        report.metrics.append(value_metric(f"state_{idx}_max_sigma", mc.max_sigma))
        report.metrics.append(value_metric(f"state_{idx}_max_abs_deviation", mc.max_abs_deviation))
        report.metrics.append(value_metric(f"state_{idx}_chi_square", mc.chi_square))
    report.metrics.insert(0, Metric("max_sigma", len(worst_sigma), float(np.mean(worst_sigma)),
                                    0.0, float(np.min(worst_sigma)), float(np.max(worst_sigma))))
    report.check(f"all cells within {tol_sigma:g} standard errors", outside == 0,
                 f"{outside} cells outside")
    return report
