"""Monte Carlo engine: BLER sweeps, SE traces and noiseless recovery checks.

Trial t at grid point k draws its message, channel and noise from
trial_rng(seed, t, k), so every decoder at a point sees the same trials and a
rerun reproduces them exactly. Trials run in fixed-size batches; the stop
rule is only checked between batches, which keeps the trial count of every
record independent of the worker count.
"""

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from sparcsim.channel import ebn0_to_sigma_v, sample_channel, transmit
from sparcsim.codec import (
    bits_to_hex,
    decode_support,
    encode,
    indicator,
    random_message,
    section_errors,
    to_codeword,
)
from sparcsim.decoders import DecoderConfig
from sparcsim.decoders.mlmp import mlmp
from sparcsim.dictionary import build_mub_prime, partition_sections
from sparcsim.log import write_log
from sparcsim.rng import se_rng, trial_rng
from sparcsim.samp import samp_iterations, se_offline

CSV_HEADER = [
    "config_id",
    "decoder",
    "ebn0_db",
    "trials",
    "block_errors",
    "bler",
    "wall_seconds",
    "seed",
    "low_confidence",
]
SE_TRACE_HEADER = ["t", "tau_sq_predicted", "tau_sq_empirical"]
BOUND_HEADER = ["ebn0_db", "pe_lower_bound"]
LOW_CONFIDENCE_ERRORS = 10
LOGGED_FAILURES = 5
SE_TRACK_TOLERANCE = 0.1
SE_FIXED_POINT_ITERATIONS = 8


def _fmt(value):
    return format(value, ".10g")


@dataclass(frozen=True)
class BlerRecord:
    config_id: str
    decoder: str
    ebn0_db: float
    trials: int
    block_errors: int
    bler: float
    wall_seconds: float
    seed: int
    low_confidence: bool
    section_errors: int = 0
    n_sections: int = 1

    @property
    def ser(self):
        return self.section_errors / (self.trials * self.n_sections) if self.trials else 0.0

    def csv_row(self):
        return [
            self.config_id,
            self.decoder,
            _fmt(self.ebn0_db),
            str(self.trials),
            str(self.block_errors),
            _fmt(self.bler),
            _fmt(self.wall_seconds),
            str(self.seed),
            "true" if self.low_confidence else "false",
        ]

    def to_dict(self):
        lo, hi = wilson_interval(self.block_errors, self.trials)
        return {**asdict(self), "ser": self.ser, "wilson_low": lo, "wilson_high": hi}


@dataclass(frozen=True)
class SeTracePoint:
    t: int
    tau_sq_predicted: float
    tau_sq_empirical: float


@dataclass(frozen=True)
class Theorem1Row:
    p: int
    K: int
    bound: int
    trials: int
    failures: int

    @property
    def within_bound(self):
        return self.K <= self.bound

    @property
    def passed(self):
        return self.failures == 0


def make_record(
    config_id, decoder, ebn0_db, trials, block_errors, wall_seconds, seed, sec_errors=0, n_sections=1
):
    return BlerRecord(
        config_id=config_id,
        decoder=decoder,
        ebn0_db=float(ebn0_db),
        trials=trials,
        block_errors=block_errors,
        bler=block_errors / trials if trials else 0.0,
        wall_seconds=float(wall_seconds),
        seed=seed,
        low_confidence=block_errors < LOW_CONFIDENCE_ERRORS,
        section_errors=sec_errors,
        n_sections=n_sections,
    )


def wilson_interval(errors, trials, z=1.96):
    """Wilson score interval for a binomial error rate."""
    if trials <= 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def ebn0_at_bler(records, target):
    """Eb/N0 where a BLER curve crosses ``target``, interpolating log10(BLER) linearly.

    Zero-error points count as half an error. Returns None when the curve
    never crosses the target.
    """
    points = sorted((r.ebn0_db, max(r.bler, 0.5 / r.trials)) for r in records if r.trials)
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if y0 >= target >= y1 and y0 != y1:
            l0, l1, lt = math.log10(y0), math.log10(y1), math.log10(target)
            return x0 + (lt - l0) * (x1 - x0) / (l1 - l0)
        if y0 == target:
            return x0
    if points and points[-1][1] == target:
        return points[-1][0]
    return None


@contextmanager
def _workers(threads):
    if threads is None or threads <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=threads) as executor:
        yield executor.map


def draw_trial(dictionary, seed, trial, point, sigma_v_sq, antennas, sigma_h_sq):
    """Message, channel and observation for one trial (draw order: bits, h, V)."""
    rng = trial_rng(seed, trial, point)
    support = encode(random_message(dictionary.plan, rng), dictionary)
    codeword = to_codeword(support, dictionary)
    channel = sample_channel(antennas, sigma_h_sq, rng)
    return support, channel, transmit(codeword, channel, sigma_v_sq, rng)


def _failure(trial, sent, decoded, dictionary):
    return {
        "trial": trial,
        "sent": bits_to_hex(decode_support(sent, dictionary)),
        "decoded": bits_to_hex(decode_support(decoded, dictionary)),
    }


def run_bler_sweep(cfg, threads=None, progress=None, dictionary=None):
    """BLER for every (decoder, Eb/N0) of a SimConfig, in decoder-major order.

    ``progress(point, n_points, ebn0_db, trials)`` is called after each batch.
    The sweep_point log entry of every record lists the first LOGGED_FAILURES
    errored trials with sent and decoded messages as hex.
    """
    if dictionary is None:
        dictionary = cfg.build_dictionary()
    else:
        cfg.check_fit(dictionary)
    decoders = cfg.build_decoders()
    K = dictionary.n_sections
    N_b = dictionary.plan.total_bits
    by_decoder = [[] for _ in decoders]

    with _workers(threads) as pmap:
        for point, ebn0 in enumerate(cfg.ebn0_db):
            sigma_v_sq = ebn0_to_sigma_v(ebn0, N_b, K)
            dcfgs = [DecoderConfig(cfg.sigma_h_sq, sigma_v_sq, K, paths) for _, _, paths in decoders]
            contexts = [
                dec.prepare(dictionary, dcfg, cfg.antennas, se_rng(cfg.seed, point))
                for (_, dec, _), dcfg in zip(decoders, dcfgs)
            ]
            tallies = [
                {"trials": 0, "errors": 0, "sections": 0, "seconds": 0.0, "failed": []} for _ in decoders
            ]
            active = list(range(len(decoders)))

            def run_trial(
                trial, active=active, dcfgs=dcfgs, contexts=contexts, sigma_v_sq=sigma_v_sq, point=point
            ):
                sent, _, obs = draw_trial(
                    dictionary, cfg.seed, trial, point, sigma_v_sq, cfg.antennas, cfg.sigma_h_sq
                )
                outcome = []
                for j in active:
                    t0 = time.perf_counter()
                    result = decoders[j][1].decode(obs, dictionary, dcfgs[j], contexts[j])
                    elapsed = time.perf_counter() - t0
                    wrong = section_errors(result.support, sent)
                    failure = _failure(trial, sent, result.support, dictionary) if wrong else None
                    outcome.append((j, wrong, elapsed, failure))
                return outcome

            start = 0
            while active and start < cfg.max_trials:
                stop = min(start + cfg.batch_size, cfg.max_trials)
                for outcome in pmap(run_trial, range(start, stop)):
                    for j, wrong, elapsed, failure in outcome:
                        tally = tallies[j]
                        tally["trials"] += 1
                        tally["errors"] += wrong > 0
                        tally["sections"] += wrong
                        tally["seconds"] += elapsed
                        if failure and len(tally["failed"]) < LOGGED_FAILURES:
                            tally["failed"].append(failure)
                start = stop
                active[:] = [j for j in active if tallies[j]["errors"] < cfg.min_errors]
                if progress:
                    progress(point, len(cfg.ebn0_db), ebn0, start)

            for j, (_, dec, _) in enumerate(decoders):
                t = tallies[j]
                record = make_record(
                    cfg.config_id,
                    dec.describe(dcfgs[j]),
                    ebn0,
                    t["trials"],
                    t["errors"],
                    t["seconds"],
                    cfg.seed,
                    t["sections"],
                    K,
                )
                write_log({"event": "sweep_point", **record.to_dict(), "failed_trials": t["failed"]})
                by_decoder[j].append(record)

    return [r for records in by_decoder for r in records]


def _samp_params(cfg):
    for entry in cfg.decoders:
        if entry["name"] == "samp":
            return entry
    return {}


def run_se_trace(cfg, ebn0_db=None, trials=500, threads=None, dictionary=None):
    """Predicted (offline SE) against empirical tau_t^2 for one Eb/N0 point.

    The empirical value at t is sigma_v^2 + |G^t - G|^2/(ND) averaged over
    trials, with G^0 = 0. SAMP runs for exactly as many iterations as the
    predicted schedule has values.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    dictionary = dictionary or cfg.build_dictionary()
    ebn0_db = cfg.ebn0_db[0] if ebn0_db is None else ebn0_db
    point = cfg.ebn0_db.index(ebn0_db) if ebn0_db in cfg.ebn0_db else 0
    params = _samp_params(cfg)
    N = dictionary.n_rows
    D = cfg.antennas
    sigma_v_sq = ebn0_to_sigma_v(ebn0_db, dictionary.plan.total_bits, dictionary.n_sections)

    schedule = se_offline(
        dictionary,
        cfg.sigma_h_sq,
        sigma_v_sq,
        D,
        se_rng(cfg.seed, point),
        n_mc=params.get("n_mc", 2000),
        t_max=params.get("t_max", 25),
        rel_tol=params.get("rel_tol", 1e-3),
    )
    T = len(schedule.taus)
    fixed = replace(schedule, t_max=T, early_stop=False)

    def trace_trial(trial):
        sent, channel, obs = draw_trial(dictionary, cfg.seed, trial, point, sigma_v_sq, D, cfg.sigma_h_sq)
        G = np.outer(indicator(sent, dictionary)[: dictionary.plan.n_used], channel.h)
        errors = np.empty(T)
        errors[0] = float(np.sum(np.abs(G) ** 2))
        for state in samp_iterations(obs, dictionary, cfg.sigma_h_sq, fixed):
            if state.t + 1 < T:
                errors[state.t + 1] = float(np.sum(np.abs(state.G_hat - G) ** 2))
        return errors

    with _workers(threads) as pmap:
        total = sum(pmap(trace_trial, range(trials)))
    empirical = sigma_v_sq + total / trials / (N * D)

    points = [SeTracePoint(t, schedule.taus[t], float(empirical[t])) for t in range(T)]
    write_log(
        {
            "event": "se_trace",
            "config_id": cfg.config_id,
            "ebn0_db": ebn0_db,
            "trials": trials,
            "iterations": T,
            "converged": schedule.converged,
            "tau_sq_predicted": [p.tau_sq_predicted for p in points],
            "tau_sq_empirical": [p.tau_sq_empirical for p in points],
        }
    )
    return points


def se_trace_gaps(points):
    """|empirical - predicted| / predicted at every iteration."""
    return [abs(p.tau_sq_empirical - p.tau_sq_predicted) / p.tau_sq_predicted for p in points]


def judge_se_trace(points, tolerance=SE_TRACK_TOLERANCE, max_iterations=None):
    """Pass/fail summary of an SE trace.

    tracks: every gap within ``tolerance``. settles: the predicted sequence
    reached its fixed point within ``max_iterations`` values (always true
    when max_iterations is None).
    """
    gaps = se_trace_gaps(points)
    worst = max(gaps) if gaps else 0.0
    return {
        "iterations": len(points),
        "gaps": gaps,
        "worst_gap": worst,
        "worst_iteration": points[gaps.index(worst)].t if gaps else None,
        "tracks": worst <= tolerance,
        "settles": max_iterations is None or len(points) <= max_iterations,
    }


def theorem1_bound(p):
    """Largest K with guaranteed noiseless recovery: floor((1 + mu)/(2 mu)), mu = 1/sqrt(p)."""
    mu = 1.0 / math.sqrt(p)
    return math.floor((1 + mu) / (2 * mu))


def run_theorem1_check(p_list, K_list=None, trials=1000, seed=0, threads=None):
    """Noiseless single-antenna MLMP with beta=1, gamma=0 on MUB(p).

    With no K_list every K from 1 to the bound is checked. Rows above the
    bound are reported but carry no guarantee.
    """
    rows = []
    with _workers(threads) as pmap:
        for point, p in enumerate(p_list):
            bound = theorem1_bound(p)
            base = build_mub_prime(p)
            for K in K_list or range(1, bound + 1):
                dictionary = base.with_sections(partition_sections(base.n_cols, K))
                dcfg = DecoderConfig(1.0, 0.0, K, 1, theorem1_mode=True)

                def check_trial(trial, dictionary=dictionary, dcfg=dcfg, point=point):
                    sent, _, obs = draw_trial(dictionary, seed, trial, point, 0.0, 1, 1.0)
                    return mlmp(obs, dictionary, dcfg).support != sent

                failures = sum(pmap(check_trial, range(trials)))
                row = Theorem1Row(p, K, bound, trials, int(failures))
                write_log({"event": "theorem1", **asdict(row), "passed": row.passed})
                rows.append(row)
    return rows


def write_bler_csv(records, out=None):
    """Write records as CSV to a path, or return the CSV text when out is None."""
    return _write_csv(CSV_HEADER, [r.csv_row() for r in records], out)


def write_se_trace_csv(points, out=None):
    rows = [[str(p.t), _fmt(p.tau_sq_predicted), _fmt(p.tau_sq_empirical)] for p in points]
    return _write_csv(SE_TRACE_HEADER, rows, out)


def write_bound_csv(curve, out=None):
    return _write_csv(BOUND_HEADER, [[_fmt(x), _fmt(pe)] for x, pe in curve], out)


def write_records_json(records, out):
    path = Path(out)
    path.write_text(json.dumps([r.to_dict() for r in records], indent=2) + "\n")
    return path


def _write_csv(header, rows, out):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buffer.getvalue()
    if out is None:
        return text
    Path(out).write_text(text)
    return Path(out)
