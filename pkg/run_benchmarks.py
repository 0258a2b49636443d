#!/usr/bin/env python3
"""sparcsim benchmark suite: desk-scale reproduction of the decoder and SE claims.

Usage: python run_benchmarks.py [--quick] [--only NAME ...]

Writes sparcsim_benchmarks.json and sparcsim_benchmarks_summary.md next to
this file. --quick cuts the Monte Carlo budgets by roughly 10x.
"""

import argparse
import json
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from sparcsim import harness  # noqa: E402
from sparcsim.bounds import spb_curve  # noqa: E402
from sparcsim.channel import ebn0_to_sigma_v  # noqa: E402
from sparcsim.config import sim_config_from_dict  # noqa: E402
from sparcsim.decoders import DecoderConfig  # noqa: E402
from sparcsim.decoders.ml import ml_bruteforce  # noqa: E402
from sparcsim.decoders.mlmp import mlmp  # noqa: E402
from sparcsim.dictionary import (  # noqa: E402
    build_mub_prime,
    mutual_coherence,
    partition_sections,
    random_gaussian,
)
from sparcsim.env import default_threads  # noqa: E402

TARGET_BLER = 1e-2
QUICK = False


def budget(max_trials, min_errors):
    if QUICK:
        return max(200, max_trials // 10), max(20, min_errors // 10)
    return max_trials, min_errors


def sweep(
    config_id, p, sections, decoders, grid, antennas=4, max_trials=10000, min_errors=200, dictionary=None
):
    trials, errors = budget(max_trials, min_errors)
    cfg = sim_config_from_dict(
        {
            "schema_version": 1,
            "config_id": config_id,
            "dictionary": {"source": "mub", "p": p},
            "sections": sections,
            "antennas": antennas,
            "decoders": decoders,
            "ebn0_db": grid,
            "max_trials": trials,
            "min_errors": errors,
        },
        source=config_id,
    )
    t0 = time.time()
    records = harness.run_bler_sweep(cfg, threads=default_threads(), dictionary=dictionary)
    print(f"  {config_id}: {len(records)} points in {time.time() - t0:.0f}s")
    return cfg, records


def curves(records):
    out = {}
    for r in records:
        out.setdefault(r.decoder, []).append(r)
    return out


def crossing(records_by_decoder, name):
    return harness.ebn0_at_bler(records_by_decoder[name], TARGET_BLER)


def gap(a, b):
    return None if a is None or b is None else round(b - a, 3)


# ── 1. Section plans ─────────────────────────────────────────────────

def bench_partition():
    print("\n[1/10] Section-plan reproduction...")
    cases = {"4096/4": (4096, 4, 40), "4096/8": (4096, 8, 72), "448/7": (448, 7, 42)}
    results = {}
    for label, (L, K, bits) in cases.items():
        plan = partition_sections(L, K)
        results[label] = {"sizes": list(plan.sizes), "bits": plan.total_bits, "ok": plan.total_bits == bits}
    return results


# ── 2. MUB coherence ─────────────────────────────────────────────────

def bench_coherence():
    print("\n[2/10] MUB coherence...")
    results = {}
    for p in (5, 7, 13, 31):
        mu = mutual_coherence(build_mub_prime(p).matrix)
        results[str(p)] = {"mu": mu, "error": abs(mu - 1 / np.sqrt(p))}
    return results


# ── 3. Noiseless recovery within the coherence bound ─────────────────

def bench_theorem1():
    print("\n[3/10] Noiseless recovery...")
    trials = 200 if QUICK else 1000
    rows = harness.run_theorem1_check([13, 31, 61], trials=trials, threads=default_threads())
    return [
        {"p": r.p, "K": r.K, "bound": r.bound, "trials": r.trials, "failures": r.failures}
        for r in rows
    ]


# ── 4. K=1 MLMP against exhaustive ML ────────────────────────────────

def bench_single_section_ml():
    print("\n[4/10] Single-section MLMP vs exhaustive ML...")
    trials = 200 if QUICK else 1000
    base = build_mub_prime(13, 1)
    results = {}
    for D in (1, 4):
        agree = 0
        total = 0
        for point, ebn0 in enumerate((0.0, 6.0, 12.0)):
            sigma_v_sq = ebn0_to_sigma_v(ebn0, base.plan.total_bits, 1)
            cfg = DecoderConfig(1.0 / D, sigma_v_sq, 1)
            for trial in range(trials):
                _, _, obs = harness.draw_trial(base, 0, trial, point, sigma_v_sq, D, 1.0 / D)
                agree += mlmp(obs, base, cfg).support == ml_bruteforce(obs, base, cfg).support
                total += 1
        results[f"D={D}"] = {"agree": agree, "total": total}
    return results


# ── 5. Decoder ordering at the (128,40)-class rate ───────────────────

def bench_decoder_ordering():
    print("\n[5/10] Decoder ordering (8 paths, D=4)...")
    decoders = [{"name": n, "paths": 8} for n in ("mlmp", "mbomp", "bomp")]
    cfg, records = sweep("rate40", 67, 4, decoders, [2.0, 3.0, 4.0, 5.0, 6.0, 7.0])
    by = curves(records)
    at = {name: crossing(by, name) for name in by}
    grid = list(cfg.ebn0_db)
    bound = spb_curve(67, 40, 4, 4, grid)
    mlmp_curve = by["mlmp-p8"]
    below = all(pe <= r.bler or r.block_errors == 0 for (_, pe), r in zip(bound, mlmp_curve))
    values = [pe for _, pe in bound]
    by_antennas = [spb_curve(67, 40, 4, D, grid[:1], sigma_h_sq=0.25)[0][1] for D in (1, 2, 4, 8)]
    mlmp_gap = gap(at.get("mlmp-p8"), at.get("mbomp-p8"))
    mbomp_gap = gap(at.get("mbomp-p8"), at.get("bomp-p8"))
    bound_ok = (
        all(0.0 <= pe <= 1.0 for pe in values)
        and values == sorted(values, reverse=True)
        and by_antennas == sorted(by_antennas, reverse=True)
        and below
    )
    return {
        "ebn0_at_1e-2": at,
        "mlmp_vs_mbomp_db": mlmp_gap,
        "mbomp_vs_bomp_db": mbomp_gap,
        "ordering_ok": mlmp_gap is not None and mbomp_gap is not None and mlmp_gap >= 0.8 and mbomp_gap >= 0.2,
        "bound": bound,
        "bound_by_antennas": by_antennas,
        "bound_below_mlmp": below,
        "bound_ok": bound_ok,
        "records": [r.to_dict() for r in records],
    }


# ── 6. Parallel paths at two rates ───────────────────────────────────

def bench_parallel_paths():
    print("\n[6/10] Parallel-path gain...")
    grid4 = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0]
    grid8 = [4.0, 5.0, 6.0, 7.0, 8.0, 9.0]
    _, low = sweep("k4-paths", 67, 4, [{"name": "mlmp", "paths": 1}, {"name": "mlmp", "paths": 8}], grid4)
    _, high = sweep(
        "k8-paths",
        67,
        8,
        [{"name": "mlmp", "paths": p} for p in (1, 8, 16)],
        grid8,
    )
    lo, hi = curves(low), curves(high)
    gain4 = gap(crossing(lo, "mlmp-p8"), crossing(lo, "mlmp"))
    gain8 = gap(crossing(hi, "mlmp-p8"), crossing(hi, "mlmp"))
    gain16 = gap(crossing(hi, "mlmp-p16"), crossing(hi, "mlmp-p8"))
    measured = None not in (gain4, gain8, gain16)
    return {
        "gain_k4_db": gain4,
        "gain_k8_db": gain8,
        "gain_16_over_8_db": gain16,
        "ok": measured and gain8 > gain4 and gain16 < 0.3,
    }


# ── 7. SAMP against greedy decoders at high rate ─────────────────────

def bench_samp_crossover():
    print("\n[7/10] SAMP vs greedy decoders...")
    decoders = [{"name": "mlmp"}, {"name": "mbomp"}, {"name": "samp"}]
    _, records = sweep("k12-samp", 67, 12, decoders, [6.0, 7.0, 8.0, 9.0, 10.0], max_trials=4000)
    by = curves(records)
    rows = []
    for m, b, s in zip(by["mlmp"], by["mbomp"], by["samp-offline"]):
        samp_ok = s.bler <= b.bler or s.bler >= 0.5
        rows.append(
            {
                "ebn0_db": m.ebn0_db,
                "mlmp": m.bler,
                "mbomp": b.bler,
                "samp": s.bler,
                "ok": samp_ok and m.bler <= s.bler,
            }
        )
    return {"points": rows, "ok": all(row["ok"] for row in rows)}


# ── 8. Online vs offline SE, extended iterations ─────────────────────

def bench_online_se():
    print("\n[8/10] Online SE and extended iterations...")
    decoders = [
        {"name": "samp", "schedule": "offline"},
        {"name": "samp", "schedule": "online"},
        {"name": "samp", "schedule": "offline", "t_max": 50, "early_stop": False},
    ]
    _, records = sweep("k12-online", 67, 12, decoders, [6.0, 7.0, 8.0, 9.0], max_trials=4000)
    by = curves(records)
    offline = by["samp-offline"]
    rows = []
    for ref, online, extended in zip(offline, by["samp-online"], by["samp-offline-t50"]):
        lo, hi = harness.wilson_interval(ref.block_errors, ref.trials)
        rows.append(
            {
                "ebn0_db": ref.ebn0_db,
                "offline": ref.bler,
                "online": online.bler,
                "extended": extended.bler,
                "online_inside": lo <= online.bler <= hi,
                "extended_inside": lo <= extended.bler <= hi,
            }
        )
    ok = all(row["online_inside"] and row["extended_inside"] for row in rows)
    return {"points": rows, "ok": ok}


# ── 9. State-evolution tracking ──────────────────────────────────────

def bench_se_tracking():
    print("\n[9/10] State-evolution tracking...")
    cfg = sim_config_from_dict(
        {
            "schema_version": 1,
            "config_id": "k12-mub127",
            "dictionary": {"source": "mub", "p": 127},
            "sections": 12,
            "decoders": [{"name": "samp"}],
            "ebn0_db": [18.0, 14.0],
        }
    )
    dictionary = cfg.build_dictionary()
    trials = 100 if QUICK else 500
    results = {}
    for ebn0 in cfg.ebn0_db:
        points = harness.run_se_trace(cfg, ebn0, trials, default_threads(), dictionary)
        judged = harness.judge_se_trace(points, max_iterations=harness.SE_FIXED_POINT_ITERATIONS)
        results[f"{ebn0:g}dB"] = {
            "iterations": judged["iterations"],
            "gaps": judged["gaps"],
            "worst_relative_gap": judged["worst_gap"],
            "worst_iteration": judged["worst_iteration"],
            "tracks": judged["tracks"],
            "settles": judged["settles"],
            "predicted": [p.tau_sq_predicted for p in points],
            "empirical": [p.tau_sq_empirical for p in points],
        }
    results["tracking_ok"] = results["18dB"]["tracks"]
    results["fixed_point_ok"] = results["14dB"]["settles"]
    return results


# ── 10. Section sizes and dictionary type under SAMP ─────────────────

def bench_section_sizes():
    print("\n[10/10] SAMP: section sizes, MUB vs Gaussian...")
    grid = [5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
    plans = {"7x64": (7, 448), "4x1024": (4, 4096)}
    rng = np.random.default_rng(0)
    results = {}
    for label, (K, L) in plans.items():
        sizes = [L // K] * K
        _, mub = sweep(f"{label}-mub", 67, sizes, ["samp"], grid, max_trials=4000)
        gaussian = random_gaussian(67, L, rng, n_sections=K)
        _, gauss = sweep(f"{label}-gaussian", 67, sizes, ["samp"], grid, max_trials=4000, dictionary=gaussian)
        at_mub = harness.ebn0_at_bler(mub, TARGET_BLER)
        at_gauss = harness.ebn0_at_bler(gauss, TARGET_BLER)
        results[label] = {
            "bits": gaussian.plan.total_bits,
            "coherence": {"mub": 1 / np.sqrt(67), "gaussian": gaussian.coherence},
            "ebn0_at_1e-2": {"mub": at_mub, "gaussian": at_gauss},
            "mub_gain_db": gap(at_mub, at_gauss),
            "points": [
                {"ebn0_db": m.ebn0_db, "mub": m.bler, "gaussian": g.bler} for m, g in zip(mub, gauss)
            ],
        }
    large = results["4x1024"]["ebn0_at_1e-2"]["mub"]
    small = results["7x64"]["ebn0_at_1e-2"]["mub"]
    results["large_sections_gain_db"] = gap(large, small)
    results["ok"] = (
        results["large_sections_gain_db"] is not None
        and results["large_sections_gain_db"] > 0
        and all((results[label]["mub_gain_db"] or 0) > 0 for label in plans)
    )
    return results


BENCHMARKS = {
    "partition": bench_partition,
    "coherence": bench_coherence,
    "theorem1": bench_theorem1,
    "single_section_ml": bench_single_section_ml,
    "decoder_ordering": bench_decoder_ordering,
    "parallel_paths": bench_parallel_paths,
    "samp_crossover": bench_samp_crossover,
    "online_se": bench_online_se,
    "se_tracking": bench_se_tracking,
    "section_sizes": bench_section_sizes,
}


def _fmt_db(value):
    return "N/A" if value is None else f"{value:.2f} dB"


def _verdict(ok):
    return "PASS" if ok else "FAIL"


def summary_markdown(r):
    lines = [f"# sparcsim Benchmark Results ({datetime.now(timezone.utc).strftime('%Y-%m-%d')})", ""]
    if "partition" in r:
        lines += ["## Section plans", "", "| L/K | Sizes | Bits | OK |", "|---|---|---|---|"]
        for label, row in r["partition"].items():
            lines.append(f"| {label} | {row['sizes']} | {row['bits']} | {row['ok']} |")
        lines.append("")
    if "coherence" in r:
        lines += ["## MUB coherence", "", "| p | mu | abs error |", "|---|---|---|"]
        for p, row in r["coherence"].items():
            lines.append(f"| {p} | {row['mu']:.12f} | {row['error']:.1e} |")
        lines.append("")
    if "theorem1" in r:
        lines += ["## Noiseless recovery", "", "| p | K | bound | failures/trials |", "|---|---|---|---|"]
        for row in r["theorem1"]:
            lines.append(f"| {row['p']} | {row['K']} | {row['bound']} | {row['failures']}/{row['trials']} |")
        lines.append("")
    if "single_section_ml" in r:
        lines += ["## K=1 MLMP vs exhaustive ML", ""]
        for label, row in r["single_section_ml"].items():
            lines.append(f"- {label}: {row['agree']}/{row['total']} identical decisions")
        lines.append("")
    if "decoder_ordering" in r:
        d = r["decoder_ordering"]
        lines += [
            "## Decoder ordering at BLER 1e-2",
            "",
            f"- MLMP ahead of MBOMP by {_fmt_db(d['mlmp_vs_mbomp_db'])} (need >= 0.8 dB)",
            f"- MBOMP ahead of BOMP by {_fmt_db(d['mbomp_vs_bomp_db'])} (need >= 0.2 dB)",
            f"- Ordering: {_verdict(d['ordering_ok'])}",
            f"- Sphere-packing bound in [0, 1], monotone in Eb/N0 and D, below MLMP: {_verdict(d['bound_ok'])}",
            "",
        ]
    if "parallel_paths" in r:
        pp = r["parallel_paths"]
        lines += [
            "## Parallel paths",
            "",
            f"- 8-path gain, K=4: {_fmt_db(pp['gain_k4_db'])}",
            f"- 8-path gain, K=8: {_fmt_db(pp['gain_k8_db'])}",
            f"- 16-path over 8-path, K=8: {_fmt_db(pp['gain_16_over_8_db'])} (need < 0.3 dB)",
            f"- Result: {_verdict(pp['ok'])}",
            "",
        ]
    if "samp_crossover" in r:
        sc = r["samp_crossover"]
        lines += [
            f"## SAMP vs greedy (single path): {_verdict(sc['ok'])}",
            "",
            "| Eb/N0 | MLMP | MBOMP | SAMP | OK |",
            "|---|---|---|---|---|",
        ]
        for row in sc["points"]:
            lines.append(
                f"| {row['ebn0_db']:g} | {row['mlmp']:.3e} | {row['mbomp']:.3e} | {row['samp']:.3e} | {row['ok']} |"
            )
        lines.append("")
    if "online_se" in r:
        lines += [
            f"## Online SE and extended iterations: {_verdict(r['online_se']['ok'])}",
            "",
            "| Eb/N0 | offline | online | 50 iterations |",
            "|---|---|---|---|",
        ]
        for row in r["online_se"]["points"]:
            lines.append(
                f"| {row['ebn0_db']:g} | {row['offline']:.3e} | {row['online']:.3e} | {row['extended']:.3e} |"
            )
        lines.append("")
    if "se_tracking" in r:
        se = r["se_tracking"]
        lines += [
            "## State-evolution tracking",
            "",
            f"- Every iteration within 10% at 18 dB: {_verdict(se['tracking_ok'])}",
            f"- Fixed point within 8 iterations at 14 dB: {_verdict(se['fixed_point_ok'])}",
        ]
        for label in ("18dB", "14dB"):
            row = se[label]
            gaps = ", ".join(f"{g:.1%}" for g in row["gaps"])
            lines.append(f"- {label}: {row['iterations']} iterations, gaps {gaps}")
        lines.append("")
    if "section_sizes" in r:
        s = r["section_sizes"]
        lines += [
            f"## SAMP: section sizes and dictionary type: {_verdict(s['ok'])}",
            "",
            f"- 4x1024 ahead of 7x64 (MUB) by {_fmt_db(s['large_sections_gain_db'])}",
            "",
            "| Plan | Bits | Eb/N0 MUB | Eb/N0 Gaussian | MUB gain |",
            "|---|---|---|---|---|",
        ]
        for label in ("7x64", "4x1024"):
            row = s[label]
            at = row["ebn0_at_1e-2"]
            lines.append(
                f"| {label} | {row['bits']} | {_fmt_db(at['mub'])} | {_fmt_db(at['gaussian'])} "
                f"| {_fmt_db(row['mub_gain_db'])} |"
            )
        lines.append("")
    return "\n".join(lines)


def main():
    global QUICK
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="Cut Monte Carlo budgets by ~10x.")
    parser.add_argument("--only", nargs="*", choices=sorted(BENCHMARKS), help="Run a subset.")
    args = parser.parse_args()
    QUICK = args.quick

    print("=" * 60)
    print("sparcsim Benchmark Suite")
    print("=" * 60)

    results = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "sparcsim_version": "0.1.0",
        "python_version": platform.python_version(),
        "platform": platform.platform(),
        "quick": QUICK,
        "results": {},
    }
    r = results["results"]
    for name, bench in BENCHMARKS.items():
        if args.only and name not in args.only:
            continue
        r[name] = bench()

    out_json = Path(__file__).parent / "sparcsim_benchmarks.json"
    out_json.write_text(json.dumps(results, indent=2, default=float))
    print(f"\nWrote {out_json}")

    out_md = Path(__file__).parent / "sparcsim_benchmarks_summary.md"
    out_md.write_text(summary_markdown(r))
    print(f"Wrote {out_md}")


if __name__ == "__main__":
    main()
