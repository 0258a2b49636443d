import sys
import time
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from sparcsim import harness
from sparcsim.bounds import spb_curve
from sparcsim.codec import code_rate
from sparcsim.config import load_sim_config
from sparcsim.dictionary import build_mub_prime, load_dictionary, partition_sections, save_dictionary
from sparcsim.env import default_threads, load_env_defaults
from sparcsim.errors import ConfigError, DictionaryFormatError, NumericalGuardError
from sparcsim.log import logs_file, read_logs, write_log
from sparcsim.ui import PhaseStatus, print_verdict

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@contextmanager
def _exit_codes(console):
    """Map library failures to the documented exit statuses."""
    try:
        yield
    except (ConfigError, DictionaryFormatError) as e:
        console.print(f"[red]{e}[/red]")
        raise SystemExit(EXIT_CONFIG)
    except NumericalGuardError as e:
        console.print(f"[red]Numerical guard tripped: {e}[/red]")
        raise SystemExit(EXIT_NUMERICAL)


def _threads(threads):
    return threads if threads is not None else default_threads()


def _load(config_path, seed=None, max_trials=None):
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if max_trials is not None:
        overrides["max_trials"] = max_trials
    return load_sim_config(config_path, overrides)


def _emit_csv(text, out, console):
    if out:
        Path(out).write_text(text)
        console.print(f"[dim]Wrote {out}[/dim]")
    else:
        click.echo(text, nl=False)


@click.group()
@click.version_option(version="0.1.0")
@click.pass_context
def main(ctx):
    """sparcsim: sparse regression codes over non-coherent SIMO fading."""
    load_env_defaults()
    command = ctx.invoked_subcommand
    if command in (None, "logs", "partition"):
        return
    started = time.time()
    write_log({"event": "run_start", "command": command, "argv": sys.argv[1:]})
    ctx.call_on_close(
        lambda: write_log({"event": "run_end", "command": command, "seconds": round(time.time() - started, 3)})
    )


@main.group("dict")
def dict_group():
    """Build and validate dictionary files."""


@dict_group.command("gen")
@click.option("--p", "p", type=int, required=True, help="Odd prime: N = p rows, p^2 columns.")
@click.option("--sections", type=int, default=1, show_default=True, help="Number of sections K.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Interchange file to write.")
def dict_gen(p, sections, out):
    """Generate a prime-dimension MUB dictionary."""
    console = Console()
    with _exit_codes(console):
        try:
            dictionary = build_mub_prime(p, sections)
        except ValueError as e:
            raise ConfigError(str(e))
        save_dictionary(dictionary, out)
    plan = dictionary.plan
    console.print(
        f"[green]Wrote {out}[/green]  N={dictionary.n_rows} L={dictionary.n_cols} "
        f"K={plan.n_sections} N_b={plan.total_bits} mu={dictionary.coherence:.6g}"
    )


@dict_group.command("check")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def dict_check(path):
    """Re-validate a dictionary file and report its coherence."""
    console = Console()
    with _exit_codes(console):
        with PhaseStatus(console, "building"):
            dictionary = load_dictionary(path)
            mu = dictionary.coherence
    plan = dictionary.plan
    table = Table(title=Path(path).name)
    table.add_column("Field", style="bold")
    table.add_column("Value")
    table.add_row("rows N", str(dictionary.n_rows))
    table.add_row("columns L", str(dictionary.n_cols))
    table.add_row("sections K", str(plan.n_sections))
    table.add_row("section sizes", " ".join(str(s) for s in plan.sizes))
    table.add_row("bits N_b", str(plan.total_bits))
    table.add_row("rate (bpcu)", f"{code_rate(plan, dictionary.n_rows):.4f}")
    table.add_row("coherence", f"{mu:.10f}")
    table.add_row("MUB", "yes" if dictionary.is_mub else "no")
    console.print(table)
    print_verdict(console, "pass", f"{path} is a valid dictionary")


@main.command()
@click.argument("columns", type=int)
@click.argument("sections", type=int)
@click.option("--rows", type=int, default=None, help="Codeword length N, to report the rate.")
def partition(columns, sections, rows):
    """Split COLUMNS into SECTIONS power-of-two sections with the most bits."""
    console = Console()
    try:
        plan = partition_sections(columns, sections)
    except ValueError as e:
        console.print(f"[red]{e}[/red]")
        raise SystemExit(EXIT_CONFIG)
    table = Table(title=f"L={columns}, K={sections}")
    table.add_column("Section", style="bold cyan")
    table.add_column("Size")
    table.add_column("Bits")
    for k, (size, bits) in enumerate(zip(plan.sizes, plan.bits_per_section)):
        table.add_row(str(k), str(size), str(bits))
    console.print(table)
    summary = f"N_b={plan.total_bits}  used={plan.n_used}/{columns}"
    if rows:
        summary += f"  rate={code_rate(plan, rows):.4f} bpcu"
    console.print(summary)


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV file (default: stdout).")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None, help="Also write JSON records.")
@click.option("--threads", type=int, default=None, help="Worker threads (default: SPARCSIM_THREADS or CPUs).")
@click.option("--max-trials", type=int, default=None, help="Override max_trials per point.")
def simulate(config_path, seed, out, json_out, threads, max_trials):
    """Run a BLER sweep described by CONFIG_PATH."""
    console = Console(stderr=out is None)
    with _exit_codes(console):
        cfg = _load(config_path, seed, max_trials)
        with PhaseStatus(console, "building"):
            dictionary = cfg.build_dictionary()
        with PhaseStatus(console, "simulating") as status:
            records = harness.run_bler_sweep(
                cfg,
                threads=_threads(threads),
                progress=status.sweep_progress,
                dictionary=dictionary,
            )

    _emit_csv(harness.write_bler_csv(records), out, console)
    if json_out:
        harness.write_records_json(records, json_out)
    if out:
        table = Table(title=f"BLER: {cfg.config_id}")
        for column in ("Decoder", "Eb/N0", "Trials", "Errors", "BLER", "SER"):
            table.add_column(column)
        for r in records:
            bler = f"{r.bler:.3e}" + (" [yellow]*[/yellow]" if r.low_confidence else "")
            table.add_row(r.decoder, f"{r.ebn0_db:g}", str(r.trials), str(r.block_errors), bler, f"{r.ser:.3e}")
        console.print(table)
    if any(r.low_confidence for r in records):
        floor = harness.LOW_CONFIDENCE_ERRORS
        print_verdict(console, "warning", f"Some points have fewer than {floor} block errors")


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--ebn0", type=float, default=None, help="Eb/N0 in dB (default: first grid point).")
@click.option("--trials", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV file (default: stdout).")
@click.option("--threads", type=int, default=None)
def se(config_path, ebn0, trials, seed, out, threads):
    """Compare state-evolution predictions with empirical SAMP error."""
    console = Console(stderr=out is None)
    with _exit_codes(console):
        cfg = _load(config_path, seed)
        with PhaseStatus(console, "tracing") as status:
            points = harness.run_se_trace(cfg, ebn0_db=ebn0, trials=trials, threads=_threads(threads))
            status.update(f"{len(points)} iterations")
    _emit_csv(harness.write_se_trace_csv(points), out, console)
    judged = harness.judge_se_trace(points)
    verdict = "pass" if judged["tracks"] else "warning"
    print_verdict(
        console,
        verdict,
        f"largest predicted/empirical gap {judged['worst_gap']:.1%} at t={judged['worst_iteration']}",
    )


@main.command()
@click.option("--p", "p_list", type=int, multiple=True, default=(13, 31, 61), show_default=True)
@click.option("--k", "k_list", type=int, multiple=True, help="Section counts (default: 1..bound).")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=None)
def theorem1(p_list, k_list, trials, seed, threads):
    """Noiseless MLMP recovery for every K up to the coherence bound."""
    console = Console()
    with _exit_codes(console):
        try:
            with PhaseStatus(console, "checking"):
                rows = harness.run_theorem1_check(
                    list(p_list), list(k_list) or None, trials, seed, _threads(threads)
                )
        except ValueError as e:
            raise ConfigError(str(e))

    table = Table(title="Noiseless recovery")
    for column in ("p", "K", "bound", "trials", "failures", "result"):
        table.add_column(column)
    failed = False
    for row in rows:
        if not row.within_bound:
            result = "[dim]above bound[/dim]"
        elif row.passed:
            result = "[green]pass[/green]"
        else:
            result = "[red]fail[/red]"
            failed = True
        table.add_row(str(row.p), str(row.K), str(row.bound), str(row.trials), str(row.failures), result)
    console.print(table)
    if failed:
        print_verdict(console, "fail", "Recovery failed inside the guaranteed range")
        raise SystemExit(1)
    print_verdict(console, "pass", "Perfect recovery for every K within the bound")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--n", "n_rows", type=int, default=None, help="Complex codeword length N.")
@click.option("--bits", type=int, default=None, help="Information bits N_b.")
@click.option("--sections", type=int, default=None, help="Sections K (E_s = K).")
@click.option("--antennas", type=int, default=4, show_default=True)
@click.option("--sigma-h-sq", type=float, default=None, help="Default 1/antennas.")
@click.option("--ebn0", "ebn0_grid", type=float, multiple=True, help="Eb/N0 points in dB.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV file (default: stdout).")
def bound(config_path, n_rows, bits, sections, antennas, sigma_h_sq, ebn0_grid, out):
    """Coherent sphere-packing lower bound on BLER."""
    console = Console(stderr=out is None)
    with _exit_codes(console):
        if config_path:
            cfg = load_sim_config(config_path)
            dictionary = cfg.build_dictionary()
            n_rows, bits = dictionary.n_rows, dictionary.plan.total_bits
            sections, antennas, sigma_h_sq = dictionary.n_sections, cfg.antennas, cfg.sigma_h_sq
            ebn0_grid = ebn0_grid or cfg.ebn0_db
        if not (n_rows and bits and sections and ebn0_grid):
            raise ConfigError("bound needs --config or all of --n, --bits, --sections and --ebn0")
        with PhaseStatus(console, "bounding"):
            try:
                curve = spb_curve(n_rows, bits, sections, antennas, ebn0_grid, sigma_h_sq)
            except ValueError as e:
                raise ConfigError(str(e))
    _emit_csv(harness.write_bound_csv(curve), out, console)


@main.command()
@click.option("--limit", "-n", default=20, show_default=True, help="Number of entries to show.")
@click.option("--event", default=None, help="Only show one event type.")
def logs(limit, event):
    """Show the run audit log."""
    console = Console()
    path = logs_file()
    entries = read_logs(path, event)
    if not entries:
        console.print(f"[dim]No logs found in {path}.[/dim]")
        return

    table = Table(title="Run Log")
    table.add_column("Time", style="dim")
    table.add_column("Event", style="bold")
    table.add_column("Config", style="cyan")
    table.add_column("Detail")

    for entry in entries[-limit:]:
        ts = entry.get("timestamp", "")
        if ts:
            try:
                ts = datetime.fromisoformat(ts).strftime("%m-%d %H:%M")
            except ValueError:
                pass
        table.add_row(ts, entry.get("event", ""), str(entry.get("config_id", "")), _log_detail(entry))
    console.print(table)


def _log_detail(entry):
    event = entry.get("event")
    if event == "sweep_point":
        errors = f"{entry.get('block_errors')}/{entry.get('trials')}"
        return f"{entry.get('decoder')} {entry.get('ebn0_db')} dB  {errors}"
    if event == "theorem1":
        status = "[green]pass[/green]" if entry.get("passed") else "[red]fail[/red]"
        return f"p={entry.get('p')} K={entry.get('K')} {status}"
    if event == "se_trace":
        return f"{entry.get('ebn0_db')} dB  {entry.get('iterations')} iterations"
    if event == "run_end":
        return f"{entry.get('command')} {entry.get('seconds')}s"
    return str(entry.get("command", ""))


def cli_main(argv=None):
    """Run the CLI and return its exit status instead of exiting."""
    try:
        rv = main.main(args=argv, prog_name="sparcsim", standalone_mode=False)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else (0 if e.code is None else 1)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    return rv if isinstance(rv, int) else 0
