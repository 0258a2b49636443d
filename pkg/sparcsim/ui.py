"""Status lines and verdicts for long simulation phases."""

import time

PHASES = {
    "building": "Building dictionary",
    "simulating": "Simulating",
    "tracing": "Tracing state evolution",
    "checking": "Checking recovery",
    "bounding": "Bounding",
}

VERDICT_STYLES = {"pass": "bold green", "warning": "bold yellow", "fail": "bold red"}


def phase_label(name):
    return PHASES[name]


class PhaseStatus:
    """Spinner with a live detail while a phase runs, one summary line after.

    On a terminal this wraps ``Console.status``; otherwise (pipes, CI logs)
    it prints "Label..." on entry and the elapsed time on exit.
    """

    def __init__(self, console, phase):
        self.console = console
        self.label = phase_label(phase)
        self.detail = ""
        self._status = None
        self._t0 = None

    def __enter__(self):
        self._t0 = time.monotonic()
        if self.console.is_terminal:
            self._status = self.console.status(f"[bold]{self.label}[/bold]")
            self._status.start()
        else:
            self.console.print(f"[bold]{self.label}...[/bold]")
        return self

    def __exit__(self, exc_type, exc, tb):
        if self._status is not None:
            self._status.stop()
        elapsed = time.monotonic() - self._t0
        tail = "failed" if exc_type else self.detail
        suffix = f"  {tail}" if tail else ""
        self.console.print(f"[bold]{self.label}[/bold]  [dim]{elapsed:.1f}s{suffix}[/dim]")
        return False

    def update(self, detail):
        self.detail = detail
        if self._status is not None:
            self._status.update(f"[bold]{self.label}[/bold]  [dim]{detail}[/dim]")

    def sweep_progress(self, point, n_points, ebn0_db, trials):
        """Progress callback for harness.run_bler_sweep."""
        self.update(f"point {point + 1}/{n_points}  {ebn0_db:g} dB  {trials} trials")


def print_verdict(console, verdict, message):
    style = VERDICT_STYLES[verdict]
    console.print(f"[{style}]{verdict.upper()}[/{style}] {message}")
