"""Run reports: readable text followed by a ``key=value`` trailer."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .config import ScenarioConfig, format_config

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2
EXIT_UNSATISFIED = 3
EXIT_NUMERICAL = 4

TRAILER_MARKER = "# --- machine-readable ---"


@dataclass
class RunReport:
    command: str
    config: ScenarioConfig | None = None
    hypothesis: object = None  # analysis.HypothesisReport
    remark: object = None
    decay: object = None  # analysis.DecayVerification
    dissipation: object = None  # diagnostics.DissipationCheck
    fits: list = field(default_factory=list)
    guaranteed: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    invariant_failures: list = field(default_factory=list)
    message: str = ""
    exit_status: int = EXIT_OK

    def settle_exit_status(self) -> int:
        """Derive the exit code from the contents (numerical > violation > unsatisfied)."""
        if self.exit_status == EXIT_NUMERICAL:
            return self.exit_status
        violated = bool(self.invariant_failures)
        if self.decay is not None and self.decay.status == "violated":
            violated = True
        if self.dissipation is not None and self.dissipation.violations:
            violated = True
        if violated:
            self.exit_status = EXIT_VIOLATION
        elif self.hypothesis is not None and not self.hypothesis.overall:
            self.exit_status = EXIT_UNSATISFIED
        else:
            self.exit_status = EXIT_OK
        return self.exit_status

    def trailer(self) -> dict:
        kv = {"command": self.command, "exit_status": self.exit_status}
        if self.hypothesis is not None:
            h = self.hypothesis
            c = h.constants
            kv["variant"] = h.variant
            kv["hypotheses_satisfied"] = int(h.overall)
            for name in ("T_m", "T_M", "eps0", "eps", "delta_star", "lam", "gamma", "A1", "A2",
                         "Z0_sq", "zc0_norm", "X0", "V0", "phi_far"):
                kv[f"const.{name}"] = getattr(c, name)
            for cond in h.conditions:
                kv[f"slack.{cond.name}"] = cond.slack
        if self.remark is not None:
            kv["remark_satisfied"] = int(self.remark.overall)
            for cond in self.remark.conditions:
                kv[f"remark_slack.{cond.name}"] = cond.slack
        if self.decay is not None:
            kv["decay.status"] = self.decay.status.replace(" ", "_")
            kv["decay.violations"] = len(self.decay.violations)
        if self.dissipation is not None:
            kv["dissipation.status"] = self.dissipation.status
            kv["dissipation.checked"] = self.dissipation.checked
            kv["dissipation.violations"] = len(self.dissipation.violations)
            kv["dissipation.out_of_range"] = len(self.dissipation.out_of_range)
        for fit in self.fits:
            kv[f"fit.{fit.quantity}.rate"] = fit.rate
            kv[f"fit.{fit.quantity}.r_squared"] = fit.r_squared
        for q, rate in self.guaranteed.items():
            kv[f"guaranteed.{q}.rate"] = rate
        for k, v in self.metrics.items():
            kv[k] = v
        kv["invariant_failures"] = len(self.invariant_failures)
        return kv


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".16e")
    return str(v)


def render_report(r: RunReport) -> str:
    out = [f"tcsflock {r.command}"]
    if r.message:
        out.append(r.message)
    if r.config is not None:
        out.append("")
        out.append("configuration:")
        out.extend("  " + line for line in format_config(r.config).splitlines())
    for h in (r.hypothesis, r.remark):
        if h is None:
            continue
        c = h.constants
        out.append("")
        out.append(f"hypotheses ({h.variant}): {'SATISFIED' if h.overall else 'NOT satisfied'}")
        out.append(f"  T_m = {c.T_m:.6f}  T_M = {c.T_M:.6f}  delta* = {c.delta_star:.4f}")
        out.append(f"  lambda = {c.lam:.6g}  gamma = {c.gamma:.6g}  A1 = {c.A1:.6g}  A2 = {c.A2:.6g}")
        out.append(f"  X(0) = {c.X0:.6g}  V(0) = {c.V0:.6g}  |z_c(0)| = {c.zc0_norm:.6g}")
        for cond in h.conditions:
            flag = "ok  " if cond.satisfied else "FAIL"
            extra = f"  [{cond.detail}]" if cond.detail else ""
            out.append(f"  {flag} {cond.name:<24} lhs={cond.lhs:.6g} rhs={cond.rhs:.6g} "
                       f"slack={cond.slack:.6g}{extra}")
    if r.decay is not None:
        out.append("")
        out.append(f"decay envelopes: {r.decay.status} ({len(r.decay.violations)} violations)")
        for v in r.decay.violations[:10]:
            out.append(f"  t={v.t:.4f} {v.quantity}: {v.measured:.6g} > {v.envelope:.6g}")
    if r.dissipation is not None:
        d = r.dissipation
        out.append("")
        out.append(f"dissipative inequality: {d.status}, {d.checked} samples checked, "
                   f"{len(d.violations)} violations, {len(d.out_of_range)} out of range")
        for v in d.violations[:10]:
            out.append(f"  t={v.t:.4f} dL/dt={v.dL_dt:.6g} bound={v.bound:.6g} tol={v.tol:.3g}")
    if r.fits:
        out.append("")
        out.append("decay fits (ln q = -rate t + b):")
        for fit in r.fits:
            g = r.guaranteed.get(fit.quantity)
            gtxt = f"  guaranteed >= {g:.6g}" if g is not None else ""
            out.append(f"  {fit.quantity:<6} rate={fit.rate:.6g} r^2={fit.r_squared:.4f} "
                       f"window=[{fit.window[0]:g}, {fit.window[1]:g}]{gtxt}")
    if r.metrics:
        out.append("")
        out.append("metrics:")
        for k, v in r.metrics.items():
            out.append(f"  {k} = {v:.6g}" if isinstance(v, float) else f"  {k} = {v}")
    if r.invariant_failures:
        out.append("")
        out.append("invariant failures:")
        out.extend(f"  {msg}" for msg in r.invariant_failures)
    out.append("")
    out.append(f"exit status: {r.exit_status}")
    out.append("")
    out.append(TRAILER_MARKER)
    out.extend(f"{k}={_fmt(v)}" for k, v in r.trailer().items())
    return "\n".join(out) + "\n"


def save_report(r: RunReport, path) -> None:
    Path(path).write_text(render_report(r))


def parse_trailer(text: str) -> dict:
    """Read the ``key=value`` trailer back as strings."""
    _, _, tail = text.partition(TRAILER_MARKER)
    out = {}
    for line in tail.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out
