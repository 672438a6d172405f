"""Command-line entry point: ``nlmaxwell {exponents,simulate,verify-lemmas,front-study}``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .config import ConfigError, ResolvedConfig, parse_config, read_config_text
from .constitutive import ConstitutiveLaw, check_structure_conditions
from .lemmas import run_lemma_suite
from .solver import SolverError, cell_energy, run
from .theorem import ParameterError, derive_exponents, exponents_report, front_bound


@dataclass
class RunConfig:
    command: str
    config: str | None
    out: Path
    overrides: list[str] = field(default_factory=list)
    seed: int = 0


class Emitter:
    """Writes output files, each opening with a columns + config-hash line."""

    def __init__(self, out: Path, sha: str):
        self.out = out
        self.sha = sha
        out.mkdir(parents=True, exist_ok=True)

    def _header(self, columns: str) -> str:
        return f"# columns={columns} config_sha256={self.sha}\n"

    def csv(self, name: str, columns: list[str], rows) -> Path:
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(self._header(",".join(columns)))
            for row in rows:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        return path

    def report(self, name: str, items) -> Path:
        path = self.out / name
        with open(path, "w") as fh:
            fh.write(self._header("key,value"))
            for k, v in items:
                fh.write(f"{k} = {v}\n")
        return path

    def resolved(self, cfg: ResolvedConfig) -> Path:
        path = self.out / "resolved.cfg"
        path.write_text(f"# resolved configuration config_sha256={self.sha}\n" + cfg.render())
        return path


class Summary:
    def __init__(self):
        self.items: list[tuple[str, str]] = []
        self.ok = True

    def add(self, key: str, value, ok: bool | None = None) -> None:
        self.items.append((key, value if isinstance(value, str) else repr(value)))
        if ok is not None:
            self.items.append((f"{key}.ok", repr(bool(ok))))
            self.ok = self.ok and bool(ok)


def _front_rows(trace: dg.FrontTrace, exps, K: float):
    for t, x, l1 in zip(trace.times, trace.front_x, trace.l1):
        yield t, x, l1, front_bound(exps, t, K)


def _l1_checks(summary: Summary, prefix: str, trace: dg.FrontTrace, tol: float) -> None:
    l0 = float(trace.l1[0])
    peak = float(np.max(trace.l1))
    summary.add(f"{prefix}.l1_initial", l0)
    summary.add(f"{prefix}.l1_max", peak, peak <= l0 + tol)


def _simulate_one(cfg: ResolvedConfig, em: Emitter, summary: Summary, exps, prefix: str = "") -> tuple:
    sc = cfg.scenario
    traj, trace = run(sc)
    d = cfg.values["diagnostics"]
    em.csv(f"{prefix}front.csv", ["t", "front_x", "l1", "gamma_bound"], _front_rows(trace, exps, d["front_K"]))
    tag = prefix.rstrip("_") or "run"
    summary.add(f"{tag}.steps", traj.steps)
    _l1_checks(summary, tag, trace, d["l1_tol"])
    return traj, trace


def _snapshots(cfg: ResolvedConfig, em: Emitter, traj) -> None:
    every = cfg.values["run"]["snapshot_every"]
    grid = traj.grid
    picks = [0, len(traj.states) - 1]
    if every > 0:
        picks = sorted(set(range(0, len(traj.states), every)) | set(picks))
    for k in picks:
        st = traj.states[k]
        w = cell_energy(st)
        mesh = grid.center_mesh()
        cols = ["x", "y"][: grid.dim] if grid.dim == 2 else ["x"]
        rows = zip(*(m.ravel() for m in mesh), w.ravel())
        em.csv(f"snapshots/t_{st.time!r}.csv", cols + ["w"], rows)


def _energy(cfg: ResolvedConfig, em: Emitter, summary: Summary, traj, exps) -> None:
    d = cfg.values["diagnostics"]
    md = cfg.medium
    lo, hi = d["energy_s"]
    s_grid = np.linspace(lo, hi, d["energy_points"])
    T = float(traj.times[-1])
    if T <= 0 or len(traj.states) < 2:
        em.csv("energy.csv", ["s", "A", "B", "C", "R", "delta_T"], [])
        return
    rep = dg.local_functionals(traj, s_grid, float(s_grid[1] - s_grid[0]), exps, md.m, md.n, md.p, T=T)
    try:
        s0 = 0.0 if lo <= 0.0 <= hi else float(lo)
        replay = dg.proof_replay(traj, T, d["replay_epsilon"], exps, md.m, md.n, md.p, s_grid=s_grid, s0=s0)
    except dg.HorizonError as exc:
        summary.add("replay", str(exc))
    except dg.DiagnosticsError as exc:
        summary.add("replay", f"skipped: {exc}")
    else:
        rep.delta_T = replay.delta_T
        summary.add("replay.c_fit", replay.c_fit)
        summary.add("replay.H_s0", replay.H_s0)
        summary.add("replay.relation_holds", replay.relation_holds)
        summary.add("replay.predicted_vanishing", replay.predicted_vanishing)
        summary.add("replay.measured_front", replay.measured_front)
    em.csv("energy.csv", ["s", "A", "B", "C", "R", "delta_T"], rep.rows())


def _residual(cfg: ResolvedConfig, summary: Summary, traj, trace) -> None:
    d = cfg.values["diagnostics"]
    if len(traj.states) < 2 or traj.times[-1] <= 0:
        summary.add("residual", "skipped: no time interval")
        return
    cut = dg.CutoffSpec(d["cutoff_s"], d["cutoff_delta"])
    terms = dg.weak_energy_terms(traj, cut)
    half = 0.5 * float(trace.l1[0])
    rel = float(terms.residual / half if half > 0 else terms.residual)
    summary.add("residual.absolute", float(terms.residual))
    summary.add("residual.relative", rel, rel <= d["residual_tol"])


def cmd_exponents(cfg: ResolvedConfig, em: Emitter, summary: Summary) -> None:
    rep = exponents_report(cfg.medium)
    em.report("exponents.report", rep.items())
    summary.add("admissible", rep["admissible"], rep["admissible"] == "true" and "error" not in rep)


def cmd_simulate(cfg: ResolvedConfig, em: Emitter, summary: Summary) -> None:
    exps = derive_exponents(cfg.medium)
    em.report("exponents.report", exponents_report(cfg.medium).items())
    traj, trace = _simulate_one(cfg, em, summary, exps)
    _snapshots(cfg, em, traj)
    _energy(cfg, em, summary, traj, exps)
    _residual(cfg, summary, traj, trace)
    summary.add("t1_horizon", float(exps.T1))
    summary.add("t_end_within_t1", cfg.scenario.t_end <= float(exps.T1))
    law = cfg.scenario.law
    if law.kind == "power_law":
        sr = check_structure_conditions(law, traj.states[-1])
        for k, v in sr.slack.items():
            summary.add(f"structure.{k}.slack", v, v >= -1e-9 * max(1.0, abs(v)))


def cmd_front_study(cfg: ResolvedConfig, em: Emitter, summary: Summary) -> None:
    exps = derive_exponents(cfg.medium)
    d = cfg.values["diagnostics"]
    window = tuple(d["fit_window"])
    _, deg = _simulate_one(cfg, em, summary, exps, prefix="degenerate_")
    baseline = cfg.scenario.with_law(ConstitutiveLaw("constant_test", a_const=0.0, b_const=1.0))
    btraj, base = run(baseline)
    em.csv("baseline_front.csv", ["t", "front_x", "l1", "gamma_bound"], _front_rows(base, exps, d["front_K"]))
    summary.add("baseline.steps", btraj.steps)
    fd = dg.fit_power_law(deg, window)
    fb = dg.fit_power_law(base, window)
    summary.add("degenerate.exponent", fd.exponent, fd.exponent < 0.9)
    summary.add("baseline.exponent", fb.exponent, abs(fb.exponent - 1.0) <= 0.1)
    summary.add("degenerate_below_baseline", fd.exponent < fb.exponent, fd.exponent < fb.exponent)
    env_exp = float(min(exps.alpha_large, exps.kappa))
    env = dg.power_envelope(deg, window, env_exp)
    summary.add("envelope.exponent", env.exponent)
    summary.add("envelope.constant", env.constant)
    summary.add("envelope.max_violation", env.max_violation, env.max_violation <= d["envelope_tol"])


def cmd_verify_lemmas(cfg: ResolvedConfig | None, em: Emitter, summary: Summary, seed: int) -> None:
    res = run_lemma_suite(seed)
    em.report("lemmas.report", res.lines)
    summary.add("lemmas.passed", res.passed, res.passed)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlmaxwell", description=__doc__)
    ap.add_argument("command", choices=["exponents", "simulate", "verify-lemmas", "front-study"])
    ap.add_argument("--config", help="config file or bundled preset name")
    ap.add_argument("--out", default="out", type=Path, help="output directory (default: out)")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                    help="override one config key; repeatable")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized test-function families")
    return ap


def run_command(rc: RunConfig) -> int:
    summary = Summary()
    try:
        cfg = None
        if rc.config is not None:
            cfg = parse_config(read_config_text(rc.config), rc.overrides)
        elif rc.command != "verify-lemmas":
            raise ConfigError(f"{rc.command} needs --config")
        sha = cfg.sha256 if cfg is not None else "none"
        em = Emitter(rc.out, sha)
        if cfg is not None:
            em.resolved(cfg)
        if rc.command == "exponents":
            cmd_exponents(cfg, em, summary)
        elif rc.command == "simulate":
            cmd_simulate(cfg, em, summary)
        elif rc.command == "front-study":
            cmd_front_study(cfg, em, summary)
        else:
            cmd_verify_lemmas(cfg, em, summary, rc.seed)
    except (ConfigError, ParameterError, SolverError, dg.DiagnosticsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    em.report("summary.report", summary.items)
    for k, v in summary.items:
        print(f"{k} = {v}")
    return 0 if summary.ok else 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return run_command(RunConfig(args.command, args.config, args.out, args.overrides, args.seed))


if __name__ == "__main__":
    sys.exit(main())
