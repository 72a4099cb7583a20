"""Command-line pipeline.

    vibnet analyze    net.json                 -> report.json
    vibnet plan       net.json delta.json      -> plan.json
    vibnet stabilize  net.json                 -> plan.json
    vibnet synthesize net.json plan.json       -> vib.json
    vibnet average    net.json vib.json        -> avg.json
    vibnet simulate   net.json vib.json        -> traj.csv (per epsilon)
    vibnet verify     net.json vib.json        -> verdict.json

Exit codes: 0 ok, 2 bad input, 3 unrealizable / nothing found,
4 numeric non-convergence, 5 verdict failure.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import avg as avgmod
from . import perturb, sim, synth
from .errors import (
    AssumptionViolated,
    NonConvergent,
    NotFound,
    ParseError,
    SingularFundamental,
    Unrealizable,
    ValidationError,
    VibnetError,
)
from .netcore import load_network

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_UNREALIZABLE = 3
EXIT_NUMERIC = 4
EXIT_VERDICT = 5


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    epsilons: list[float] = field(default_factory=lambda: [0.04])
    horizon: float = 10.0
    tol: float = 1e-6
    tmax: float = 1e6
    jobs: int = 1
    seed: int = 0
    out: str | None = None
    budget: int = 20000

    def __post_init__(self):
        for name in ("horizon", "tol", "tmax"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"--{name} must be positive")
        if any(e <= 0 for e in self.epsilons):
            raise ValidationError("--epsilon values must be positive")
        if self.jobs < 1:
            raise ValidationError("--jobs must be at least 1")


def _write_json(doc: dict, out: str | None, default_name: str) -> Path:
    path = Path(out) if out else Path(default_name)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return path


def cmd_analyze(cfg: RunConfig) -> int:
    from .modanalysis import build_report, report_to_dict

    net = load_network(cfg.inputs[0])
    rep = build_report(net)
    path = _write_json(report_to_dict(rep), cfg.out, "report.json")
    print(f"analyze: {len(rep.e_inc)} increasable, {len(rep.e_dec)} decreasable, "
          f"{len(rep.e_ctr)} controllable, {len(rep.e_cre)} creatable -> {path}")
    return EXIT_OK


def cmd_plan(cfg: RunConfig) -> int:
    from .numerics import spectral_abscissa

    net = load_network(cfg.inputs[0])
    pm = perturb.load_perturbation(cfg.inputs[1], net.n)
    clusters = perturb.decompose(net, pm)
    cert = spectral_abscissa(net.a + pm.delta).abscissa
    plan = perturb.StabilizationPlan(delta=pm, clusters=tuple(clusters),
                                     certificate=cert)
    path = _write_json(perturb.plan_summary_dict(plan), cfg.out, "plan.json")
    print(f"plan: {len(clusters)} cluster(s), certificate {cert:+.6g} -> {path}")
    return EXIT_OK


def cmd_stabilize(cfg: RunConfig) -> int:
    net = load_network(cfg.inputs[0])
    plan = perturb.search_stabilizing_delta(net, budget=cfg.budget)
    path = _write_json(perturb.plan_summary_dict(plan), cfg.out, "plan.json")
    print(f"stabilize: {len(plan.clusters)} cluster(s), "
          f"certificate {plan.certificate:+.6g} -> {path}")
    return EXIT_OK


def cmd_synthesize(cfg: RunConfig) -> int:
    net = load_network(cfg.inputs[0])
    try:
        with open(cfg.inputs[1]) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{cfg.inputs[1]}: {exc}") from exc
    plan = perturb.stabilization_plan_from_dict(net, doc)
    vib = synth.compose_plan(net, plan.clusters, epsilon=cfg.epsilons[0])
    path = Path(cfg.out) if cfg.out else Path("vib.json")
    synth.save_plan(vib, path)
    freqs = sorted({round(e.beta, 9) for e in vib.entries})
    print(f"synthesize: {len(vib.entries)} entries, frequencies {freqs} -> {path}")
    return EXIT_OK


def cmd_average(cfg: RunConfig) -> int:
    net = load_network(cfg.inputs[0])
    vib = synth.load_plan(cfg.inputs[1])
    try:
        res = avgmod.averaged_closed_form(net, vib)
    except VibnetError:
        res = avgmod.averaged_numeric(net, vib, tol=cfg.tol, t_max=cfg.tmax)
    path = _write_json(avgmod.averaged_result_to_dict(res), cfg.out, "avg.json")
    changed = ", ".join(f"({d.i},{d.j}) {d.kind}" for d in res.diff) or "none"
    print(f"average[{res.method}]: changes: {changed} -> {path}")
    return EXIT_OK


def _simulate_one(args):
    net_path, vib_doc, eps, horizon = args
    net = load_network(net_path)
    vib = synth.plan_from_dict(vib_doc)
    scaled = synth.VibrationPlan(entries=vib.entries, epsilon=eps,
                                 targets=vib.targets)
    return eps, sim.simulate_full(net, scaled, horizon=horizon)


def cmd_simulate(cfg: RunConfig) -> int:
    net = load_network(cfg.inputs[0])
    vib = synth.load_plan(cfg.inputs[1])
    outdir = Path(cfg.out) if cfg.out else Path(".")
    if outdir.suffix and len(cfg.epsilons) == 1:
        # single run straight to the named file
        traj = sim.simulate_full(net, synth.VibrationPlan(
            entries=vib.entries, epsilon=cfg.epsilons[0], targets=vib.targets),
            horizon=cfg.horizon)
        outdir.parent.mkdir(parents=True, exist_ok=True)
        sim.trajectory_to_csv(traj, outdir)
        print(f"simulate: eps={cfg.epsilons[0]} -> {outdir}")
        return EXIT_OK

    outdir.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg.inputs[0], synth.plan_to_dict(vib), eps, cfg.horizon)
            for eps in cfg.epsilons]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_simulate_one, jobs))
    else:
        results = [_simulate_one(j) for j in jobs]

    paths = []
    for eps, traj in results:
        path = outdir / f"traj_eps{eps:g}.csv"
        sim.trajectory_to_csv(traj, path)
        paths.append(path)

    if len(cfg.epsilons) > 1:
        points = sim.sweep_errors(net, vib, cfg.epsilons, horizon=cfg.horizon)
        with open(outdir / "error_curve.csv", "w") as fh:
            fh.write("epsilon,sup_error\n")
            for eps, err in points:
                fh.write(f"{eps:.12g},{err:.12g}\n")
        _write_gnuplot(outdir, paths)
    print("simulate: " + ", ".join(str(p) for p in paths))
    return EXIT_OK


def _write_gnuplot(outdir: Path, traj_paths: list[Path]) -> None:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 't'",
        "set ylabel 'x'",
    ]
    plots = ", ".join(f"'{p.name}' using 1:2 with lines" for p in traj_paths)
    lines.append(f"plot {plots}")
    lines.append("pause -1")
    (outdir / "plot.gp").write_text("\n".join(lines) + "\n")


def cmd_verify(cfg: RunConfig) -> int:
    net = load_network(cfg.inputs[0])
    vib = synth.load_plan(cfg.inputs[1])
    scaled = synth.VibrationPlan(entries=vib.entries, epsilon=cfg.epsilons[0],
                                 targets=vib.targets)
    opts = sim.SimOptions(horizon=cfg.horizon, avg_tol=cfg.tol)
    v = sim.verdict(net, scaled, opts)
    path = _write_json(sim.verdict_to_dict(v), cfg.out, "verdict.json")
    status = "pass" if (v.abscissa_a_bar < 0 and v.decay_observed) else "fail"
    print(f"verify: abscissa {v.abscissa_a_bar:+.6g}, "
          f"ratio {v.final_over_initial_norm:.4g}, {status} -> {path}")
    return EXIT_OK if status == "pass" else EXIT_VERDICT


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vibnet",
                                 description="vibrational control of network systems")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, n_inputs, names):
        for name in names:
            p.add_argument(name)
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--epsilon", type=float, nargs="+", default=[0.04],
                       help="timescale ratio(s)")
        p.add_argument("--horizon", type=float, default=10.0)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--tmax", type=float, default=1e6)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--budget", type=int, default=20000)

    common(sub.add_parser("analyze"), 1, ["network"])
    common(sub.add_parser("plan"), 2, ["network", "perturbation"])
    common(sub.add_parser("stabilize"), 1, ["network"])
    common(sub.add_parser("synthesize"), 2, ["network", "plan"])
    common(sub.add_parser("average"), 2, ["network", "vibration"])
    common(sub.add_parser("simulate"), 2, ["network", "vibration"])
    common(sub.add_parser("verify"), 2, ["network", "vibration"])
    return ap


_HANDLERS = {
    "analyze": (cmd_analyze, ["network"]),
    "plan": (cmd_plan, ["network", "perturbation"]),
    "stabilize": (cmd_stabilize, ["network"]),
    "synthesize": (cmd_synthesize, ["network", "plan"]),
    "average": (cmd_average, ["network", "vibration"]),
    "simulate": (cmd_simulate, ["network", "vibration"]),
    "verify": (cmd_verify, ["network", "vibration"]),
}


def main(argv=None) -> int:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    handler, arg_names = _HANDLERS[ns.command]
    try:
        cfg = RunConfig(
            command=ns.command,
            inputs=[getattr(ns, name) for name in arg_names],
            epsilons=list(ns.epsilon),
            horizon=ns.horizon,
            tol=ns.tol,
            tmax=ns.tmax,
            jobs=ns.jobs,
            out=ns.out,
            budget=ns.budget,
        )
        return handler(cfg)
    except (ParseError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_BAD_INPUT
    except (Unrealizable, NotFound, AssumptionViolated) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_UNREALIZABLE
    except (NonConvergent, SingularFundamental) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
