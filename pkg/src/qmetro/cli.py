"""Command-line front end: curve/sweep/figure/estimate runs and validation.

Every run writes a JSON manifest next to its CSV output listing the resolved
configuration, wall-clock time, output paths and validation counters.
Exit codes: 0 success, 1 partial success, 2 configuration error,
3 validation failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .analytic import (
    closed_form_deviation,
    closed_form_expectation_n2,
    evolve_expm,
)
from .config import ConfigError, RunConfig, load_config
from .dynamics import precision_curve
from .metrology import SweepRow, min_deviation, simulate_estimator
from .model import (
    ChannelKind,
    ExperimentConfig,
    NoiseChannel,
    Scheme,
    build_cluster_state,
    build_hamiltonian,
    build_probe_state,
    default_final_time,
    stabilizer,
)
from .pauli import apply_string, variance
from .pauliprop import coefficient_curve

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3

_CURVE_HEADER = "t,expM,dexpM_dchi,deltaM,deltachi_sqrtT,finite"
_SWEEP_HEADER = "gamma,n,scheme,channel,t_min,deltachi_min_sqrtT,epsilon"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _resolve_threads(arg) -> int:
    if arg is not None:
        return max(int(arg), 1)
    env = os.environ.get("QMETRO_THREADS")
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            pass
    return 1


def _write_lines(path: str, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _write_manifest(out: str, command: str, resolved: dict, outputs,
                    t_start: float, counters: dict) -> str:
    path = out + ".manifest.json"
    payload = {
        "command": command,
        "config": resolved,
        "version": __version__,
        "wall_clock_s": time.time() - t_start,
        "outputs": list(outputs),
        "counters": counters,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _resolved_experiment(cfg: ExperimentConfig) -> dict:
    return {
        "n": cfg.n, "chi": cfg.chi, "gamma": cfg.channel.gamma,
        "channel": cfg.channel.kind.value, "scheme": cfg.scheme.value,
        "t_max": cfg.t_max, "samples_per_period": cfg.samples_per_period,
    }


def _curve_rows(curve) -> list[str]:
    rows = [_CURVE_HEADER]
    for k in range(curve.times.size):
        rows.append(",".join([
            _fmt(curve.times[k]), _fmt(curve.expM[k]),
            _fmt(curve.dexpM_dchi[k]), _fmt(curve.deltaM[k]),
            _fmt(curve.deltachi_sqrtT[k]), "1" if curve.finite[k] else "0",
        ]))
    return rows


def cmd_curve(config: RunConfig, out: str, threads: int) -> int:
    t0 = time.time()
    exp = config.experiment()
    curve = coefficient_curve(exp)
    _write_lines(out, _curve_rows(curve))
    counters = {"trace_renormalizations": 0,
                "nonfinite_samples": int((~curve.finite).sum())}
    _write_manifest(out, "curve",
                    dict(_resolved_experiment(exp), threads=threads),
                    [out], t0, counters)
    return EXIT_OK


def _sweep_cells(config: RunConfig):
    kind = ChannelKind(config.get("channel"))
    reference = Scheme(config.get("reference"))
    chi = float(config.get("chi"))
    spp = int(config.get("samples_per_period"))
    t_max = float(config.get("t_max"))
    for gamma in config.gamma_grid():
        for n in config.n_list:
            yield gamma, n, kind, reference, chi, spp, t_max


def _run_sweep_cell(gamma, n, kind, reference, chi, spp, t_max) -> SweepRow:
    window = t_max if t_max > 0 else default_final_time(n)
    channel = NoiseChannel(kind, gamma)
    cluster = coefficient_curve(ExperimentConfig(
        n=n, chi=chi, channel=channel, scheme=Scheme.CLUSTER,
        t_max=window, samples_per_period=spp))
    ref = coefficient_curve(ExperimentConfig(
        n=n, chi=chi, channel=channel, scheme=reference,
        t_max=window, samples_per_period=spp))
    t_c, v_c = min_deviation(cluster, window)
    _, v_r = min_deviation(ref, window)
    return SweepRow(gamma=gamma, n=n, scheme=Scheme.CLUSTER.value,
                    channel=kind.value, t_min_found=t_c,
                    deltachi_min_sqrtT=v_c, epsilon=1.0 - v_c / v_r)


def cmd_sweep(config: RunConfig, out: str, threads: int) -> int:
    t0 = time.time()
    rows = [_SWEEP_HEADER]
    failures = []
    cells = sorted(_sweep_cells(config), key=lambda c: (c[0], c[1]))
    for cell in cells:
        try:
            r = _run_sweep_cell(*cell)
        except Exception as exc:  # per-cell failures recorded, sweep continues
            failures.append({"gamma": cell[0], "n": cell[1], "error": str(exc)})
            continue
        rows.append(",".join([
            _fmt(r.gamma), str(r.n), r.scheme, r.channel,
            _fmt(r.t_min_found), _fmt(r.deltachi_min_sqrtT), _fmt(r.epsilon),
        ]))
    _write_lines(out, rows)
    resolved = {k: config.get(k) for k in
                ("channel", "reference", "chi", "gamma_min", "gamma_max",
                 "points_per_decade", "samples_per_period")}
    resolved["n_list"] = config.n_list
    resolved["threads"] = threads
    counters = {"cells": len(cells), "failed_cells": len(failures),
                "failures": failures}
    _write_manifest(out, "sweep", resolved, [out], t0, counters)
    return EXIT_PARTIAL if failures else EXIT_OK


_FIGURES = {
    # (kind, keys) — parameters straight from the figure captions
    "fig1a": ("curves", {"n": 7, "gamma": 0.05, "channel": "dephasing",
                         "schemes": ["cluster", "ref1-max", "ref1-unc"]}),
    "fig1b": ("sweep", {"channel": "dephasing", "reference": "ref1-max",
                        "n_list": "2,3,4,5,6,7"}),
    "fig2": ("sweep", {"channel": "depolarizing", "reference": "ref1-max",
                       "n_list": "2,4,6"}),
    "fig3a": ("curves", {"n": 7, "gamma": 0.05, "channel": "dephasing",
                         "schemes": ["cluster", "ref2-max", "ref2-unc"]}),
    "fig3b": ("sweep", {"channel": "dephasing", "reference": "ref2-unc",
                        "n_list": "2,3,4,5,6,7"}),
    "fig4a": ("sweep", {"channel": "damping", "reference": "ref2-unc",
                        "n_list": "2,3,4,6"}),
    "fig4b": ("sweep", {"channel": "damping", "reference": "ref2-max",
                        "n_list": "2,3,4,6"}),
}

FIGURE_IDS = tuple(_FIGURES)


def cmd_figure(figure_id: str, out: str, threads: int) -> int:
    if figure_id not in _FIGURES:
        print(f"unknown figure id {figure_id!r}; choose from "
              f"{', '.join(sorted(_FIGURES))}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.time()
    kind, preset = _FIGURES[figure_id]
    if kind == "sweep":
        cfg = RunConfig(values={k: v for k, v in preset.items()},
                        path=f"<preset {figure_id}>")
        return cmd_sweep(cfg, out, threads)
    # curve bundle: one CSV per scheme
    n = preset["n"]
    outputs = []
    nonfinite = 0
    base, ext = os.path.splitext(out)
    for scheme in preset["schemes"]:
        exp = ExperimentConfig(
            n=n, chi=1.0, channel=NoiseChannel(preset["channel"],
                                               preset["gamma"]),
            scheme=scheme, t_max=default_final_time(n))
        curve = coefficient_curve(exp)
        path = f"{base}.{scheme}{ext or '.csv'}"
        _write_lines(path, _curve_rows(curve))
        outputs.append(path)
        nonfinite += int((~curve.finite).sum())
    _write_manifest(out, f"figure {figure_id}",
                    dict(preset, threads=threads), outputs, t0,
                    {"trace_renormalizations": 0,
                     "nonfinite_samples": nonfinite})
    return EXIT_OK


def cmd_estimate(config: RunConfig, out: str, threads: int, nu: int,
                 seed: int, repeats: int) -> int:
    t0 = time.time()
    exp = config.experiment()
    samples, bias, spread = simulate_estimator(exp, nu, seed, repeats=repeats)
    rows = ["index,chi_est"]
    for k, v in enumerate(samples):
        rows.append(f"{k},{_fmt(v)}")
    rows.append(f"mean,{_fmt(float(samples.mean()))}")
    rows.append("spread," + ("" if math.isnan(spread) else _fmt(spread)))
    _write_lines(out, rows)
    resolved = dict(_resolved_experiment(exp), nu=nu, seed=seed,
                    repeats=repeats, threads=threads)
    _write_manifest(out, "estimate", resolved, [out], t0,
                    {"bias": bias,
                     "spread": None if math.isnan(spread) else spread})
    return EXIT_OK


def _validation_checks():
    """Yield (name, max_error, tolerance) for the built-in oracle suite."""
    chi, gamma = 1.0, 0.05
    # integrator vs the two-qubit closed forms and expm propagation
    cfg = ExperimentConfig(n=2, chi=chi, channel=NoiseChannel("dephasing", gamma),
                           scheme="cluster", t_max=50.0)
    curve = precision_curve(cfg)
    err_exp = 0.0
    err_dev = 0.0
    err_expm = 0.0
    for k, t in enumerate(curve.times):
        if t <= 0:
            continue
        err_exp = max(err_exp, abs(curve.expM[k]
                                   - closed_form_expectation_n2(chi, gamma, t)))
        _, em = evolve_expm(chi, gamma, t)
        err_expm = max(err_expm, abs(curve.expM[k] - em))
        if curve.finite[k]:
            ref = closed_form_deviation(2, chi, gamma, t)
            if math.isfinite(ref):
                err_dev = max(err_dev, abs(curve.deltachi_sqrtT[k] - ref))
    yield "integrator vs closed-form <M> (N=2)", err_exp, 1e-6
    yield "integrator vs closed-form deviation (N=2)", err_dev, 1e-6
    yield "integrator vs expm propagation (N=2)", err_expm, 1e-6

    # sensitivity vs central finite difference
    def fd_err(scheme, n):
        base = ExperimentConfig(n=n, chi=chi,
                                channel=NoiseChannel("dephasing", gamma),
                                scheme=scheme, t_max=3.0)
        c0 = coefficient_curve(base)
        h = 1e-5 * chi
        cp = coefficient_curve(ExperimentConfig(
            n=n, chi=chi + h, channel=base.channel, scheme=scheme, t_max=3.0))
        cm = coefficient_curve(ExperimentConfig(
            n=n, chi=chi - h, channel=base.channel, scheme=scheme, t_max=3.0))
        fd = (cp.expM - cm.expM) / (2 * h)
        mask = np.abs(c0.dexpM_dchi) > 1e-3
        return float(np.max(np.abs(fd[mask] - c0.dexpM_dchi[mask])
                            / np.abs(c0.dexpM_dchi[mask])))

    yield "sensitivity vs finite difference (cluster N=3)", fd_err("cluster", 3), 1e-4
    yield "sensitivity vs finite difference (ref1-max N=3)", fd_err("ref1-max", 3), 1e-4

    # stabilizer suite: the cluster state is a +1 eigenstate of every K_i
    worst = 0.0
    for n in range(2, 7):
        base = build_cluster_state(n)
        for i in range(1, n + 1):
            worst = max(worst, float(np.linalg.norm(
                apply_string(stabilizer(i, n), base) - base)))
    yield "stabilizer eigenstate suite", worst, 1e-12

    # channel equivalence: ref1 curves identical under dephasing/depolarizing
    worst = 0.0
    for scheme in ("ref1-max", "ref1-unc"):
        a = coefficient_curve(ExperimentConfig(
            n=3, chi=chi, channel=NoiseChannel("dephasing", gamma),
            scheme=scheme, t_max=10.0))
        b = coefficient_curve(ExperimentConfig(
            n=3, chi=chi, channel=NoiseChannel("depolarizing", gamma),
            scheme=scheme, t_max=10.0))
        worst = max(worst, float(np.max(np.abs(a.expM - b.expM))))
    yield "dephasing/depolarizing equivalence (ref1)", worst, 1e-6

    # damping halves the ref1-max decay rate
    c = coefficient_curve(ExperimentConfig(
        n=3, chi=chi, channel=NoiseChannel("damping", gamma),
        scheme="ref1-max", t_max=10.0))
    model = np.exp(-3 * gamma * c.times / 2) * np.cos(3 * chi * c.times)
    yield "damping half-rate decay (ref1-max)", \
        float(np.max(np.abs(c.expM - model))), 1e-6

    # Cramer-Rao bound at gamma = 0 (pure-state bound)
    worst = 0.0
    for n in (2, 4):
        cfg0 = ExperimentConfig(n=n, chi=chi,
                                channel=NoiseChannel("dephasing", 0.0),
                                scheme="cluster", t_max=5.0)
        cc = coefficient_curve(cfg0)
        psi = build_probe_state("cluster", n)
        h0 = build_hamiltonian("cluster", n, 1.0)
        rho = np.outer(psi, psi.conj())
        dh = math.sqrt(variance(h0, rho))
        for k, t in enumerate(cc.times):
            if cc.finite[k] and t > 0:
                bound = 1.0 / (2.0 * math.sqrt(t) * dh)
                worst = max(worst, bound - cc.deltachi_sqrtT[k])
    yield "Cramer-Rao bound (gamma=0)", worst, 1e-6


def cmd_validate() -> int:
    failed = 0
    for name, err, tol in _validation_checks():
        ok = err < tol
        failed += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'}  {name}: max error {err:.3g} "
              f"(tolerance {tol:g})")
    if failed:
        print(f"{failed} validation check(s) failed")
        return EXIT_VALIDATION
    print("all validation checks passed")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmetro",
                                description="Cluster-state parameter "
                                            "estimation toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key=value config file")
        sp.add_argument("--out", help="output CSV path")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker cap (QMETRO_THREADS as fallback)")
        sp.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")

    common(sub.add_parser("curve", help="per-sample precision curve CSV"))
    common(sub.add_parser("sweep", help="gamma/N improvement sweep CSV"))
    fig = sub.add_parser("figure", help="reproduce a figure dataset")
    fig.add_argument("id", help="fig1a|fig1b|fig2|fig3a|fig3b|fig4a|fig4b")
    common(fig)
    common(sub.add_parser("validate", help="run the oracle validation suite"))
    est = sub.add_parser("estimate", help="estimator Monte Carlo CSV")
    est.add_argument("--nu", type=int, default=10000,
                     help="measurements per estimate")
    est.add_argument("--repeats", type=int, default=1,
                     help="independent estimates to draw")
    common(est)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    threads = _resolve_threads(getattr(args, "threads", None))
    try:
        if args.command == "validate":
            return cmd_validate()
        if args.command == "figure":
            out = args.out or f"{args.id}.csv"
            return cmd_figure(args.id, out, threads)
        if args.config is None:
            print(f"{args.command}: --config is required", file=sys.stderr)
            return EXIT_CONFIG
        config = load_config(args.config)
        out = args.out or f"{args.command}.csv"
        if args.command == "curve":
            return cmd_curve(config, out, threads)
        if args.command == "sweep":
            return cmd_sweep(config, out, threads)
        if args.command == "estimate":
            return cmd_estimate(config, out, threads, args.nu, args.seed,
                                args.repeats)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
