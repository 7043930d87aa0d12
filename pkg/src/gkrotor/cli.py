"""Command-line frontend: run simulations, persist CSV traces and JSON manifests.

Subcommands cover the analytic resonant fidelity, ensemble averages, full
near-resonant two-branch propagation, survival probabilities, phase-space
tools, the tunneling-decay ansatz pipeline, and canned `reproduce` targets
that regenerate the standard figure datasets at desk scale.

Config files are flat `key = value` text (# comments); command-line flags
override config values.  Every run writes a manifest.json with the resolved
configuration, wall-clock time and output list.  Exit codes: 0 success,
2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .params import RotorParams
from .rotor import (
    BasisOverflowError,
    NoAcceleratorModeError,
    gaussian_accelerator_state,
    plane_wave,
)
from .resonance import weyl_series
from .fidelity import (
    EnsembleSpec,
    coevolve,
    fidelity_ensemble,
    moving_average,
    resonant_fidelity_trace,
    time_average,
)
from .epsclassical import (
    MapParams,
    cloud_measures,
    island_boundary,
    phase_portrait,
)
from .decay import AnsatzModel, ansatz_eval, calibrate_ansatz, compare, fit_exponential

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

MAX_QUANTUM_KICKS = 10 ** 6
MAX_MAP_KICKS = 10 ** 8
DESK_QUANTUM_KICKS = 10 ** 5
DESK_MAP_KICKS = 10 ** 6


class ConfigError(ValueError):
    pass


def parse_config(path):
    """Flat `key = value` file with # comments; values stay strings."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _fmt(x):
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def write_csv(path, header, columns):
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v.item() if hasattr(v, "item") else v) for v in row) + "\n")


class Run:
    """Collects outputs and reductions, then writes the manifest."""

    def __init__(self, outdir, command, config):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.config = config
        self.outputs = []
        self.reductions = []
        self.inputs = {}
        self.t0 = time.time()

    def path(self, name):
        p = self.outdir / name
        self.outputs.append(name)
        return p

    def hash_input(self, path):
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        self.inputs[str(path)] = digest

    def csv(self, name, header, columns):
        write_csv(self.path(name), header, columns)

    def report(self, name, payload):
        with open(self.path(name), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def finish(self):
        manifest = {
            "command": self.command,
            "config": {k: _fmt(v) if isinstance(v, float) else v
                       for k, v in sorted(self.config.items())},
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "reductions": self.reductions,
            "version": __version__,
            "wall_clock_s": round(time.time() - self.t0, 3),
        }
        with open(self.outdir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _cap(run, value, cap, what):
    if value > cap:
        run.reductions.append(f"{what} reduced from {value} to {cap}")
        return cap
    return value


def _resolve_eta(text):
    if text in ("golden", "golden-ratio"):
        return GOLDEN
    if text == "pi":
        return math.pi
    return float(text)


def _rotor_pair(args, *, resonant=False):
    eta = _resolve_eta(args.eta)
    k2 = args.k2 if args.delta_k is None else args.k1 + args.delta_k
    if resonant:
        p1 = RotorParams.resonant(args.l, args.k1, eta, args.beta)
    elif args.epsilon is not None:
        p1 = RotorParams(tau=2 * math.pi * args.l + args.epsilon, l=args.l,
                         epsilon=args.epsilon, k=args.k1, eta=eta, beta=args.beta)
    else:
        p1 = RotorParams.from_tau(args.tau, args.l, args.k1, eta, args.beta)
    return p1, p1.with_k(k2)


def _add_common(sub, *, tau=False, resonant=False, pair=True):
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--l", type=int, default=1)
    sub.add_argument("--eta", default="0.1", help="number, 'golden' or 'pi'")
    sub.add_argument("--beta", type=float, default=0.0)
    if tau:
        sub.add_argument("--tau", type=float)
        sub.add_argument("--epsilon", type=float)
    if pair:
        sub.add_argument("--k1", type=float, default=0.8 * math.pi)
        sub.add_argument("--k2", type=float, default=0.7 * math.pi)
        sub.add_argument("--delta-k", dest="delta_k", type=float,
                         help="overrides --k2 as k1 + delta_k")


def _apply_config(args, parser):
    if getattr(args, "config", None):
        try:
            values = parse_config(args.config)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {exc.filename}")
        known = {a.dest for a in parser._actions}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"unknown config key: {key}")
            # flags given on the command line win over the config file
            if parser.get_default(key) == getattr(args, key):
                setattr(args, key, value)
        for act in parser._actions:
            v = getattr(args, act.dest, None)
            if isinstance(v, str) and act.type in (int, float):
                setattr(args, act.dest, act.type(v))
    return args


# ---------------------------------------------------------------- subcommands

def cmd_resonance_fidelity(args, run):
    p1, p2 = _rotor_pair(args, resonant=True)
    T = _cap(run, args.kicks, MAX_QUANTUM_KICKS, "kicks")
    trace = resonant_fidelity_trace(p1.k, p2.k, p1.eta, p1.beta, p1.l, T)
    avg = time_average(trace)
    w = weyl_series(p1.eta, p1.beta, p1.l, T)
    run.csv("fidelity.csv", ["t_kicks", "fidelity", "time_averaged_fidelity", "weyl_abs"],
            [trace.t[1:], trace.F[1:], avg.F, w.w_abs[1:]])
    run.config.update(tau=p1.tau, eta=p1.eta, k2=p2.k)


def cmd_ensemble_fidelity(args, run):
    p1, p2 = _rotor_pair(args, resonant=True)
    T = _cap(run, args.kicks, MAX_QUANTUM_KICKS, "kicks")
    spec = EnsembleSpec(n_beta=args.n_beta, seed=args.seed,
                        quadrature=args.quadrature)
    trace = fidelity_ensemble(p1, p2, spec, T)
    avg = time_average(trace)
    run.csv("fidelity.csv", ["t_kicks", "ensemble_fidelity", "time_averaged_fidelity"],
            [trace.t[1:], trace.F[1:], avg.F])
    run.config.update(tau=p1.tau, eta=p1.eta, k2=p2.k)


def _initial_state(args, p1):
    if args.plane_n0 is not None:
        return plane_wave(args.plane_n0), None
    state, theta0, n0 = gaussian_accelerator_state(p1, sigma2=args.sigma2)
    return state, n0


def cmd_near_resonance_fidelity(args, run):
    p1, p2 = _rotor_pair(args)
    T = _cap(run, args.kicks, MAX_QUANTUM_KICKS, "kicks")
    state, n0 = _initial_state(args, p1)
    follow = n0 if (args.policy == "follow" and n0 is not None) else None
    out = coevolve(p1, p2, state, T, follow_n0=follow,
                   window_size=args.window_size)
    trace = out["fidelity"]
    smooth = moving_average(trace, args.smooth)
    run.csv("fidelity.csv", ["t_kicks", "fidelity", "smoothed_fidelity"],
            [trace.t, trace.F, smooth.F])
    if "survival_k1" in out:
        run.csv("survival.csv", ["t_kicks", "survival_k1", "survival_k2"],
                [trace.t, out["survival_k1"].F, out["survival_k2"].F])
    run.config.update(tau=p1.tau, eta=p1.eta, k2=p2.k, n0=n0)


def cmd_survival(args, run):
    eta = _resolve_eta(args.eta)
    if args.epsilon is not None:
        p = RotorParams(tau=2 * math.pi * args.l + args.epsilon, l=args.l,
                        epsilon=args.epsilon, k=args.k, eta=eta, beta=args.beta)
    else:
        p = RotorParams.from_tau(args.tau, args.l, args.k, eta, args.beta)
    T = _cap(run, args.kicks, MAX_QUANTUM_KICKS, "kicks")
    state, theta0, n0 = gaussian_accelerator_state(p, sigma2=args.sigma2)
    out = coevolve(p, p.with_k(p.k), state, T, follow_n0=n0,
                   window_size=args.window_size,
                   survival_half_width=args.half_width)
    trace = out["survival_k1"]
    run.csv("survival.csv", ["t_kicks", "survival_probability"],
            [trace.t, trace.F])
    t_lo, t_hi = args.fit_window or (max(500, T // 20), T)
    fit = fit_exponential(trace, (t_lo, t_hi))
    run.report("fit.json", {
        "model": fit.model, "rate": fit.rate_or_slope, "amplitude": fit.amplitude,
        "window": list(fit.window), "residual_rms_log": fit.residual_rms_log,
        "stderr": fit.stderr, "subwindow_spread": fit.subwindow_spread,
    })
    run.config.update(tau=p.tau, eta=p.eta, n0=n0)


def cmd_phase_portrait(args, run):
    if args.k_tilde is not None:
        mp = MapParams(k_tilde=args.k_tilde, tau_eta=args.tau_eta,
                       sgn_eps=args.sgn_eps)
    else:
        eta = _resolve_eta(args.eta)
        mp = MapParams.from_rotor(
            RotorParams.from_tau(args.tau, args.l, args.k, eta, args.beta))
    pts = phase_portrait(mp, n_theta=args.n_theta, n_J=args.n_j,
                         n_kicks=args.kicks)
    run.csv("portrait.csv", ["theta_rad", "J_rad"], [pts[:, 0], pts[:, 1]])
    run.config.update(k_tilde=mp.k_tilde, tau_eta=mp.tau_eta, sgn_eps=mp.sgn_eps)


def cmd_island_area_scan(args, run):
    eta = _resolve_eta(args.eta)
    if args.epsilon is not None:
        tau = 2 * math.pi * args.l + args.epsilon
    else:
        tau, args.epsilon = args.tau, args.tau - 2 * math.pi * args.l
    n_kicks = _cap(run, args.map_kicks, MAX_MAP_KICKS, "map iterations")
    ks = np.linspace(args.k_min, args.k_max, args.n_k)
    rows = {"k": [], "k_tilde": [], "area": [], "invalid_bins": [], "status": []}
    for k in ks:
        p = RotorParams(tau=tau, l=args.l, epsilon=args.epsilon, k=float(k),
                        eta=eta, beta=args.beta)
        isl = island_boundary(MapParams.from_rotor(p), n_kicks=n_kicks,
                              d_phi=args.d_phi)
        rows["k"].append(float(k))
        rows["k_tilde"].append(p.k_tilde)
        rows["area"].append(isl.area)
        rows["invalid_bins"].append(int(isl.valid.size - isl.valid.sum())
                                    if isl.valid.size else -1)
        rows["status"].append(isl.status)
    run.csv("areas.csv", ["k", "k_tilde", "area", "invalid_bins", "status"],
            [rows[c] for c in ("k", "k_tilde", "area", "invalid_bins", "status")])
    run.config.update(tau=tau, eta=eta)


def _islands_and_measures(p1, p2, args, run):
    mp1, mp2 = MapParams.from_rotor(p1), MapParams.from_rotor(p2)
    n_kicks = _cap(run, args.map_kicks, MAX_MAP_KICKS, "map iterations")
    isl1 = island_boundary(mp1, n_kicks=n_kicks)
    isl2 = island_boundary(mp2, n_kicks=n_kicks)
    if isl1.status != "ok" or isl2.status != "ok":
        raise NoAcceleratorModeError(
            f"island estimation failed: {isl1.status} / {isl2.status}")
    measures = cloud_measures(mp1, mp2, (isl1, isl2), n_points=args.n_points,
                              n_kicks=args.cloud_kicks, seed=args.seed)
    return isl1, isl2, measures


def cmd_cloud_measures(args, run):
    p1, p2 = _rotor_pair(args)
    isl1, isl2, m = _islands_and_measures(p1, p2, args, run)
    run.report("measures.json", {
        "area_1": isl1.area, "area_2": isl2.area,
        "mu_1_only": m.mu_1_only, "mu_2_only": m.mu_2_only, "mu_both": m.mu_both,
        "theta0_1": isl1.theta0, "theta0_2": isl2.theta0,
        "seed": args.seed, "n_points": args.n_points,
    })
    run.config.update(tau=p1.tau, eta=p1.eta, k2=p2.k)


def cmd_ansatz_compare(args, run):
    p1, p2 = _rotor_pair(args)
    T = _cap(run, args.kicks, MAX_QUANTUM_KICKS, "kicks")
    state, theta0, n0 = gaussian_accelerator_state(p1, sigma2=args.sigma2)

    # tunneling rates from co-moving-window survival, one branch at a time
    rates = {}
    for tag, p in (("gamma1", p1), ("gamma2", p2)):
        out = coevolve(p, p.with_k(p.k), state.copy(), T, follow_n0=n0,
                       window_size=args.window_size)
        trace = out["survival_k1"]
        fit = fit_exponential(trace, (max(500, T // 20), T))
        rates[tag] = fit.rate_or_slope
        run.csv(f"survival_{tag}.csv", ["t_kicks", "survival_probability"],
                [trace.t, trace.F])

    out = coevolve(p1, p2, state, T)   # lossless: keeps the full basis
    smooth = moving_average(out["fidelity"], args.smooth)

    isl1, isl2, measures = _islands_and_measures(p1, p2, args, run)
    model = AnsatzModel(measures=measures, gamma1=rates["gamma1"],
                        gamma2=rates["gamma2"])
    cal_hi = min(10 ** 4, T)
    model = calibrate_ansatz(smooth, model, window=(100, cal_hi))
    result = compare(smooth, model, t_range=(10 ** 3, T))
    run.csv("fidelity.csv", ["t_kicks", "fidelity", "smoothed_fidelity", "ansatz"],
            [smooth.t, out["fidelity"].F, smooth.F, ansatz_eval(model, smooth.t)])
    result.update(gamma1=rates["gamma1"], gamma2=rates["gamma2"],
                  mu_1_only=measures.mu_1_only, mu_2_only=measures.mu_2_only,
                  mu_both=measures.mu_both, scale=model.scale,
                  area_1=isl1.area, area_2=isl2.area)
    run.report("comparison.json", result)
    run.config.update(tau=p1.tau, eta=p1.eta, k2=p2.k, n0=n0)


# ----------------------------------------------------------------- reproduce

FIG3_BASE = dict(tau=5.86, l=1, eta=0.01579 * 5.86, beta=0.48984326)
FIG5_TAU, FIG5_ETA = 6.6, GOLDEN / 10.0
FIG6_EPS, FIG6_ETA = -0.5, 0.001
FIG6_TAU = 4 * math.pi + FIG6_EPS


def _fig_pair(base_tau, l, eta, beta, k1, k2):
    p1 = RotorParams.from_tau(base_tau, l, k1, eta, beta)
    return p1, p1.with_k(k2)


def _reproduce_resonant_averaged(run, curves, T, l=1, k1=0.8 * math.pi,
                                 k2=0.7 * math.pi):
    cols, names = [], []
    for label, eta, beta in curves:
        trace = resonant_fidelity_trace(k1, k2, eta, beta, l, T)
        avg = time_average(trace)
        if not cols:
            cols.append(avg.t)
            names.append("T_kicks")
        cols.append(avg.F)
        names.append(f"avg_fidelity_{label}")
    run.csv("averaged_fidelity.csv", names, cols)


def _reproduce_fig4_like(run, p1, p2, kicks, smooth=200):
    args = argparse.Namespace(kicks=kicks, sigma2=0.25, window_size=2 ** 13,
                              smooth=smooth, map_kicks=DESK_MAP_KICKS,
                              n_points=10 ** 4, cloud_kicks=500, seed=0)
    ns = argparse.Namespace(**vars(args))
    ns.tau, ns.l, ns.eta = p1.tau, p1.l, str(p1.eta)
    ns.epsilon, ns.beta = None, p1.beta
    ns.k1, ns.k2, ns.delta_k = p1.k, p2.k, None
    cmd_ansatz_compare(ns, run)


def cmd_reproduce(args, run):
    target = args.target
    T = args.kicks
    if target == "fig1a":
        T = _cap(run, T or 10 ** 5, MAX_QUANTUM_KICKS, "kicks")
        _reproduce_resonant_averaged(run, [
            ("beta0.23", 0.1, 0.23), ("beta0.499", 0.1, 0.499),
            ("beta0.5", 0.1, 0.5)], T)
    elif target == "fig1b":
        T = _cap(run, T or 10 ** 6, MAX_QUANTUM_KICKS * 10, "kicks")
        _reproduce_resonant_averaged(run, [
            ("golden_beta0.23", GOLDEN, 0.23), ("pi_beta0.23", math.pi, 0.23),
            ("pi_beta0.5", math.pi, 0.5)], T)
    elif target == "fig2":
        T = _cap(run, T or 10 ** 4, MAX_QUANTUM_KICKS, "kicks")
        cols, names = [], ["T_kicks"]
        first = True
        for label, eta in (("golden", GOLDEN), ("pi", math.pi), ("0.1", 0.1)):
            p1 = RotorParams.resonant(1, 0.8 * math.pi, eta, 0.0)
            trace = fidelity_ensemble(p1, p1.with_k(0.7 * math.pi),
                                      EnsembleSpec(n_beta=args.n_beta, seed=args.seed), T)
            avg = time_average(trace)
            if first:
                cols.append(avg.t)
                first = False
            cols.append(avg.F)
            names.append(f"avg_ensemble_fidelity_eta_{label}")
        run.csv("averaged_fidelity.csv", names, cols)
    elif target == "fig3":
        T = _cap(run, T or 2 * 10 ** 4, MAX_QUANTUM_KICKS, "kicks")
        b = FIG3_BASE
        p1, p2 = _fig_pair(b["tau"], b["l"], b["eta"], b["beta"],
                           0.7 * math.pi, 0.8 * math.pi)
        state, theta0, n0 = gaussian_accelerator_state(p1)
        cols = {}
        for tag, p in (("k1", p1), ("k2", p2)):
            out = coevolve(p, p.with_k(p.k), state.copy(), T, follow_n0=n0,
                           window_size=2 ** 13)
            cols[tag] = out["survival_k1"].F
        fid = coevolve(p1, p2, state, T)["fidelity"]
        run.csv("fig3.csv", ["t_kicks", "survival_k1", "survival_k2", "fidelity"],
                [fid.t, cols["k1"], cols["k2"], fid.F])
    elif target in ("fig4a", "fig4b", "fig4c"):
        k1 = {"fig4a": 0.7, "fig4b": 0.72, "fig4c": 0.83}[target] * math.pi
        b = FIG3_BASE
        p1, p2 = _fig_pair(b["tau"], b["l"], b["eta"], b["beta"], k1, 0.8 * math.pi)
        T = _cap(run, T or 2 * 10 ** 4, MAX_QUANTUM_KICKS, "kicks")
        _reproduce_fig4_like(run, p1, p2, T)
    elif target in ("fig5a", "fig5b"):
        te = FIG5_TAU * FIG5_ETA
        k1 = {"fig5a": 2.0 + te, "fig5b": 3.5 + te}[target]
        p1, p2 = _fig_pair(FIG5_TAU, 1, FIG5_ETA, 0.123456789, k1, 2.5 + te)
        T = _cap(run, T or 2 * 10 ** 4, MAX_QUANTUM_KICKS, "kicks")
        _reproduce_fig4_like(run, p1, p2, T)
    elif target in ("fig6a", "fig6b", "fig6c"):
        te = FIG6_TAU * FIG6_ETA
        scale = {"fig6a": 1.0, "fig6b": 2.0, "fig6c": 2.2}[target]
        k1 = (scale + te) / abs(FIG6_EPS)
        k2 = (1.35 + te) / abs(FIG6_EPS)
        p1, p2 = _fig_pair(FIG6_TAU, 2, FIG6_ETA, 0.123456789, k1, k2)
        T = _cap(run, T or 2 * 10 ** 4, MAX_QUANTUM_KICKS, "kicks")
        _reproduce_fig4_like(run, p1, p2, T)
    elif target == "fig7":
        b = FIG3_BASE
        for tag, (tau, l, eta, k) in {
            "k1_l1": (b["tau"], 1, b["eta"], 0.7 * math.pi),
            "k2_l1": (b["tau"], 1, b["eta"], 0.8 * math.pi),
            "k1_l2": (FIG6_TAU, 2, FIG6_ETA, (2.2 + FIG6_TAU * FIG6_ETA) / 0.5),
            "k2_l2": (FIG6_TAU, 2, FIG6_ETA, (1.35 + FIG6_TAU * FIG6_ETA) / 0.5),
        }.items():
            mp = MapParams.from_rotor(RotorParams.from_tau(tau, l, k, eta, 0.0))
            pts = phase_portrait(mp)
            run.csv(f"portrait_{tag}.csv", ["theta_rad", "J_rad"],
                    [pts[:, 0], pts[:, 1]])
    elif target == "fig8":
        n_kicks = _cap(run, args.map_kicks, MAX_MAP_KICKS, "map iterations")
        sets = {
            "tau5.86": (5.86, 1, 0.01579 * 5.86, 0.55 * math.pi, 1.05 * math.pi),
            "tau6.6": (6.6, 1, GOLDEN / 10.0, 1.2, 4.2),
            "tau4pi": (FIG6_TAU, 2, FIG6_ETA, 2.0, 6.4),
        }
        for tag, (tau, l, eta, k_lo, k_hi) in sets.items():
            ks = np.linspace(k_lo, k_hi, args.n_k)
            areas, status = [], []
            for k in ks:
                p = RotorParams.from_tau(tau, l, float(k), eta, 0.0)
                isl = island_boundary(MapParams.from_rotor(p), n_kicks=n_kicks)
                areas.append(isl.area)
                status.append(isl.status)
            run.csv(f"areas_{tag}.csv", ["k", "area", "status"],
                    [ks, areas, status])
    else:
        raise ConfigError(f"unknown reproduce target: {target}")


# ----------------------------------------------------------------- entrypoint

def build_parser():
    parser = argparse.ArgumentParser(
        prog="gkrotor",
        description="gravity-kicked quantum rotor: fidelity and phase-space tools")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    s = subs.add_parser("resonance-fidelity", help="analytic fidelity at tau = 2*pi*l")
    _add_common(s)
    s.add_argument("--kicks", type=int, default=10 ** 4)
    s.set_defaults(func=cmd_resonance_fidelity)

    s = subs.add_parser("ensemble-fidelity", help="quasi-momentum ensemble at resonance")
    _add_common(s)
    s.add_argument("--kicks", type=int, default=10 ** 4)
    s.add_argument("--n-beta", dest="n_beta", type=int, default=5000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--quadrature", action="store_true")
    s.set_defaults(func=cmd_ensemble_fidelity)

    s = subs.add_parser("near-resonance-fidelity",
                        help="two-branch propagation at tau = 2*pi*l + epsilon")
    _add_common(s, tau=True)
    s.add_argument("--kicks", type=int, default=10 ** 4)
    s.add_argument("--sigma2", type=float, default=0.25)
    s.add_argument("--plane-n0", dest="plane_n0", type=int,
                   help="use a plane-wave initial state instead of the Gaussian")
    s.add_argument("--policy", choices=("grow", "follow"), default="follow")
    s.add_argument("--window-size", dest="window_size", type=int, default=2 ** 13)
    s.add_argument("--smooth", type=int, default=200)
    s.set_defaults(func=cmd_near_resonance_fidelity)

    s = subs.add_parser("survival", help="co-moving-window survival probability")
    _add_common(s, tau=True, pair=False)
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--kicks", type=int, default=2 * 10 ** 4)
    s.add_argument("--sigma2", type=float, default=0.25)
    s.add_argument("--window-size", dest="window_size", type=int, default=2 ** 13)
    s.add_argument("--half-width", dest="half_width", type=int, default=15)
    s.add_argument("--fit-window", dest="fit_window", type=lambda v: tuple(
        int(x) for x in v.split(",")), help="t_start,t_end for the rate fit")
    s.set_defaults(func=cmd_survival)

    s = subs.add_parser("phase-portrait", help="epsilon-classical map portrait")
    _add_common(s, tau=True, pair=False)
    s.add_argument("--k", type=float, default=0.7 * math.pi)
    s.add_argument("--k-tilde", dest="k_tilde", type=float)
    s.add_argument("--tau-eta", dest="tau_eta", type=float, default=0.0)
    s.add_argument("--sgn-eps", dest="sgn_eps", type=int, default=-1)
    s.add_argument("--n-theta", dest="n_theta", type=int, default=20)
    s.add_argument("--n-j", dest="n_j", type=int, default=20)
    s.add_argument("--kicks", type=int, default=400)
    s.set_defaults(func=cmd_phase_portrait)

    s = subs.add_parser("island-area-scan", help="island area vs kick strength")
    _add_common(s, tau=True, pair=False)
    s.add_argument("--k-min", dest="k_min", type=float, default=0.55 * math.pi)
    s.add_argument("--k-max", dest="k_max", type=float, default=1.05 * math.pi)
    s.add_argument("--n-k", dest="n_k", type=int, default=26)
    s.add_argument("--map-kicks", dest="map_kicks", type=int, default=DESK_MAP_KICKS)
    s.add_argument("--d-phi", dest="d_phi", type=float, default=2 * math.pi / 720)
    s.set_defaults(func=cmd_island_area_scan)

    s = subs.add_parser("cloud-measures", help="island overlap measures from a point cloud")
    _add_common(s, tau=True)
    s.add_argument("--map-kicks", dest="map_kicks", type=int, default=DESK_MAP_KICKS)
    s.add_argument("--n-points", dest="n_points", type=int, default=10 ** 4)
    s.add_argument("--cloud-kicks", dest="cloud_kicks", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_cloud_measures)

    s = subs.add_parser("ansatz-compare",
                        help="full tunneling-decay pipeline: rates, measures, comparison")
    _add_common(s, tau=True)
    s.add_argument("--kicks", type=int, default=2 * 10 ** 4)
    s.add_argument("--sigma2", type=float, default=0.25)
    s.add_argument("--window-size", dest="window_size", type=int, default=2 ** 13)
    s.add_argument("--smooth", type=int, default=200)
    s.add_argument("--map-kicks", dest="map_kicks", type=int, default=DESK_MAP_KICKS)
    s.add_argument("--n-points", dest="n_points", type=int, default=10 ** 4)
    s.add_argument("--cloud-kicks", dest="cloud_kicks", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_ansatz_compare)

    s = subs.add_parser("reproduce", help="regenerate a standard figure dataset")
    s.add_argument("target", choices=[
        "fig1a", "fig1b", "fig2", "fig3", "fig4a", "fig4b", "fig4c",
        "fig5a", "fig5b", "fig6a", "fig6b", "fig6c", "fig7", "fig8"])
    s.add_argument("--config")
    s.add_argument("--out", default=".")
    s.add_argument("--kicks", type=int)
    s.add_argument("--n-beta", dest="n_beta", type=int, default=5000)
    s.add_argument("--n-k", dest="n_k", type=int, default=26)
    s.add_argument("--map-kicks", dest="map_kicks", type=int, default=DESK_MAP_KICKS)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = next(p for p in parser._subparsers._group_actions[0].choices.values()
               if p.get_default("func") is args.func)
    try:
        args = _apply_config(args, sub)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    command = [args.subcommand] + (argv if argv is not None else sys.argv[1:])
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func", "config", "out") and v is not None}
    run = Run(args.out, command[0], cfg)
    if getattr(args, "config", None):
        run.hash_input(args.config)
    try:
        args.func(args, run)
    except (ConfigError, NoAcceleratorModeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BasisOverflowError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    run.finish()
    return 0


if __name__ == "__main__":
    sys.exit(main())
