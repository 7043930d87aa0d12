"""Decay fitting (tunneling rates, power laws) and the tunneling-decay ansatz.

The long-time fidelity decay near resonance is modeled by

    F(t) ~ scale * [ mu(A1\\A2) e^{-G1 t} + mu(A2\\A1) e^{-G2 t}
                     + mu(A1&A2) e^{-(G1+G2) t} ]

with island measures mu from the epsilon-classical clouds and tunneling rates
G from exponential fits of the survival probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .epsclassical import OverlapMeasures
from .fidelity import FidelityTrace


@dataclass
class DecayFit:
    model: str              # "exponential" | "power_law"
    rate_or_slope: float    # decay rate (exponential) or log-log slope (power law)
    amplitude: float
    window: tuple
    residual_rms_log: float
    stderr: float = math.nan
    subwindow_spread: float = math.nan
    logcorr_amplitude: float = math.nan   # c in F = c*log(t)/t (power_law only)
    logcorr_residual: float = math.nan


def _fit_window(trace: FidelityTrace, window):
    t0, t1 = window
    if not t0 < t1:
        raise ValueError("window must satisfy t_start < t_end")
    mask = (trace.t >= t0) & (trace.t <= t1)
    t = np.asarray(trace.t, dtype=float)[mask]
    F = trace.F[mask]
    if t.size < 10:
        raise ValueError(f"window {window} holds {t.size} samples; need >= 10")
    if np.any(F <= 0):
        raise ValueError("trace must be strictly positive on the fit window")
    return t, F


def _linfit(x, y):
    coef, res = np.polyfit(x, y, 1), None
    pred = np.polyval(coef, x)
    resid = y - pred
    rms = float(np.sqrt(np.mean(resid ** 2)))
    n = x.size
    denom = np.sum((x - x.mean()) ** 2)
    stderr = float(np.sqrt(np.sum(resid ** 2) / max(n - 2, 1) / denom))
    return coef[0], coef[1], rms, stderr


def _subwindow_spread(x, y, slope_sign=1.0):
    slopes = []
    for part_x, part_y in zip(np.array_split(x, 4), np.array_split(y, 4)):
        if part_x.size >= 3 and np.ptp(part_x) > 0:
            slopes.append(np.polyfit(part_x, part_y, 1)[0])
    return float(np.std(slopes)) if len(slopes) >= 2 else math.nan


def fit_exponential(trace: FidelityTrace, window):
    """Least squares of log F vs t on the window; rate = -slope."""
    t, F = _fit_window(trace, window)
    slope, intercept, rms, stderr = _linfit(t, np.log(F))
    return DecayFit(model="exponential", rate_or_slope=-slope,
                    amplitude=math.exp(intercept), window=tuple(window),
                    residual_rms_log=rms, stderr=stderr,
                    subwindow_spread=_subwindow_spread(t, np.log(F)))


def fit_power_law(trace: FidelityTrace, window):
    """Least squares of log F vs log t; slope returned as-is.

    A log-corrected model F = c*log(t)/t is fitted alongside (amplitude only).
    """
    t, F = _fit_window(trace, window)
    if np.any(t <= 0):
        raise ValueError("power-law window must have t > 0")
    x, y = np.log(t), np.log(F)
    slope, intercept, rms, stderr = _linfit(x, y)
    shape = np.log(np.log(np.maximum(t, 1.0 + 1e-9)) / t)
    logc = float(np.mean(y - shape))
    logcorr_res = float(np.sqrt(np.mean((y - shape - logc) ** 2)))
    return DecayFit(model="power_law", rate_or_slope=slope,
                    amplitude=math.exp(intercept), window=tuple(window),
                    residual_rms_log=rms, stderr=stderr,
                    subwindow_spread=_subwindow_spread(x, y),
                    logcorr_amplitude=math.exp(logc),
                    logcorr_residual=logcorr_res)


@dataclass
class AnsatzModel:
    measures: OverlapMeasures
    gamma1: float
    gamma2: float
    scale: float = 1.0

    def __post_init__(self):
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ValueError("tunneling rates must be > 0")
        if self.scale <= 0:
            raise ValueError("scale must be > 0")


def ansatz_eval(model: AnsatzModel, t):
    """Evaluate the three-exponential tunneling-decay ansatz (vectorized in t)."""
    t = np.asarray(t, dtype=float)
    m = model.measures
    out = model.scale * (m.mu_1_only * np.exp(-model.gamma1 * t)
                         + m.mu_2_only * np.exp(-model.gamma2 * t)
                         + m.mu_both * np.exp(-(model.gamma1 + model.gamma2) * t))
    return float(out) if out.ndim == 0 else out


def calibrate_ansatz(trace: FidelityTrace, model: AnsatzModel, window=(100, 10 ** 4)):
    """Fix the overall scale on the early exponential-decay window; shape untouched."""
    t, F = _fit_window(trace, window)
    base = replace(model, scale=1.0)
    ref = ansatz_eval(base, t)
    if np.any(ref <= 0):
        raise ValueError("ansatz is non-positive on the calibration window")
    scale = math.exp(float(np.mean(np.log(F) - np.log(ref))))
    return replace(model, scale=scale)


def compare(trace: FidelityTrace, model: AnsatzModel, t_range=None,
            transient=100):
    """Log-space residuals between a trace and the ansatz, plus regime slopes.

    When the two rates differ by more than 3x, exponential slopes are fitted
    separately before and after the break at t ~ 1/max(G1, G2) and reported
    for both the trace and the ansatz.
    """
    if t_range is None:
        t_range = (transient, int(trace.t.max()))
    t, F = _fit_window(trace, t_range)
    pred = ansatz_eval(model, t)
    resid = np.log(F) - np.log(pred)
    out = {
        "residual_rms_log": float(np.sqrt(np.mean(resid ** 2))),
        "max_log_deviation": float(np.max(np.abs(resid))),
        "t_range": tuple(t_range),
    }
    g_fast, g_slow = max(model.gamma1, model.gamma2), min(model.gamma1, model.gamma2)
    out["rate_ratio"] = g_fast / g_slow
    if g_fast / g_slow > 3.0:
        t_break = 1.0 / g_fast
        early = (t_range[0], min(t_break, t_range[1]))
        late = (min(3.0 * t_break, t_range[1] / 2), t_range[1])
        regimes = {}
        sub = FidelityTrace(t, F)
        sub_pred = FidelityTrace(t, pred)
        for name, win in (("early", early), ("late", late)):
            try:
                regimes[name] = {
                    "trace_rate": fit_exponential(sub, win).rate_or_slope,
                    "ansatz_rate": fit_exponential(sub_pred, win).rate_or_slope,
                    "window": win,
                }
            except ValueError:
                regimes[name] = None
        out["regimes"] = regimes
        out["two_regime"] = all(r is not None for r in regimes.values())
    else:
        out["regimes"] = None
        out["two_regime"] = False
    return out
