"""Exact one-kick Floquet propagation of a beta-rotor on a truncated momentum lattice.

The one-kick propagator is

    U(t) = exp(-i k cos(theta)) * exp(-i tau/2 (N + beta + eta*t + eta/2)^2)

applied in the momentum basis.  The free part is diagonal; the kick is an
exact cyclic convolution performed on a theta-grid via FFT.  Truncation is
controlled by a tail guard on the outermost lattice sites.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .params import RotorParams

TWO_PI_LD = 2 * np.longdouble("3.141592653589793238462643383279502884")

TAIL_SITES = 8
TAIL_TOL = 1e-12
MAX_SITES = 2 ** 20


class BasisOverflowError(RuntimeError):
    """Momentum window grew past the configured hard cap."""

    def __init__(self, t, size):
        super().__init__(f"basis overflow at kick t={t}: window of {size} sites exceeds cap")
        self.t = t
        self.size = size


class NoAcceleratorModeError(ValueError):
    """The epsilon-classical map has no fixed point (tau*eta > k_tilde)."""


@dataclass
class QuantumState:
    """Complex amplitudes <n|psi> for n = n_min ... n_min + N - 1."""

    n_min: int
    amp: np.ndarray
    absorbed: float = 0.0  # probability removed at window edges (follow policy)

    @property
    def n(self):
        return np.arange(self.n_min, self.n_min + self.amp.size)

    @property
    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amp) ** 2)))

    @property
    def mean_momentum(self):
        p = np.abs(self.amp) ** 2
        return float(np.dot(self.n, p) / np.sum(p))

    def tail_mass(self, sites=TAIL_SITES):
        p = np.abs(self.amp) ** 2
        return float(np.sum(p[:sites]) + np.sum(p[-sites:]))

    def copy(self):
        return QuantumState(self.n_min, self.amp.copy(), self.absorbed)


def _pow2_at_least(n):
    return 1 << max(0, (int(n) - 1).bit_length())


def plane_wave(n0, half_width=128):
    """Plane wave |n0> on a window of power-of-two size centered at n0."""
    size = _pow2_at_least(2 * half_width)
    n_min = int(n0) - size // 2
    amp = np.zeros(size, dtype=complex)
    amp[int(n0) - n_min] = 1.0
    return QuantumState(n_min, amp)


def accelerator_fixed_point_angle(params: RotorParams):
    """Stable fixed-point angle theta0 of the epsilon-classical map.

    Solves sin(theta0) = -sgn(eps) * tau*eta / k_tilde on the branch with
    cos(theta0) = -sgn(eps)*|cos(theta0)|.
    """
    kt = params.k_tilde
    taueta = params.tau * params.eta
    if kt == 0.0 and taueta == 0.0:
        return 0.0 if params.sgn_eps < 0 else math.pi
    if kt == 0.0 or taueta > kt:
        raise NoAcceleratorModeError(
            f"no accelerator mode: tau*eta={taueta:g} > k_tilde={kt:g}"
        )
    s = params.sgn_eps
    th = math.asin(-s * taueta / kt) if s > 0 else math.asin(taueta / kt)
    if s > 0:
        th = math.pi - th
    return th % (2 * math.pi)


def accelerator_center(params: RotorParams, m=0):
    """Momentum-space center n0 of the accelerator mode (J = 0 line)."""
    if params.epsilon == 0.0:
        raise ValueError("accelerator mode undefined at exact resonance (epsilon = 0)")
    return (
        2 * math.pi * m / abs(params.epsilon)
        - (math.pi * params.l + params.tau * (params.beta + params.eta / 2)) / params.epsilon
    )


def gaussian_accelerator_state(params: RotorParams, m=0, sigma2=0.25):
    """Gaussian state centered on the accelerator mode.

    Amplitudes ~ exp(-(n - n0)^2 / (4 sigma^2) - i n theta0), normalized; with
    the <theta|n> = e^{i n theta} convention used by the FFT kick, the minus
    sign places the packet at the map angle +theta0.  Returns (state, theta0, n0).
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    theta0 = accelerator_fixed_point_angle(params)
    n0 = accelerator_center(params, m)
    sigma = math.sqrt(sigma2)
    half = max(128, int(math.ceil(6 * sigma)) + 64)
    size = _pow2_at_least(2 * half)
    n_min = int(round(n0)) - size // 2
    n = np.arange(n_min, n_min + size)
    amp = np.exp(-((n - n0) ** 2) / (4 * sigma2) - 1j * n * theta0)
    amp /= np.linalg.norm(amp)
    return QuantumState(n_min, amp), theta0, n0


@lru_cache(maxsize=64)
def _kick_factor(size, k):
    theta = TWO_PI_LD.astype(float) * np.arange(size) / size
    return np.exp(-1j * k * np.cos(theta))


def _free_phase_factor(n, params: RotorParams, t):
    # Quadratic phase tau/2 (n + beta + eta t + eta/2)^2 reduced mod 2*pi in
    # 80-bit precision: at t ~ 1e5 and |n| ~ 1e5 the raw argument exceeds 1e10,
    # where plain double would lose ~1e-6 rad per kick.
    c = np.longdouble(params.beta) + np.longdouble(params.eta) * t + np.longdouble(params.eta) / 2
    x = n.astype(np.longdouble) + c
    phi = (np.longdouble(params.tau) / 2) * x * x
    phi = np.mod(phi, TWO_PI_LD).astype(np.float64)
    return np.exp(-1j * phi)


def _grow(state: QuantumState, pad):
    size = state.amp.size + 2 * pad
    amp = np.zeros(size, dtype=complex)
    amp[pad:pad + state.amp.size] = state.amp
    return QuantumState(state.n_min - pad, amp, state.absorbed)


def floquet_step(state: QuantumState, params: RotorParams, t, *,
                 max_size=MAX_SITES, tail_tol=TAIL_TOL):
    """Apply the one-kick propagator U(t); the window auto-expands on tail growth."""
    # Pre-expand so the cyclic kick convolution cannot wrap appreciable mass.
    while state.tail_mass() > tail_tol * 1e-3:
        if 2 * state.amp.size > max_size:
            raise BasisOverflowError(t, 2 * state.amp.size)
        state = _grow(state, state.amp.size // 2)
    amp = state.amp * _free_phase_factor(state.n, params, t)
    amp = np.fft.fft(np.fft.ifft(amp) * _kick_factor(amp.size, params.k))
    out = QuantumState(state.n_min, amp, state.absorbed)
    while out.tail_mass() > tail_tol:
        if 2 * out.amp.size > max_size:
            raise BasisOverflowError(t, 2 * out.amp.size)
        out = _grow(out, out.amp.size // 2)
    return out


def evolve(state: QuantumState, params: RotorParams, n_kicks, *, t0=0,
           callback=None, max_size=MAX_SITES):
    """Apply n_kicks Floquet steps starting at kick counter t0.

    callback(t, state) is invoked after each kick with the post-kick state.
    """
    for t in range(t0, t0 + n_kicks):
        state = floquet_step(state, params, t, max_size=max_size)
        if callback is not None:
            callback(t + 1, state)
    return state


@lru_cache(maxsize=8)
def _edge_mask(size, margin):
    mask = np.ones(size)
    ramp = np.sin(0.5 * math.pi * np.arange(1, margin + 1) / margin) ** 2
    mask[:margin] = ramp[::-1]
    mask[-margin:] = ramp
    return mask


class FollowingWindow:
    """Fixed-size momentum window co-moving with the accelerator mode.

    The window is re-centered on round(n0 + v*t) each kick; probability shifted
    out of the window, and probability reaching a smooth absorbing margin at the
    edges, is removed and tallied in state.absorbed.  Intended for long survival
    and fidelity runs where the untrapped part separates from the mode.
    """

    def __init__(self, params: RotorParams, n0, size=2 ** 14, absorb_margin=64):
        if params.epsilon == 0.0:
            raise ValueError("following window requires epsilon != 0")
        self.params = params
        self.n0 = n0
        self.size = size
        self.margin = absorb_margin
        self.v = -params.tau * params.eta / params.epsilon

    def prepare(self, state: QuantumState):
        return self._recenter(state, 0)

    def _recenter(self, state, t):
        center = int(round(self.n0 + self.v * t))
        n_min = center - self.size // 2
        shift = n_min - state.n_min
        amp = np.zeros(self.size, dtype=complex)
        src0 = max(0, shift)
        src1 = min(state.amp.size, shift + self.size)
        if src1 > src0:
            amp[src0 - shift:src1 - shift] = state.amp[src0:src1]
        lost = float(np.sum(np.abs(state.amp) ** 2) - np.sum(np.abs(amp) ** 2))
        return QuantumState(n_min, amp, state.absorbed + max(lost, 0.0))

    def step(self, state: QuantumState, t):
        state = self._recenter(state, t)
        mask = _edge_mask(self.size, self.margin)
        before = float(np.sum(np.abs(state.amp) ** 2))
        amp = state.amp * mask
        after = float(np.sum(np.abs(amp) ** 2))
        state = QuantumState(state.n_min, amp, state.absorbed + before - after)
        amp = state.amp * _free_phase_factor(state.n, self.params, t)
        amp = np.fft.fft(np.fft.ifft(amp) * _kick_factor(self.size, self.params.k))
        return QuantumState(state.n_min, amp, state.absorbed)


def evolve_following(state, params, n_kicks, n0, *, size=2 ** 14,
                     absorb_margin=64, callback=None, t0=0):
    """Evolve with a co-moving absorbing window (see FollowingWindow)."""
    win = FollowingWindow(params, n0, size=size, absorb_margin=absorb_margin)
    state = win.prepare(state)
    for t in range(t0, t0 + n_kicks):
        state = win.step(state, t)
        if callback is not None:
            callback(t + 1, state)
    return state


def mode_velocity(params: RotorParams):
    """Constant momentum-space velocity -tau*eta/epsilon of the accelerator mode."""
    if params.epsilon == 0.0:
        raise ValueError("mode velocity undefined at epsilon = 0")
    return -params.tau * params.eta / params.epsilon


def survival_window(params: RotorParams, t, n0, half_width=15):
    v = mode_velocity(params) if params.epsilon != 0.0 else 0.0
    center = int(round(n0 + v * t))
    return center - half_width, center + half_width


def survival_probability(state: QuantumState, t, params: RotorParams, n0,
                         half_width=15):
    """Probability in the momentum window of given half-width co-moving with the mode."""
    if half_width < 1:
        raise ValueError("half_width must be >= 1")
    lo, hi = survival_window(params, t, n0, half_width)
    a = max(lo, state.n_min) - state.n_min
    b = min(hi, state.n_min + state.amp.size - 1) - state.n_min
    if b < a:
        return 0.0
    return float(np.sum(np.abs(state.amp[a:b + 1]) ** 2))


@dataclass
class ObservableRecord:
    t: int
    mean_momentum: float
    energy: float
    survival: float
    window_clipped: bool = False


def observables(state: QuantumState, t, params: RotorParams, n0=None,
                half_width=15):
    """Mean momentum, energy 1/2 <(N + beta + eta t)^2>, and survival probability."""
    p = np.abs(state.amp) ** 2
    n = state.n
    mean_n = float(np.dot(n, p))
    x = n + params.beta + params.eta * t
    energy = float(0.5 * np.dot(x * x, p))
    if n0 is None:
        n0 = mean_n
        lo, hi = n0 - half_width, n0 + half_width
        clipped = lo < n.min() or hi > n.max()
        surv = float(np.sum(p[(n >= round(lo)) & (n <= round(hi))]))
    else:
        lo, hi = survival_window(params, t, n0, half_width)
        clipped = lo < n.min() or hi > n.max()
        surv = survival_probability(state, t, params, n0, half_width)
    return ObservableRecord(t=t, mean_momentum=mean_n, energy=energy,
                            survival=surv, window_clipped=bool(clipped))
