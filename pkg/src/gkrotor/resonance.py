"""Closed-form dynamics at the quantum resonance tau = 2*pi*l.

Everything here reduces to the quadratic exponential sum

    W_t = sum_{r=0}^{t-1} exp(-i pi l (2 beta + 1) r) exp(-i 2 pi l r eta t + i pi l eta r^2),

which factorizes as W_t = exp(i Phi(t)) * frak_W(t) with
Phi(t) = -pi l (2 beta + 1 + eta t) t and

    frak_W(t) = sum_{r=1}^{t} exp(i pi l (2 beta + 1) r + i pi l eta r^2).

The factorized form is what makes long horizons tractable: frak_W depends on t
only through its upper limit, so the whole series is one cumulative sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

TWO_PI_LD = 2 * np.longdouble("3.141592653589793238462643383279502884")
PI_LD = np.longdouble("3.141592653589793238462643383279502884")

BESSEL_MAX_ORDER = 10 ** 6
BESSEL_MAX_ARG = 1e9


def quadratic_term_phases(eta, l, T):
    """Phases pi*l*eta*r^2 mod 2*pi for r = 1..T, in extended precision."""
    r = np.arange(1, T + 1, dtype=np.longdouble)
    return np.mod(PI_LD * l * np.longdouble(eta) * r * r, TWO_PI_LD)


def linear_term_phases(beta, l, T):
    """Phases pi*l*(2*beta+1)*r mod 2*pi for r = 1..T."""
    r = np.arange(1, T + 1, dtype=np.longdouble)
    return np.mod(PI_LD * l * (2 * np.longdouble(beta) + 1) * r, TWO_PI_LD)


def weyl_cumsum(eta, beta, l, T, quad_phases=None):
    """frak_W(t) for t = 0..T as a complex array (frak_W(0) = 0)."""
    if quad_phases is None:
        quad_phases = quadratic_term_phases(eta, l, T)
    phases = (quad_phases + linear_term_phases(beta, l, T)).astype(np.float64)
    out = np.empty(T + 1, dtype=complex)
    out[0] = 0.0
    np.cumsum(np.exp(1j * phases), out=out[1:])
    return out


@dataclass
class WeylSeries:
    """The sequence W_t and its phase decomposition."""

    eta: float
    beta: float
    l: int
    w: np.ndarray    # W_t of the two-parameter sum, t = 0..T
    phi: np.ndarray  # Phi(eta, beta, t) mod 2*pi

    @property
    def w_abs(self):
        return np.abs(self.w)


def weyl_series(eta, beta, l, T):
    """W_t, |W_t| and the phases Phi for t = 0..T."""
    if T < 1:
        raise ValueError("T must be >= 1")
    frak = weyl_cumsum(eta, beta, l, T)
    t = np.arange(T + 1, dtype=np.longdouble)
    phi = np.mod(-PI_LD * l * (2 * np.longdouble(beta) + 1 + np.longdouble(eta) * t) * t,
                 TWO_PI_LD).astype(np.float64)
    return WeylSeries(eta=eta, beta=beta, l=l, w=np.exp(1j * phi) * frak, phi=phi)


def _block_terms(p, q, beta, l):
    """exp(i pi l ((2 beta + 1) nu + p nu^2 / q)) for nu = 1..2q, quadratic part exact."""
    nu = np.arange(1, 2 * q + 1)
    # l*p*nu^2/q mod 2 reduced with integer arithmetic: exact for any q
    quad = np.array([(l * p * int(v) * int(v)) % (2 * q) for v in nu], dtype=float) / q
    lin = np.mod((2 * np.longdouble(beta) + 1) * l * nu.astype(np.longdouble), 2.0)
    return np.exp(1j * math.pi * (quad + lin.astype(float)))


def rational_decomposition(p, q, beta, l, t):
    """Factor frak_W(eta=p/q, beta, t) = C * B with B of period 2q in t.

    C carries the growth: the geometric sum over complete 2q-blocks of the
    block ratio lambda = exp(4 i pi l beta q), plus the partial-block remainder
    folded in as a fraction of the full-block sum.  When 2*beta*q is an integer
    lambda = 1 and |C| grows linearly in t.
    """
    if q < 1 or math.gcd(p, q) != 1:
        raise ValueError(f"p/q must be in lowest terms with q >= 1, got {p}/{q}")
    if t < 0:
        raise ValueError("t must be >= 0")
    terms = _block_terms(p, q, beta, l)
    full = complex(np.sum(terms))
    nblocks, nu0 = divmod(t, 2 * q)
    partial = complex(np.sum(terms[:nu0]))
    lam_arg = 2 * math.pi * math.fmod(2.0 * l * beta * q, 1.0)
    lam = complex(math.cos(lam_arg), math.sin(lam_arg))
    lam_pow = complex(np.exp(1j * math.fmod(lam_arg * nblocks, 2 * math.pi)))
    if lam == 1.0:
        geo = complex(nblocks)
    else:
        geo = (lam_pow - 1.0) / (lam - 1.0)
    if abs(full) > 1e-9:
        return geo + lam_pow * partial / full, full
    # Degenerate full block: only the partial block survives.
    return lam_pow, partial


def bessel_j(n, x):
    """Bessel function of the first kind, integer order (vectorized in x)."""
    n_arr = np.asarray(n)
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.abs(n_arr) > BESSEL_MAX_ORDER):
        raise ValueError(f"order magnitude exceeds {BESSEL_MAX_ORDER}")
    if np.any(x_arr < 0) or np.any(x_arr > BESSEL_MAX_ARG):
        raise ValueError(f"argument must be in [0, {BESSEL_MAX_ARG:g}]")
    out = special.jv(n_arr, x_arr)
    if np.isscalar(n) and np.isscalar(x):
        return float(out)
    return out


_I_POW = np.array([1, -1j, -1, 1j])  # (-i)^m for m mod 4


def analytic_state(params, n0, t, series: WeylSeries | None = None):
    """Wave function after t kicks at exact resonance, in the momentum basis.

    <n|psi(t)> = exp(i n arg W_t) (-i)^(n0 - n) J_{n0-n}(k |W_t|), up to a
    global phase.  Requires params.epsilon == 0.
    """
    from .rotor import QuantumState, _pow2_at_least

    if params.epsilon != 0.0:
        raise ValueError("analytic_state requires exact resonance (epsilon = 0)")
    if t < 0:
        raise ValueError("t must be >= 0")
    if series is None and t >= 1:
        series = weyl_series(params.eta, params.beta, params.l, t)
    if t == 0:
        w_t = 0.0 + 0.0j
    else:
        w_t = series.w[t]
    arg_w = np.angle(w_t)
    x = params.k * abs(w_t)
    half = max(64, int(x + 40 * (x + 1) ** (1.0 / 3.0) + 60))
    size = _pow2_at_least(2 * half)
    n_min = int(round(n0)) - size // 2
    n = np.arange(n_min, n_min + size)
    m = n0 - n
    amp = np.exp(1j * n * arg_w) * _I_POW[np.mod(m, 4)] * special.jv(m, x)
    return QuantumState(n_min, amp.astype(complex))


def analytic_fidelity(delta_k, w_abs):
    """Single-rotor fidelity J_0(|delta_k| |W_t|)^2 (vectorized in w_abs)."""
    w_abs = np.asarray(w_abs, dtype=float)
    if np.any(w_abs < 0):
        raise ValueError("w_abs must be >= 0")
    out = special.j0(abs(delta_k) * w_abs) ** 2
    return float(out) if out.ndim == 0 else out


def detect_rational(eta, max_denominator=10 ** 6, tol=1e-12):
    """Continued-fraction rationality test.

    Returns (p, q) if a convergent p/q with q <= max_denominator approximates
    eta to |eta - p/q| < tol/q, else None.  The quality factor 1/q keeps
    well-approximable irrationals (golden ratio convergents reach ~1/q^2) from
    being tagged rational while still catching decimal inputs instantly.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    frac = Fraction(eta).limit_denominator(max_denominator)
    p, q = frac.numerator, frac.denominator
    if abs(eta - p / q) < tol / q:
        return p, q
    return None


@dataclass
class RegimeReport:
    """Arithmetic classification of (eta, beta) and the implied fidelity law."""

    eta_class: str            # "rational" | "irrational"
    p: int | None
    q: int | None
    beta_resonant: bool | None
    predicted_law: str        # "log_t_over_t" | "saturation" | "sqrt_decay"
    ensemble_law: str         # "saturation" | "one_over_t"


def classify_regime(eta, beta, *, eta_fraction=None, max_denominator=10 ** 6,
                    tol=1e-12, beta_tol=1e-9):
    """Classify the decay law of the time-averaged fidelity at resonance.

    eta_fraction=(p, q) declares eta rational exactly and bypasses detection.
    """
    if eta_fraction is not None:
        p, q = eta_fraction
        if q < 1 or math.gcd(p, q) != 1:
            raise ValueError("eta_fraction must be coprime with q >= 1")
        rational = (p, q)
    else:
        rational = detect_rational(eta, max_denominator, tol)
    if rational is None:
        return RegimeReport(eta_class="irrational", p=None, q=None,
                            beta_resonant=None, predicted_law="sqrt_decay",
                            ensemble_law="one_over_t")
    p, q = rational
    x = 2 * beta * q
    resonant = abs(x - round(x)) < beta_tol
    law = "log_t_over_t" if resonant else "saturation"
    return RegimeReport(eta_class="rational", p=p, q=q, beta_resonant=resonant,
                        predicted_law=law, ensemble_law="saturation")
