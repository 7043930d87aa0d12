"""Weyl-sum oracles (mpmath direct summation), the C*B rational decomposition,
the analytic resonant wave function, and the regime classifier."""
import cmath
import math

import mpmath
import numpy as np
import pytest
from scipy import special

from gkrotor import (
    RotorParams,
    analytic_fidelity,
    analytic_state,
    bessel_j,
    classify_regime,
    plane_wave,
    rational_decomposition,
    weyl_series,
)
from gkrotor.resonance import detect_rational, weyl_cumsum
from gkrotor.rotor import evolve

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def mp_weyl_direct(eta, beta, l, t, dps=40):
    """Direct mpmath evaluation of frak_W(t) = sum_{r=1}^t e^{i pi l ((2b+1) r + eta r^2)}."""
    with mpmath.workdps(dps):
        b = mpmath.mpf(repr(beta))
        e = mpmath.mpf(repr(eta))
        acc = mpmath.mpc(0)
        for r in range(1, t + 1):
            ph = mpmath.pi * l * ((2 * b + 1) * r + e * r * r)
            acc += mpmath.e ** (1j * ph)
        return complex(acc)


@pytest.mark.parametrize("eta,beta,l", [
    (0.1, 0.23, 1), (0.1, 0.5, 1), (GOLDEN, 0.23, 1), (math.pi, 0.5, 2),
])
def test_weyl_cumsum_against_mpmath(eta, beta, l):
    T = 300
    frak = weyl_cumsum(eta, beta, l, T)
    for t in (1, 2, 37, 150, 300):
        assert abs(frak[t] - mp_weyl_direct(eta, beta, l, t)) < 1e-9


def test_weyl_incremental_matches_direct_per_t_sums():
    # the cumulative route must equal an independent per-t summation
    eta, beta, l, T = 0.1, 0.37, 1, 400
    frak = weyl_cumsum(eta, beta, l, T)
    r = np.arange(1, T + 1)
    terms = np.exp(1j * math.pi * l * ((2 * beta + 1) * r + eta * r ** 2))
    for t in (1, 13, 256, 400):
        assert abs(frak[t] - np.sum(terms[:t])) < 1e-9


def test_weyl_series_phase_factorization():
    # W_t = e^{i Phi(t)} frak_W(t) must reproduce the two-parameter sum
    eta, beta, l, T = 0.1, 0.23, 1, 120
    series = weyl_series(eta, beta, l, T)
    for t in (1, 7, 60, 120):
        r = np.arange(t)
        terms = np.exp(-1j * math.pi * l * (2 * beta + 1) * r
                       - 2j * math.pi * l * eta * r * t
                       + 1j * math.pi * l * eta * r ** 2)
        assert abs(series.w[t] - np.sum(terms)) < 1e-9
    assert np.allclose(series.w_abs, np.abs(series.w))


def test_resonant_beta_linear_growth():
    # 2 beta q integer: |W_t| grows linearly
    series = weyl_series(0.1, 0.5, 1, 2000)   # eta = 1/10, q = 10
    t = np.arange(400, 2001)
    slope = np.polyfit(t, series.w_abs[400:], 1)[0]
    assert slope > 0.05
    assert np.corrcoef(t, series.w_abs[400:])[0, 1] > 0.999


def test_generic_beta_bounded():
    series = weyl_series(0.1, 0.23, 1, 10 ** 4)
    assert series.w_abs.max() < 50  # bounded, no secular growth


@pytest.mark.parametrize("p,q,beta,l", [
    (1, 10, 0.23, 1), (1, 10, 0.5, 1), (3, 7, 0.1234, 1), (1, 10, 0.05, 2),
])
def test_rational_decomposition_identity(p, q, beta, l):
    frak = weyl_cumsum(p / q, beta, l, 6 * q + 5)
    for t in (0, 1, q, 2 * q, 2 * q + 3, 4 * q, 6 * q + 5):
        C, B = rational_decomposition(p, q, beta, l, t)
        assert abs(C * B - frak[t]) < 1e-10


def test_rational_decomposition_B_periodicity():
    p, q, beta, l = 1, 10, 0.23, 1
    _, B0 = rational_decomposition(p, q, beta, l, 3)
    _, B1 = rational_decomposition(p, q, beta, l, 3 + 2 * q)
    _, B2 = rational_decomposition(p, q, beta, l, 3 + 6 * q)
    assert abs(B0 - B1) < 1e-12 and abs(B0 - B2) < 1e-12


def test_rational_decomposition_resonant_growth():
    # 2 beta q integer -> lambda = 1 -> |C| grows ~ t / (2q)
    p, q, beta, l = 1, 10, 0.5, 1
    C1, _ = rational_decomposition(p, q, beta, l, 20 * q)
    C2, _ = rational_decomposition(p, q, beta, l, 40 * q)
    assert abs(C2) / abs(C1) == pytest.approx(2.0, rel=1e-6)


def test_rational_decomposition_rejects_non_coprime():
    with pytest.raises(ValueError):
        rational_decomposition(2, 10, 0.23, 1, 5)


def test_bessel_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    with mpmath.workdps(30):
        assert bessel_j(5, 17.3) == pytest.approx(float(mpmath.besselj(5, 17.3)), abs=1e-13)
        assert bessel_j(0, 1e6) == pytest.approx(float(mpmath.besselj(0, 1e6)), abs=1e-10)


def test_bessel_domain_checks():
    with pytest.raises(ValueError):
        bessel_j(10 ** 6 + 1, 1.0)
    with pytest.raises(ValueError):
        bessel_j(0, -1.0)


def test_analytic_state_norm_and_energy_growth():
    p = RotorParams.resonant(1, 0.8 * math.pi, 0.1, 0.5)
    for t in (1, 50, 200):
        s = analytic_state(p, n0=0, t=t)
        assert abs(s.norm - 1.0) < 1e-10


def test_analytic_state_matches_propagation():
    # the closed form must agree with brute-force propagation up to a global phase
    p = RotorParams.resonant(1, 0.8 * math.pi, 0.1, 0.23)
    t_final = 40
    num = evolve(plane_wave(0), p, t_final)
    ana = analytic_state(p, n0=0, t=t_final)
    lo = max(num.n_min, ana.n_min)
    hi = min(num.n_min + num.amp.size, ana.n_min + ana.amp.size)
    a = num.amp[lo - num.n_min:hi - num.n_min]
    b = ana.amp[lo - ana.n_min:hi - ana.n_min]
    ov = np.vdot(b, a)
    assert abs(abs(ov) - 1.0) < 1e-8
    phase = ov / abs(ov)
    assert np.max(np.abs(a - phase * b)) < 1e-8


def test_analytic_fidelity_is_bessel_of_weyl_abs():
    series = weyl_series(0.1, 0.23, 1, 50)
    F = analytic_fidelity(0.1 * math.pi, series.w_abs)
    assert F[0] == 1.0
    assert np.all((0 <= F) & (F <= 1.0 + 1e-12))
    assert F[7] == pytest.approx(special.j0(0.1 * math.pi * series.w_abs[7]) ** 2)


def test_detect_rational_decimal_and_golden():
    assert detect_rational(0.1) == (1, 10)
    assert detect_rational(0.25) == (1, 4)
    assert detect_rational(GOLDEN) is None
    assert detect_rational(math.pi) is None


def test_classify_regime_laws():
    r = classify_regime(0.1, 0.5)
    assert r.eta_class == "rational" and r.beta_resonant
    assert r.predicted_law == "log_t_over_t" and r.ensemble_law == "saturation"

    r = classify_regime(0.1, 0.23)
    assert r.predicted_law == "saturation"

    r = classify_regime(GOLDEN, 0.23)
    assert r.eta_class == "irrational"
    assert r.predicted_law == "sqrt_decay" and r.ensemble_law == "one_over_t"

    r = classify_regime(0.3, 0.123, eta_fraction=(3, 10))
    assert (r.p, r.q) == (3, 10)
