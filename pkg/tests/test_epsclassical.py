"""Map properties (symplecticity, fixed points, stability), island boundary
and area estimation, and the cloud overlap measures."""
import math

import numpy as np
import pytest

from gkrotor import (
    Island,
    MapParams,
    RotorParams,
    cloud_measures,
    fixed_point,
    island_boundary,
    linear_stability,
    map_step,
    mode_velocity,
    phase_portrait,
)
from gkrotor.epsclassical import PhasePoint, half_width_estimate, tangent_matrix

FIG_MP1 = MapParams(k_tilde=abs(5.86 - 2 * math.pi) * 0.7 * math.pi,
                    tau_eta=5.86 * 0.01579 * 5.86, sgn_eps=-1)
FIG_MP2 = MapParams(k_tilde=abs(5.86 - 2 * math.pi) * 0.8 * math.pi,
                    tau_eta=5.86 * 0.01579 * 5.86, sgn_eps=-1)


def test_map_step_theta_update_first():
    mp = MapParams(k_tilde=1.3, tau_eta=0.4, sgn_eps=-1)
    p = PhasePoint(0.3, 0.9)
    out = map_step(p, mp)
    theta1 = (0.3 - 0.9) % (2 * math.pi)
    assert out.theta == pytest.approx(theta1)
    assert out.J == pytest.approx(0.9 + 1.3 * math.sin(theta1) - 0.4)


def test_standard_map_limit_fixed_origin():
    mp = MapParams(k_tilde=0.9, tau_eta=0.0, sgn_eps=-1)
    out = map_step(PhasePoint(0.0, 0.0), mp)
    assert out == (0.0, 0.0)


def test_fixed_point_maps_to_itself():
    theta0, stable = fixed_point(FIG_MP1)
    out = map_step(PhasePoint(theta0, 0.0), FIG_MP1)
    assert abs(out.theta - theta0) < 1e-12
    assert abs(out.J) < 1e-12
    assert stable


def test_fixed_point_absent_when_drift_too_strong():
    assert fixed_point(MapParams(k_tilde=0.3, tau_eta=0.5, sgn_eps=-1)) is None


def test_symplecticity_finite_difference():
    mp = MapParams(k_tilde=1.7, tau_eta=0.3, sgn_eps=1)
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(20):
        th, J = rng.uniform(0, 2 * math.pi), rng.uniform(-3, 3)

        def f(x, y):
            t2 = x + mp.sgn_eps * y          # no torus wrap: keep f smooth
            return np.array([t2, y + mp.k_tilde * math.sin(t2) + mp.sgn_eps * mp.tau_eta])

        jac = np.column_stack([(f(th + h, J) - f(th - h, J)) / (2 * h),
                               (f(th, J + h) - f(th, J - h)) / (2 * h)])
        assert abs(np.linalg.det(jac) - 1.0) < 1e-9


def test_tangent_matrix_matches_finite_differences():
    mp = FIG_MP1
    theta0, _ = fixed_point(mp)
    h = 1e-7

    def f(x, y):
        t2 = x + mp.sgn_eps * y
        return np.array([t2, y + mp.k_tilde * math.sin(t2) + mp.sgn_eps * mp.tau_eta])

    jac = np.column_stack([(f(theta0 + h, 0) - f(theta0 - h, 0)) / (2 * h),
                           (f(theta0, h) - f(theta0, -h)) / (2 * h)])
    assert np.max(np.abs(jac - tangent_matrix(mp, theta0))) < 1e-6


def test_stability_iff_unit_circle_multipliers():
    # scan the (k_tilde, tau_eta) plane: the boundary criterion must agree with
    # the multipliers of the tangent map
    for kt in np.linspace(0.2, 6.0, 25):
        for te_frac in (0.0, 0.3, 0.9):
            mp = MapParams(k_tilde=kt, tau_eta=te_frac * kt, sgn_eps=-1)
            fp = fixed_point(mp)
            if fp is None:
                continue
            theta0, stable = fp
            lam1, lam2 = linear_stability(mp, theta0)
            on_circle = abs(abs(lam1) - 1) < 1e-9 and abs(abs(lam2) - 1) < 1e-9
            assert abs(lam1 * lam2 - 1.0) < 1e-9   # symplectic pair
            if abs(kt * abs(math.cos(theta0)) - 4.0) > 1e-6:
                assert stable == on_circle


def test_marginal_and_unstable_multipliers():
    # k_tilde |cos theta0| = 2 -> elliptic, on the unit circle
    mp = MapParams(k_tilde=2.0, tau_eta=0.0, sgn_eps=-1)
    theta0, stable = fixed_point(mp)
    lam1, lam2 = linear_stability(mp, theta0)
    assert stable and abs(abs(lam1) - 1) < 1e-12
    # just past the period-doubling threshold
    mp = MapParams(k_tilde=4.0 + 1e-6, tau_eta=0.0, sgn_eps=-1)
    theta0, stable = fixed_point(mp)
    lam1, lam2 = linear_stability(mp, theta0)
    assert not stable
    assert max(abs(lam1), abs(lam2)) > 1.0 + 1e-7
    # the saddle branch (wrong cosine sign) is always hyperbolic
    lam1, lam2 = linear_stability(MapParams(k_tilde=1.0, tau_eta=0.0, sgn_eps=-1),
                                  math.pi)
    assert max(abs(lam1), abs(lam2)) > 1.0
    assert abs(lam1.imag) < 1e-12 and abs(lam2.imag) < 1e-12


def test_island_absent_without_fixed_point():
    isl = island_boundary(MapParams(k_tilde=0.2, tau_eta=0.4, sgn_eps=-1),
                          n_kicks=1000)
    assert isl.status == "no_fixed_point"
    assert isl.area == 0.0


def test_island_area_harmonic_limit_against_pixel_oracle():
    # small-k standard-map island: compare with brute-force pixel counting
    mp = MapParams(k_tilde=0.5, tau_eta=0.0, sgn_eps=-1)
    isl = island_boundary(mp, n_kicks=2 * 10 ** 5)
    assert isl.status == "ok"

    n = 201
    theta0, _ = fixed_point(mp)
    th = theta0 + np.linspace(-2.2, 2.2, n)
    J = np.linspace(-2.2, 2.2, n)
    TH, JJ = np.meshgrid(th, J)
    th_f, j_f = TH.ravel().copy(), JJ.ravel().copy()
    dev = np.hypot((th_f - theta0 + math.pi) % (2 * math.pi) - math.pi, j_f)
    for _ in range(3000):
        th_f = np.mod(th_f - j_f, 2 * math.pi)
        j_f = j_f + mp.k_tilde * np.sin(th_f)
        r = np.hypot((th_f - theta0 + math.pi) % (2 * math.pi) - math.pi, j_f)
        dev = np.maximum(dev, r)
    # librating pixels keep a bounded polar radius; rotational and chaotic
    # pixels sweep the full angle range and reach r >= pi
    cell = (th[1] - th[0]) * (J[1] - J[0])
    pixel_area = cell * np.sum(dev.reshape(n, n) < math.pi - 0.25)
    assert isl.area == pytest.approx(pixel_area, rel=0.25)


def test_island_boundary_contains_center_not_chaos():
    isl = island_boundary(FIG_MP1, n_kicks=10 ** 5)
    assert isl.status == "ok"
    assert isl.contains(isl.theta0, 0.0)
    assert not isl.contains(isl.theta0 + math.pi, 0.0)
    assert isl.area > 0
    assert isl.boundary.shape == (isl.phi.size, 2)


def test_half_width_estimate_scale():
    mp = MapParams(k_tilde=0.5, tau_eta=0.0, sgn_eps=-1)
    theta0, _ = fixed_point(mp)
    assert half_width_estimate(mp, theta0) == pytest.approx(2 * math.sqrt(0.5))


def test_cloud_measures_identical_maps():
    isl = island_boundary(FIG_MP1, n_kicks=10 ** 5)
    m = cloud_measures(FIG_MP1, FIG_MP1, (isl, isl), n_points=4000, n_kicks=300,
                       seed=1)
    assert m.mu_1_only == 0.0 and m.mu_2_only == 0.0
    assert m.mu_both > 0


def test_cloud_measures_deep_interior():
    isl1 = island_boundary(FIG_MP1, n_kicks=10 ** 5)
    isl2 = island_boundary(FIG_MP2, n_kicks=10 ** 5)
    m = cloud_measures(FIG_MP1, FIG_MP2, (isl1, isl2), n_points=2000,
                       n_kicks=300, seed=0, sigma=(0.05, 0.05))
    # a tiny cloud at the k1 fixed point lies deep inside both islands
    assert m.mu_both > 50 * (m.mu_1_only + m.mu_2_only + 1e-12)


def test_cloud_measures_fig4a_fixture():
    # regression fixture recorded at first computation (seed 0, defaults):
    # the k1 trapped set is engulfed by the k2 trapped set, so mu_1_only
    # vanishes while the displaced-overlap measures stay positive
    isl1 = island_boundary(FIG_MP1, n_kicks=10 ** 5)
    isl2 = island_boundary(FIG_MP2, n_kicks=10 ** 5)
    m = cloud_measures(FIG_MP1, FIG_MP2, (isl1, isl2), seed=0)
    assert m.mu_1_only == 0.0
    assert m.mu_2_only == pytest.approx(0.92, abs=0.25)
    assert m.mu_both == pytest.approx(3.64, abs=0.35)


def test_cloud_measures_rejects_degenerate_cloud():
    isl = island_boundary(FIG_MP1, n_kicks=10 ** 4)
    with pytest.raises(ValueError):
        cloud_measures(FIG_MP1, FIG_MP1, (isl, isl), sigma=(0.0, 0.1))


def test_phase_portrait_k0_horizontal_lines():
    pts = phase_portrait(MapParams(k_tilde=0.0, tau_eta=0.0, sgn_eps=-1),
                         n_theta=4, n_J=4, n_kicks=50)
    J0 = (np.arange(4) + 0.5) * 2 * math.pi / 4
    assert np.all(np.isin(np.round(pts[:, 1], 12), np.round(J0, 12)))


def test_phase_portrait_fig4a_island_visible():
    pts = phase_portrait(FIG_MP1, n_theta=16, n_J=16, n_kicks=200)
    isl = island_boundary(FIG_MP1, n_kicks=10 ** 5)
    # chaotic-grid orbits never enter the island's inner half
    r = np.hypot((pts[:, 0] - isl.theta0 + math.pi) % (2 * math.pi) - math.pi,
                 (pts[:, 1] + math.pi) % (2 * math.pi) - math.pi)
    frac_core = np.mean(r < 0.4 * isl.radius.min())
    assert frac_core < 0.01


def test_mode_velocity_value():
    p = RotorParams.from_tau(5.86, 1, 0.7 * math.pi, 0.01579 * 5.86, 0.48984326)
    assert mode_velocity(p) == pytest.approx(-5.86 * 0.01579 * 5.86 / (5.86 - 2 * math.pi))
    with pytest.raises(ValueError):
        mode_velocity(RotorParams.resonant(1, 1.0, 0.1, 0.0))
