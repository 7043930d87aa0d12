"""The epsilon-classical map, its fixed points, islands, and cloud measures.

Map (on the 2-torus for island work; J unbounded for transport):

    theta' = theta + sgn(eps) * J        (mod 2*pi)
    J'     = J + k_tilde * sin(theta') + sgn(eps) * tau*eta

Note the kick uses the updated angle: the theta update is applied first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .params import RotorParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MapParams:
    k_tilde: float
    tau_eta: float
    sgn_eps: int

    def __post_init__(self):
        if self.sgn_eps not in (-1, 1):
            raise ValueError("sgn_eps must be +1 or -1")
        if self.k_tilde < 0 or self.tau_eta < 0:
            raise ValueError("k_tilde and tau_eta must be >= 0")

    @classmethod
    def from_rotor(cls, params: RotorParams):
        if params.epsilon == 0.0:
            raise ValueError("epsilon-classical map undefined at epsilon = 0")
        return cls(k_tilde=params.k_tilde, tau_eta=params.tau * params.eta,
                   sgn_eps=params.sgn_eps)


class PhasePoint(NamedTuple):
    theta: float
    J: float


def map_step(p, mp: MapParams, wrap_J=False):
    """One iteration; accepts a PhasePoint or (theta, J) arrays."""
    theta, J = p
    theta = np.mod(theta + mp.sgn_eps * J, TWO_PI)
    J = J + mp.k_tilde * np.sin(theta) + mp.sgn_eps * mp.tau_eta
    if wrap_J:
        J = np.mod(J, TWO_PI)
    if np.isscalar(theta) or (isinstance(theta, np.ndarray) and theta.ndim == 0):
        return PhasePoint(float(theta), float(J))
    return theta, J


def fixed_point(mp: MapParams):
    """(theta0, stable) for the J = 0 fixed point, or None if it does not exist."""
    if mp.k_tilde == 0.0:
        if mp.tau_eta == 0.0:
            theta0 = 0.0 if mp.sgn_eps < 0 else math.pi
            return theta0, True
        return None
    ratio = mp.tau_eta / mp.k_tilde
    if ratio > 1.0:
        return None
    # sin(theta0) = -sgn(eps) * ratio on the branch cos(theta0) = -sgn(eps)|cos|
    th = math.asin(ratio) if mp.sgn_eps < 0 else math.pi - math.asin(-ratio)
    theta0 = th % TWO_PI
    stable = mp.k_tilde * abs(math.cos(theta0)) <= 4.0
    return theta0, stable


def tangent_matrix(mp: MapParams, theta0):
    s = mp.sgn_eps
    c = mp.k_tilde * math.cos(theta0)
    return np.array([[1.0, s], [c, 1.0 + s * c]])


def linear_stability(mp: MapParams, theta0):
    """Multipliers (eigenvalue pair) of the tangent map at (theta0, 0)."""
    lam = np.linalg.eigvals(tangent_matrix(mp, theta0))
    return complex(lam[0]), complex(lam[1])


def _wrap_pi(x):
    return np.mod(x + math.pi, TWO_PI) - math.pi


@dataclass
class Island:
    """Stable island around the J = 0 fixed point: polar boundary and area."""

    theta0: float
    stable: bool
    phi: np.ndarray = field(default_factory=lambda: np.empty(0))
    radius: np.ndarray = field(default_factory=lambda: np.empty(0))
    valid: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))
    area: float = 0.0
    status: str = "ok"   # "ok" | "no_fixed_point" | "unstable"

    @property
    def boundary(self):
        return np.column_stack([self.phi, self.radius])

    def contains(self, theta, J):
        """Membership test: polar radius below the boundary envelope in its bin."""
        dth = _wrap_pi(np.asarray(theta) - self.theta0)
        dj = _wrap_pi(np.asarray(J))
        r = np.hypot(dth, dj)
        phi = np.mod(np.arctan2(dj, dth), TWO_PI)
        bins = np.minimum((phi / (TWO_PI / self.phi.size)).astype(int),
                          self.phi.size - 1)
        return r < self.radius[bins]


def half_width_estimate(mp: MapParams, theta0):
    """Linearized (pendulum) half-width of the island in J."""
    return 2.0 * math.sqrt(mp.k_tilde * abs(math.cos(theta0)))


def island_boundary(mp: MapParams, n_traj=8, n_kicks=10 ** 6,
                    d_phi=TWO_PI / 720, *, chunk=4096):
    """Island boundary as the minimum polar-radius envelope of exterior orbits.

    Trajectories are launched on a ring outside the island (twice the
    linearized half-width) plus two points seeded in the stochastic layer of
    the companion saddle at pi - theta0 — in a near-integrable phase space
    that layer hugs the separatrix, so the envelope stays tight even when the
    surrounding chaotic sea is thin.  All orbits are iterated on the 2-torus,
    every visited point is converted to polar coordinates about (theta0, 0)
    and the per-angular-bin minimum radius is kept.  The area is the Riemann
    sum sum(1/2 r_i^2 dphi).  Empty bins are filled by neighbor interpolation
    and flagged invalid.
    """
    fp = fixed_point(mp)
    if fp is None:
        return Island(theta0=math.nan, stable=False, status="no_fixed_point")
    theta0, stable = fp
    if not stable:
        return Island(theta0=theta0, stable=False, status="unstable")
    nbins = max(8, int(round(TWO_PI / d_phi)))
    h = max(half_width_estimate(mp, theta0), 1e-3)
    ring_r = min(2.0 * h, 0.95 * math.pi)
    n_ring = max(n_traj - 2, 1)
    ang = TWO_PI * np.arange(n_ring) / n_ring
    theta = theta0 + ring_r * np.cos(ang)
    J = ring_r * np.sin(ang)
    if n_traj >= 2:
        saddle = math.pi - theta0
        theta = np.concatenate([theta, [saddle - 1e-3, saddle + 1e-3]])
        J = np.concatenate([J, [1e-3, -1e-3]])
    theta = np.mod(theta, TWO_PI)
    J = np.mod(J, TWO_PI)
    rmin = np.full(nbins, np.inf)
    buf_th = np.empty((chunk, theta.size))
    buf_J = np.empty((chunk, theta.size))
    done = 0
    while done < n_kicks:
        m = min(chunk, n_kicks - done)
        for i in range(m):
            theta = np.mod(theta + mp.sgn_eps * J, TWO_PI)
            J = np.mod(J + mp.k_tilde * np.sin(theta) + mp.sgn_eps * mp.tau_eta,
                       TWO_PI)
            buf_th[i] = theta
            buf_J[i] = J
        dth = _wrap_pi(buf_th[:m].ravel() - theta0)
        dj = _wrap_pi(buf_J[:m].ravel())
        r = np.hypot(dth, dj)
        phi = np.mod(np.arctan2(dj, dth), TWO_PI)
        bins = np.minimum((phi / (TWO_PI / nbins)).astype(int), nbins - 1)
        np.minimum.at(rmin, bins, r)
        done += m
    valid = np.isfinite(rmin)
    radius = rmin.copy()
    if not valid.all():
        if not valid.any():
            return Island(theta0=theta0, stable=True, status="no_coverage")
        idx = np.arange(nbins)
        # circular linear interpolation across invalid bins
        radius[~valid] = np.interp(idx[~valid],
                                   np.concatenate([idx[valid], [idx[valid][0] + nbins]]),
                                   np.concatenate([rmin[valid], [rmin[valid][0]]]))
    phi_grid = (np.arange(nbins) + 0.5) * (TWO_PI / nbins)
    area = float(0.5 * np.sum(radius ** 2) * (TWO_PI / nbins))
    return Island(theta0=theta0, stable=True, phi=phi_grid, radius=radius,
                  valid=valid, area=area)


@dataclass
class OverlapMeasures:
    """Phase-space measures of the island difference/intersection sets."""

    mu_1_only: float
    mu_2_only: float
    mu_both: float

    def __post_init__(self):
        for v in (self.mu_1_only, self.mu_2_only, self.mu_both):
            if v < 0:
                raise ValueError("measures must be >= 0")


def _trapped(theta, J, mp, island, n_kicks):
    inside = island.contains(theta, J)
    th, j = theta.copy(), J.copy()
    for _ in range(n_kicks):
        if not inside.any():
            break
        th = np.mod(th + mp.sgn_eps * j, TWO_PI)
        j = np.mod(j + mp.k_tilde * np.sin(th) + mp.sgn_eps * mp.tau_eta, TWO_PI)
        inside &= island.contains(th, j)
    return inside


def cloud_measures(mp1: MapParams, mp2: MapParams, islands, *, n_points=10 ** 4,
                   n_kicks=500, seed=0, center=None, sigma=None):
    """Estimate the measures in the tunneling-decay ansatz from a point cloud.

    A Gaussian cloud is launched around the k1 fixed point; each point is
    propagated independently under both maps and classified as trapped in A1
    and/or A2 (it stays inside the respective boundary envelope for all
    n_kicks).  Measures are importance-weighted counts (weight 1/(N rho)), so
    they carry phase-space-area units comparable with the island areas.
    """
    isl1, isl2 = islands
    if isl1.status != "ok" or isl2.status != "ok":
        raise ValueError("both islands must be resolved before cloud_measures")
    if center is None:
        center = (isl1.theta0, 0.0)
    if sigma is None:
        s = float(np.mean(isl1.radius)) / 3.0
        sigma = (s, s)
    s_th, s_J = sigma
    if s_th <= 0 or s_J <= 0:
        raise ValueError("cloud widths must be > 0")
    rng = np.random.Generator(np.random.Philox(seed))
    theta = np.mod(rng.normal(center[0], s_th, n_points), TWO_PI)
    J = np.mod(rng.normal(center[1], s_J, n_points), TWO_PI)
    dth = _wrap_pi(theta - center[0])
    dj = _wrap_pi(J - center[1])
    rho = (np.exp(-dth ** 2 / (2 * s_th ** 2) - dj ** 2 / (2 * s_J ** 2))
           / (TWO_PI * s_th * s_J))
    weight = 1.0 / (n_points * rho)
    in1 = _trapped(theta, J, mp1, isl1, n_kicks)
    in2 = _trapped(theta, J, mp2, isl2, n_kicks)
    return OverlapMeasures(
        mu_1_only=float(np.sum(weight[in1 & ~in2])),
        mu_2_only=float(np.sum(weight[in2 & ~in1])),
        mu_both=float(np.sum(weight[in1 & in2])),
    )


def phase_portrait(mp: MapParams, n_theta=20, n_J=20, n_kicks=400,
                   max_points=200_000):
    """Visited points of a grid of initial conditions on the 2-torus.

    Returns an (m, 2) array of (theta, J) samples, decimated to max_points.
    """
    th0, J0 = np.meshgrid((np.arange(n_theta) + 0.5) * TWO_PI / n_theta,
                          (np.arange(n_J) + 0.5) * TWO_PI / n_J)
    theta = th0.ravel().copy()
    J = J0.ravel().copy()
    pts = np.empty((n_kicks, theta.size, 2))
    for i in range(n_kicks):
        theta = np.mod(theta + mp.sgn_eps * J, TWO_PI)
        J = np.mod(J + mp.k_tilde * np.sin(theta) + mp.sgn_eps * mp.tau_eta, TWO_PI)
        pts[i, :, 0] = theta
        pts[i, :, 1] = J
    flat = pts.reshape(-1, 2)
    stride = max(1, flat.shape[0] // max_points)
    return flat[::stride]


def mode_velocity(params: RotorParams):
    """Momentum-space velocity -tau*eta/epsilon of the accelerator mode."""
    if params.epsilon == 0.0:
        raise ValueError("mode velocity undefined at epsilon = 0")
    return -params.tau * params.eta / params.epsilon
