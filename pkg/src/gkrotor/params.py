"""Physical parameters of a single beta-rotor."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RotorParams:
    """All parameters of one gravity-kicked beta-rotor (hbar = 1).

    tau     : kicking period, tau = 2*pi*l + epsilon
    l       : resonance order (positive integer)
    epsilon : detuning from the quantum resonance
    k       : kick strength
    eta     : momentum gained from gravity per kicking period
    beta    : quasi-momentum in [0, 1)
    """

    tau: float
    l: int
    epsilon: float
    k: float
    eta: float
    beta: float

    def __post_init__(self):
        if self.l < 1 or int(self.l) != self.l:
            raise ValueError(f"l must be a positive integer, got {self.l}")
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must be in [0, 1), got {self.beta}")
        resid = self.tau - TWO_PI * self.l - self.epsilon
        if abs(resid) > 4 * math.ulp(self.tau):
            raise ValueError(
                f"tau - 2*pi*l - epsilon = {resid:g}; use from_tau/resonant constructors"
            )

    @classmethod
    def from_tau(cls, tau, l, k, eta, beta):
        """Build from the kicking period; the detuning is derived exactly."""
        return cls(tau=tau, l=l, epsilon=tau - TWO_PI * l, k=k, eta=eta, beta=beta)

    @classmethod
    def resonant(cls, l, k, eta, beta):
        """Exactly on the quantum resonance tau = 2*pi*l."""
        return cls(tau=TWO_PI * l, l=l, epsilon=0.0, k=k, eta=eta, beta=beta)

    @property
    def k_tilde(self):
        """Rescaled kick strength |epsilon| * k."""
        return abs(self.epsilon) * self.k

    @property
    def sgn_eps(self):
        return -1 if self.epsilon < 0 else 1

    @property
    def is_resonant(self):
        return self.epsilon == 0.0

    @property
    def tau_eta(self):
        return self.tau * self.eta

    def with_k(self, k):
        return replace(self, k=k)

    def with_beta(self, beta):
        return replace(self, beta=beta)
