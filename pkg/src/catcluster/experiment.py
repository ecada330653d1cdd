"""Experimental parameter arithmetic: timings, velocity, regime checks.

Angular frequencies are stored in rad/s throughout; the CLI converts from kHz
with an explicit 2*pi.  Defaults follow circular-Rydberg microwave cavity
practice: vacuum Rabi coupling 2*pi*51 kHz, detuning 40 g, Gaussian waist
6 mm, photon damping 130 ms, atomic radiative time 30 ms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .states import coherent_overlap

DEFAULT_G = 2 * math.pi * 51e3

# velocity window reachable with standard atomic-beam selection
LAB_VELOCITY_RANGE = (20.0, 500.0)


@dataclass(frozen=True)
class CavityParams:
    g: float = DEFAULT_G          # vacuum Rabi coupling, rad/s
    delta: float = 40 * DEFAULT_G  # atom-mode detuning, rad/s
    w: float = 6e-3               # Gaussian waist, m
    t_damp: float = 0.130         # photon damping time, s
    t_atom: float = 0.030         # atomic radiative time, s
    n_bar: float = 4.0            # mean photon number per mode (|alpha|^2)

    def __post_init__(self):
        for name in ("g", "delta", "w", "t_damp", "t_atom"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_bar < 0:
            raise ValueError("n_bar must be nonnegative")


def interaction_time(p: CavityParams, phi: float) -> float:
    """Time to accumulate a kick phase phi: t = phi * delta / g^2."""
    if phi <= 0:
        raise ValueError("phase must be positive")
    return phi * p.delta / p.g**2


def required_velocity(p: CavityParams, t_total_per_cavity: float) -> float:
    """Velocity giving the wanted effective time across a Gaussian mode:
    v = sqrt(pi) * w / t (the Gaussian envelope integrates to sqrt(pi)*w/v)."""
    if t_total_per_cavity <= 0:
        raise ValueError("interaction time must be positive")
    return math.sqrt(math.pi) * p.w / t_total_per_cavity


def velocity_in_lab_range(v: float) -> bool:
    lo, hi = LAB_VELOCITY_RANGE
    return lo <= v <= hi


def total_time(p: CavityParams, kicks: int, phi: float) -> float:
    """Duration of all dispersive kicks; Ramsey zones and flight are neglected."""
    if kicks < 1:
        raise ValueError("at least one kick required")
    return kicks * interaction_time(p, phi)


@dataclass(frozen=True)
class DispersiveReport:
    ratio_sqrt: float    # g * sqrt(n_bar) / delta
    ratio_linear: float  # g * n_bar / delta
    threshold: float
    ok: bool
    convention: str = "n_bar is per mode (= |alpha|^2)"


def dispersive_check(p: CavityParams, threshold: float = 0.1) -> DispersiveReport:
    """Is the coupling weak enough for the phase-kick picture to hold?

    Both dimensionless figures of merit are reported; the pass/fail verdict
    uses g*sqrt(n_bar)/delta against the (configurable) threshold.
    """
    ratio_sqrt = p.g * math.sqrt(p.n_bar) / p.delta
    ratio_linear = p.g * p.n_bar / p.delta
    return DispersiveReport(ratio_sqrt, ratio_linear, threshold, ratio_sqrt <= threshold)


@dataclass(frozen=True)
class BudgetReport:
    tau_over_tdamp: float
    tau_over_tatom: float
    threshold: float
    ok: bool


def budget_check(p: CavityParams, tau: float, threshold: float = 0.05) -> BudgetReport:
    """Is the protocol fast compared with photon damping and atomic decay?"""
    if tau <= 0:
        raise ValueError("protocol duration must be positive")
    r_damp = tau / p.t_damp
    r_atom = tau / p.t_atom
    return BudgetReport(r_damp, r_atom, threshold, r_damp <= threshold and r_atom <= threshold)


def orthogonality_margin(alpha: complex) -> float:
    """|<a|-a>| = exp(-2|a|^2): how distinguishable the two logical labels are."""
    return abs(coherent_overlap(alpha, -complex(alpha)))
