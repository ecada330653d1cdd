"""Truncated photon-number-basis engine, used as an independent oracle.

States live in a dense complex array of shape ``(2, n_max+1, ..., n_max+1)``:
atomic level is the slowest axis (index 0 = g, 1 = e), followed by the modes
in declaration order, row-major.  The dispersive kick is diagonal here, so
both primitives are exact on the truncated space; the only approximation is
the initial coherent-state expansion, whose lost weight is reported as the
truncation residual.

At four modes and n_max = 24 the array holds 2 * 25^4 ~ 7.8e5 amplitudes,
comfortably desk-scale, so storage is dense and unindexed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import AtomicLevel, BranchState
from .protocol import (
    Detect,
    Dispersive,
    ProtocolSpec,
    Ramsey,
    apply_dispersive,
    apply_ramsey,
    detection_probabilities,
    init_state,
    project,
)

DEFAULT_N_MAX = 24  # Poisson tail below 1e-10 for |alpha| <= 2

_SECTOR = {AtomicLevel.G: 0, AtomicLevel.E: 1}


def suggest_n_max(max_abs_label: float) -> int:
    """Rule-of-thumb truncation: n_max >= |a|^2 + 8|a| keeps the tail tiny."""
    a = abs(max_abs_label)
    return max(1, math.ceil(a * a + 8 * a))


@dataclass(frozen=True, eq=False)
class FockState:
    modes: int
    n_max: int
    amps: np.ndarray
    truncation_residual: float = 0.0

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        expect = (2,) + (self.n_max + 1,) * self.modes
        if self.amps.shape != expect:
            raise ValueError(f"amplitude array shape {self.amps.shape}, expected {expect}")

    def total_probability(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


def coherent_amplitudes(label: complex, n_max: int) -> np.ndarray:
    """Number-basis expansion c_n = exp(-|a|^2/2) a^n / sqrt(n!) up to n_max."""
    c = np.empty(n_max + 1, dtype=complex)
    c[0] = math.exp(-0.5 * abs(label) ** 2)
    for n in range(1, n_max + 1):
        c[n] = c[n - 1] * label / math.sqrt(n)
    return c


def to_fock(x: BranchState, n_max: int = DEFAULT_N_MAX, atom: AtomicLevel | None = None) -> FockState:
    """Expand a branch state into the dense number basis.

    Field-only states (post-detection) must name the sector to embed into via
    ``atom``.  The reported residual is ``1 - sum |amp|^2``, meaningful for a
    normalized source state.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if x.has_atom and atom is not None:
        raise ValueError("atom sector is fixed by an atom-carrying state")
    if not x.has_atom and atom is None:
        raise ValueError("field-only state needs an explicit atom sector")
    amps = np.zeros((2,) + (n_max + 1,) * x.modes, dtype=complex)
    for b in x.branches:
        sector = _SECTOR[b.atom if b.atom is not None else atom]
        tensor = np.array(b.coeff, dtype=complex)
        for label in b.labels:
            tensor = np.multiply.outer(tensor, coherent_amplitudes(label, n_max))
        amps[sector] += tensor
    residual = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    return FockState(x.modes, n_max, amps, residual)


def fock_apply_ramsey(x: FockState, theta: float) -> FockState:
    c, s = math.cos(theta), math.sin(theta)
    g, e = x.amps[0], x.amps[1]
    amps = np.stack([c * g + s * e, c * e - s * g])
    return FockState(x.modes, x.n_max, amps, x.truncation_residual)


def fock_apply_dispersive(x: FockState, mode: int, phi: float) -> FockState:
    """Phase exp(-i*phi*(n+1)) on the e sector, exp(+i*phi*n) on the g sector."""
    if not 0 <= mode < x.modes:
        raise ValueError(f"mode index {mode} out of range for {x.modes} modes")
    n = np.arange(x.n_max + 1)
    shape = [1] * x.modes
    shape[mode] = x.n_max + 1
    phase_g = np.exp(1j * phi * n).reshape(shape)
    phase_e = np.exp(-1j * phi * (n + 1)).reshape(shape)
    amps = np.stack([x.amps[0] * phase_g, x.amps[1] * phase_e])
    return FockState(x.modes, x.n_max, amps, x.truncation_residual)


def fock_apply_atomic_phase(x: FockState, level: AtomicLevel, gamma: float) -> FockState:
    amps = x.amps.copy()
    amps[_SECTOR[level]] *= np.exp(1j * gamma)
    return FockState(x.modes, x.n_max, amps, x.truncation_residual)


def fock_inner_product(x: FockState, y: FockState) -> complex:
    if x.modes != y.modes or x.n_max != y.n_max:
        raise ValueError("shape mismatch between Fock states")
    return complex(np.vdot(x.amps, y.amps))


def fock_detection_probabilities(x: FockState) -> tuple[float, float]:
    p_g = float(np.sum(np.abs(x.amps[0]) ** 2))
    p_e = float(np.sum(np.abs(x.amps[1]) ** 2))
    return p_g, p_e


def fock_project(x: FockState, level: AtomicLevel) -> tuple[FockState, float]:
    sector = _SECTOR[level]
    p = float(np.sum(np.abs(x.amps[sector]) ** 2))
    if p <= 0.0:
        raise ValueError(f"zero probability of detecting level {level}")
    amps = np.zeros_like(x.amps)
    amps[sector] = x.amps[sector] / math.sqrt(p)
    return FockState(x.modes, x.n_max, amps, x.truncation_residual), p


@dataclass(frozen=True)
class StepCheck:
    label: str
    fidelity: float
    residual: float


@dataclass(frozen=True)
class CrossCheckReport:
    """Step-by-step agreement between the branch engine and this oracle."""

    steps: tuple[StepCheck, ...]
    min_fidelity: float
    max_residual: float
    probability_deviation: float | None
    truncation_reliable: bool


def _normalized_fidelity(a: FockState, b: FockState) -> float:
    na = a.total_probability()
    nb = b.total_probability()
    if na <= 0.0 or nb <= 0.0:
        return 0.0
    return abs(fock_inner_product(a, b)) ** 2 / (na * nb)


def cross_check(
    spec: ProtocolSpec, n_max: int = DEFAULT_N_MAX, residual_limit: float = 1e-8
) -> CrossCheckReport:
    """Run ``spec`` through both engines in lockstep and compare every stage.

    Per-step fidelity is norm-compensated so that truncation loss shows up in
    the residual column, not as a fake disagreement; a residual beyond
    ``residual_limit`` marks the whole check unreliable rather than failed.
    """
    branch = init_state(spec.atom_init, spec.mode_init)
    fock = to_fock(branch, n_max)
    checks = [StepCheck("init", 1.0, fock.truncation_residual)]
    prob_dev = None
    for step in spec.steps:
        if isinstance(step, Ramsey):
            branch = apply_ramsey(branch, step.theta)
            fock = fock_apply_ramsey(fock, step.theta)
            label = f"ramsey({step.theta:g})"
        elif isinstance(step, Dispersive):
            branch = apply_dispersive(branch, step.mode, step.phi)
            fock = fock_apply_dispersive(fock, step.mode, step.phi)
            label = f"dispersive(mode={step.mode}, phi={step.phi:g})"
        else:
            pg_b, pe_b = detection_probabilities(branch)
            pg_f, pe_f = fock_detection_probabilities(fock)
            prob_dev = max(abs(pg_b - pg_f), abs(pe_b - pe_f))
            branch, _ = project(branch, step.level)
            fock, _ = fock_project(fock, step.level)
            label = f"detect({step.level})"
        if isinstance(step, Detect):
            embedded = to_fock(branch, n_max, atom=step.level)
        else:
            embedded = to_fock(branch, n_max)
        checks.append(StepCheck(label, _normalized_fidelity(fock, embedded), embedded.truncation_residual))
    max_residual = max(c.residual for c in checks)
    return CrossCheckReport(
        steps=tuple(checks),
        min_fidelity=min(c.fidelity for c in checks),
        max_residual=max_residual,
        probability_deviation=prob_dev,
        truncation_reliable=max_residual <= residual_limit,
    )
