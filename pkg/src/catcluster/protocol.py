"""Protocol primitives and runner for cluster-state generation.

Three operations act on a single two-level atom crossing a chain of cavity
modes prepared in coherent states:

* ``apply_ramsey`` -- classical resonant pulse rotating the atomic levels,
  ``|e> -> cos(t)|e> + sin(t)|g>`` and ``|g> -> cos(t)|g> - sin(t)|e>``;
  a quarter-turn (theta = pi/4) gives the usual balanced pi/2 pulse.

* ``apply_dispersive`` -- far-detuned atom-field interaction with one mode,
  ``exp(-i*phi*(n+1))|e><e| + exp(+i*phi*n)|g><g|``.  On a coherent label it
  acts as a conditional phase-space rotation: an excited atom drags the label
  by ``exp(-i*phi)`` and multiplies the branch coefficient by the same factor;
  a ground atom rotates the label by ``exp(+i*phi)`` with no extra phase.

* ``project`` -- post-selective atomic detection, keeping the field component
  that rode along with the detected level.

``run_protocol`` chains these over a step list; ``ideal_cluster`` builds the
four-term target superpositions the canonical run converges to, normalized by
the exact Gram sum rather than treating ``|a>`` and ``|-a>`` as orthogonal.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .states import (
    AtomicLevel,
    Branch,
    BranchState,
    init_state,
    inner_product,
    merge_branches,
    norm,
    normalize,
)

_NORM_SLACK = 1e-6  # how far from 1 a "normalized" input may drift


@dataclass(frozen=True)
class Ramsey:
    theta: float


@dataclass(frozen=True)
class Dispersive:
    mode: int
    phi: float


@dataclass(frozen=True)
class Detect:
    level: AtomicLevel


ProtocolStep = Ramsey | Dispersive | Detect


@dataclass(frozen=True)
class ProtocolSpec:
    """Initial atom level, initial mode amplitudes, ordered step list.

    A Detect step may appear at most once and only as the final step.
    """

    atom_init: AtomicLevel
    mode_init: tuple[complex, ...]
    steps: tuple[ProtocolStep, ...]

    def __post_init__(self):
        mode_init = tuple(complex(z) for z in self.mode_init)
        if not mode_init:
            raise ValueError("at least one mode required")
        for z in mode_init:
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError("mode amplitudes must be finite")
        steps = tuple(self.steps)
        for i, step in enumerate(steps):
            if isinstance(step, Dispersive) and not 0 <= step.mode < len(mode_init):
                raise ValueError(f"step {i}: mode index {step.mode} out of range")
            if isinstance(step, Detect) and i != len(steps) - 1:
                raise ValueError("Detect must be the final step")
        object.__setattr__(self, "mode_init", mode_init)
        object.__setattr__(self, "steps", steps)

    @property
    def modes(self) -> int:
        return len(self.mode_init)

    @property
    def detect_level(self) -> AtomicLevel | None:
        if self.steps and isinstance(self.steps[-1], Detect):
            return self.steps[-1].level
        return None


@dataclass(frozen=True)
class RunResult:
    trace: tuple[tuple[str, BranchState], ...]
    final: BranchState
    detect_probability: float | None


def apply_ramsey(x: BranchState, theta: float) -> BranchState:
    """Rotate the atomic factor of every branch by ``theta``; labels untouched."""
    if not x.has_atom:
        raise ValueError("Ramsey pulse needs an atom-carrying state")
    c, s = math.cos(theta), math.sin(theta)
    out = []
    for b in x.branches:
        if b.atom is AtomicLevel.E:
            out.append(Branch(AtomicLevel.E, b.labels, c * b.coeff))
            out.append(Branch(AtomicLevel.G, b.labels, s * b.coeff))
        else:
            out.append(Branch(AtomicLevel.G, b.labels, c * b.coeff))
            out.append(Branch(AtomicLevel.E, b.labels, -s * b.coeff))
    return merge_branches(BranchState(x.modes, tuple(out)))


def apply_dispersive(x: BranchState, mode: int, phi: float) -> BranchState:
    """Kick one mode: conditional label rotation, extra phase on excited branches."""
    if not x.has_atom:
        raise ValueError("dispersive kick needs an atom-carrying state")
    if not 0 <= mode < x.modes:
        raise ValueError(f"mode index {mode} out of range for {x.modes} modes")
    rot_e = cmath.exp(-1j * phi)
    rot_g = cmath.exp(1j * phi)
    out = []
    for b in x.branches:
        labels = list(b.labels)
        if b.atom is AtomicLevel.E:
            labels[mode] *= rot_e
            out.append(Branch(AtomicLevel.E, tuple(labels), b.coeff * rot_e))
        else:
            labels[mode] *= rot_g
            out.append(Branch(AtomicLevel.G, tuple(labels), b.coeff))
    return BranchState(x.modes, tuple(out))


def apply_atomic_phase(x: BranchState, level: AtomicLevel, gamma: float) -> BranchState:
    """Multiply the coefficient of every branch at ``level`` by exp(i*gamma)."""
    if not x.has_atom:
        raise ValueError("atomic phase needs an atom-carrying state")
    ph = cmath.exp(1j * gamma)
    return BranchState(
        x.modes,
        tuple(
            Branch(b.atom, b.labels, b.coeff * ph) if b.atom is level else b
            for b in x.branches
        ),
    )


def _check_normalized(x: BranchState) -> None:
    n = norm(x)
    if abs(n - 1.0) > _NORM_SLACK:
        raise ValueError(f"state is not normalized (norm = {n!r})")


def detection_probabilities(x: BranchState) -> tuple[float, float]:
    """Probabilities (p_g, p_e) of detecting the atom in each level."""
    if not x.has_atom:
        raise ValueError("detection needs an atom-carrying state")
    _check_normalized(x)
    probs = {}
    for level in (AtomicLevel.G, AtomicLevel.E):
        kept = tuple(b for b in x.branches if b.atom is level)
        if kept:
            sector = BranchState(x.modes, kept)
            probs[level] = max(inner_product(sector, sector).real, 0.0)
        else:
            probs[level] = 0.0
    return probs[AtomicLevel.G], probs[AtomicLevel.E]


def project(x: BranchState, level: AtomicLevel) -> tuple[BranchState, float]:
    """Post-select on the atomic level; returns (normalized field state, probability).

    The atomic factor is dropped: branches of the result carry ``atom=None``.
    """
    p_g, p_e = detection_probabilities(x)
    p = p_g if level is AtomicLevel.G else p_e
    kept = tuple(b for b in x.branches if b.atom is level)
    if not kept or p <= 0.0:
        raise ValueError(f"zero probability of detecting level {level}")
    scale = 1.0 / math.sqrt(p)
    fieldstate = BranchState(
        x.modes, tuple(Branch(None, b.labels, b.coeff * scale) for b in kept)
    )
    return fieldstate, p


def run_protocol(spec: ProtocolSpec) -> RunResult:
    """Apply the steps in order, recording the state after each one."""
    x = init_state(spec.atom_init, spec.mode_init)
    trace: list[tuple[str, BranchState]] = [("init", x)]
    prob = None
    for step in spec.steps:
        if isinstance(step, Ramsey):
            x = apply_ramsey(x, step.theta)
            trace.append((f"ramsey({step.theta:g})", x))
        elif isinstance(step, Dispersive):
            x = apply_dispersive(x, step.mode, step.phi)
            trace.append((f"dispersive(mode={step.mode}, phi={step.phi:g})", x))
        else:
            x, prob = project(x, step.level)
            trace.append((f"detect({step.level})", x))
    return RunResult(tuple(trace), x, prob)


# Sign patterns of the four post-selected targets over the term order
# (+a,+a,+a,+a), (+a,+a,-a,-a), (-a,-a,+a,+a), (-a,-a,-a,-a).
# Kind k is the state heralded by the (prepared, detected) pair below.
CLUSTER_SIGNS: dict[int, tuple[int, int, int, int]] = {
    1: (1, 1, 1, -1),
    2: (-1, 1, 1, 1),
    3: (1, 1, -1, 1),
    4: (1, -1, 1, 1),
}

CLUSTER_PREPARE_DETECT: dict[int, tuple[AtomicLevel, AtomicLevel]] = {
    1: (AtomicLevel.E, AtomicLevel.E),
    2: (AtomicLevel.G, AtomicLevel.G),
    3: (AtomicLevel.G, AtomicLevel.E),
    4: (AtomicLevel.E, AtomicLevel.G),
}


def cluster_kind(prepared: AtomicLevel, detected: AtomicLevel) -> int:
    """Which of the four target states a prepare/detect combination heralds."""
    for kind, pair in CLUSTER_PREPARE_DETECT.items():
        if pair == (prepared, detected):
            return kind
    raise ValueError(f"no cluster kind for ({prepared}, {detected})")


def ideal_cluster(kind: int, alpha: complex, flip_last: bool = False) -> BranchState:
    """Four-term target superposition of kind 1..4 at amplitude ``alpha``.

    ``flip_last`` negates the last mode's label in every term, producing the
    variant family reached from an initial state whose last mode starts at
    ``-i*alpha`` instead of ``i*alpha``.
    """
    if kind not in CLUSTER_SIGNS:
        raise ValueError(f"cluster kind must be 1..4, got {kind}")
    a = complex(alpha)
    patterns = [
        (a, a, a, a),
        (a, a, -a, -a),
        (-a, -a, a, a),
        (-a, -a, -a, -a),
    ]
    if flip_last:
        patterns = [(l0, l1, l2, -l3) for l0, l1, l2, l3 in patterns]
    branches = tuple(
        Branch(None, labels, float(sign))
        for labels, sign in zip(patterns, CLUSTER_SIGNS[kind])
    )
    return normalize(BranchState(4, branches))


def fidelity(x: BranchState, y: BranchState) -> float:
    """|<x|y>|^2 for normalized states of equal mode count."""
    if x.modes != y.modes:
        raise ValueError(f"mode count mismatch: {x.modes} vs {y.modes}")
    _check_normalized(x)
    _check_normalized(y)
    return min(abs(inner_product(x, y)) ** 2, 1.0)


def canonical_spec(
    alpha: float = 2.0,
    atom: AtomicLevel = AtomicLevel.E,
    detect: AtomicLevel | None = AtomicLevel.E,
    flip_last: bool = False,
) -> ProtocolSpec:
    """Reference four-mode protocol: three quarter-turn Ramsey pulses around
    two pairs of quarter-period dispersive kicks, all modes starting at
    ``i*alpha`` (last one at ``-i*alpha`` when ``flip_last``)."""
    a = 1j * alpha
    mode_init = (a, a, a, -a if flip_last else a)
    steps: list[ProtocolStep] = [
        Ramsey(math.pi / 4),
        Dispersive(0, math.pi / 2),
        Dispersive(1, math.pi / 2),
        Ramsey(math.pi / 4),
        Dispersive(2, math.pi / 2),
        Dispersive(3, math.pi / 2),
        Ramsey(math.pi / 4),
    ]
    if detect is not None:
        steps.append(Detect(detect))
    return ProtocolSpec(atom, mode_init, tuple(steps))
