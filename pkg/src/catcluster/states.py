"""Symbolic state algebra for superpositions of multimode coherent states.

A joint atom-field state is kept as a list of branches, each branch being a
product ``|atom> |b_1>_1 ... |b_M>_M`` of one atomic level and one coherent
state per field mode, weighted by a complex coefficient.  Because the
protocol's unitaries map coherent states to coherent states, this
representation is exact: no basis truncation is involved, and inner products
reduce to finite Gram sums over the branch list.

All values are immutable and all operations are pure functions, so states can
be shared freely across threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

# Labels produced by repeated exact phase rotations of the same input differ
# only by floating-point rounding, so a tight absolute tolerance suffices.
LABEL_TOL = 1e-9

# Branch coefficients below double-precision significance are dead weight.
COEFF_DROP = 1e-14


class AtomicLevel(Enum):
    """The two relevant levels of the probe atom."""

    G = "g"
    E = "e"

    def __str__(self) -> str:
        return self.value


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"amplitude must be finite, got {z!r}")
    return z


@dataclass(frozen=True)
class Branch:
    """One product term: atomic level, one coherent label per mode, coefficient.

    ``atom`` is ``None`` for field-only branches, i.e. after the atomic factor
    has been removed by a projective detection.
    """

    atom: AtomicLevel | None
    labels: tuple[complex, ...]
    coeff: complex

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(_as_complex(z) for z in self.labels))
        object.__setattr__(self, "coeff", _as_complex(self.coeff))


@dataclass(frozen=True)
class BranchState:
    """Superposition of branches over atom (optional) x M field modes."""

    modes: int
    branches: tuple[Branch, ...] = field(default=())

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError("a state needs at least one mode")
        branches = tuple(self.branches)
        if not branches:
            raise ValueError("a state needs at least one branch")
        for b in branches:
            if len(b.labels) != self.modes:
                raise ValueError(
                    f"branch has {len(b.labels)} labels, state has {self.modes} modes"
                )
        with_atom = [b.atom is not None for b in branches]
        if any(with_atom) and not all(with_atom):
            raise ValueError("cannot mix atom-carrying and field-only branches")
        object.__setattr__(self, "branches", branches)

    @property
    def has_atom(self) -> bool:
        return self.branches[0].atom is not None


def coherent_overlap(a: complex, b: complex) -> complex:
    """Overlap <a|b> of two coherent states: exp(-|a|^2/2 - |b|^2/2 + conj(a)*b)."""
    a = complex(a)
    b = complex(b)
    return cmath.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + a.conjugate() * b)


def init_state(atom: AtomicLevel, labels) -> BranchState:
    """Product state of one atomic level and one coherent state per mode."""
    labels = tuple(labels)
    if not labels:
        raise ValueError("at least one mode label required")
    return BranchState(len(labels), (Branch(atom, labels, 1.0),))


def inner_product(x: BranchState, y: BranchState) -> complex:
    """Hermitian inner product <x|y> via the coherent-state Gram sum.

    Branch pairs with different atomic levels are orthogonal; matching pairs
    contribute conj(coeff_x) * coeff_y * prod_k <label_x_k|label_y_k>.
    """
    if x.modes != y.modes:
        raise ValueError(f"mode count mismatch: {x.modes} vs {y.modes}")
    if x.has_atom != y.has_atom:
        raise ValueError("cannot mix atom-carrying and field-only states")
    total = 0.0 + 0.0j
    for bx in x.branches:
        for by in y.branches:
            if bx.atom is not by.atom:
                continue
            term = bx.coeff.conjugate() * by.coeff
            for la, lb in zip(bx.labels, by.labels):
                term *= coherent_overlap(la, lb)
            total += term
    return total


def norm(x: BranchState) -> float:
    """sqrt of <x|x>; the tiny imaginary rounding residue is discarded."""
    return math.sqrt(max(inner_product(x, x).real, 0.0))


def normalize(x: BranchState) -> BranchState:
    n = norm(x)
    if n == 0.0:
        raise ValueError("cannot normalize a zero-norm state")
    scale = 1.0 / n
    return BranchState(
        x.modes,
        tuple(Branch(b.atom, b.labels, b.coeff * scale) for b in x.branches),
    )


def _labels_close(a: tuple[complex, ...], b: tuple[complex, ...], tol: float) -> bool:
    return all(abs(la - lb) <= tol for la, lb in zip(a, b))


def merge_branches(x: BranchState, tol: float = LABEL_TOL, drop: float = COEFF_DROP) -> BranchState:
    """Combine branches with equal atomic level and labels within ``tol``.

    Coefficients of combined branches are summed; the first-seen labels serve
    as the representative.  Branches whose merged coefficient magnitude falls
    below ``drop`` are removed (unless that would empty the state).
    """
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    reps: list[list] = []  # [atom, labels, coeff]
    for b in x.branches:
        for rep in reps:
            if rep[0] is b.atom and _labels_close(rep[1], b.labels, tol):
                rep[2] += b.coeff
                break
        else:
            reps.append([b.atom, b.labels, b.coeff])
    kept = [Branch(a, l, c) for a, l, c in reps if abs(c) >= drop]
    if not kept:
        a, l, _ = reps[0]
        kept = [Branch(a, l, 0.0)]
    return BranchState(x.modes, tuple(kept))
