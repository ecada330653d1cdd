"""Line-oriented protocol description files.

Grammar (``#`` starts a comment, blank lines are ignored)::

    atom (g|e)                 exactly once, first meaningful line
    mode <name> <complex>      one per mode; declaration order fixes the index
    ramsey <angle>
    disperse <name> <angle>
    detect (g|e)               optional, only as the final step

A complex literal is ``a+bi`` / ``a-bi`` with decimal parts, e.g. ``0+2i``.
An angle is either plain radians (``1.5707``) or a multiple of pi written
``0.5pi``.  Mode declarations must precede the first step line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .states import AtomicLevel
from .protocol import Detect, Dispersive, ProtocolSpec, Ramsey

_DEC = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"^({_DEC})((?:\+|-)(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i$")
_ANGLE_RE = re.compile(rf"^({_DEC})(pi)?$")

_LEVELS = {"g": AtomicLevel.G, "e": AtomicLevel.E}


class ParseError(Exception):
    """Protocol file rejected; carries the 1-based offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.reason = message


@dataclass(frozen=True)
class ProtocolFile:
    """A parsed protocol plus the mode names used in the source text."""

    spec: ProtocolSpec
    mode_names: tuple[str, ...]


def parse_complex(token: str, line_no: int) -> complex:
    m = _COMPLEX_RE.match(token)
    if not m:
        raise ParseError(line_no, f"malformed complex literal {token!r} (expected a+bi)")
    return complex(float(m.group(1)), float(m.group(2)))


def parse_angle(token: str, line_no: int) -> float:
    m = _ANGLE_RE.match(token)
    if not m:
        raise ParseError(line_no, f"malformed angle {token!r} (expected radians or <x>pi)")
    value = float(m.group(1))
    return value * math.pi if m.group(2) else value


def _level(token: str, line_no: int) -> AtomicLevel:
    if token not in _LEVELS:
        raise ParseError(line_no, f"atomic level must be g or e, got {token!r}")
    return _LEVELS[token]


def parse_file(text: str) -> ProtocolFile:
    atom: AtomicLevel | None = None
    mode_names: list[str] = []
    mode_amps: list[complex] = []
    steps: list = []
    steps_started = False
    detected = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword, args = tokens[0], tokens[1:]

        if detected:
            raise ParseError(line_no, "detect must be the final step")
        if atom is None and keyword != "atom":
            raise ParseError(line_no, "first line must be 'atom g' or 'atom e'")

        if keyword == "atom":
            if atom is not None:
                raise ParseError(line_no, "duplicate atom line")
            if len(args) != 1:
                raise ParseError(line_no, "usage: atom (g|e)")
            atom = _level(args[0], line_no)
        elif keyword == "mode":
            if steps_started:
                raise ParseError(line_no, "mode declared after the first protocol step")
            if len(args) != 2:
                raise ParseError(line_no, "usage: mode <name> <complex>")
            name = args[0]
            if name in mode_names:
                raise ParseError(line_no, f"duplicate mode name {name!r}")
            mode_names.append(name)
            mode_amps.append(parse_complex(args[1], line_no))
        elif keyword == "ramsey":
            if len(args) != 1:
                raise ParseError(line_no, "usage: ramsey <angle>")
            steps_started = True
            steps.append(Ramsey(parse_angle(args[0], line_no)))
        elif keyword == "disperse":
            if len(args) != 2:
                raise ParseError(line_no, "usage: disperse <mode> <angle>")
            if args[0] not in mode_names:
                raise ParseError(line_no, f"unknown mode {args[0]!r}")
            steps_started = True
            steps.append(Dispersive(mode_names.index(args[0]), parse_angle(args[1], line_no)))
        elif keyword == "detect":
            if len(args) != 1:
                raise ParseError(line_no, "usage: detect (g|e)")
            steps_started = True
            steps.append(Detect(_level(args[0], line_no)))
            detected = True
        else:
            raise ParseError(line_no, f"unknown keyword {keyword!r}")

    if atom is None:
        raise ParseError(1, "missing atom line")
    if not mode_names:
        raise ParseError(1, "at least one mode must be declared")
    return ProtocolFile(
        ProtocolSpec(atom, tuple(mode_amps), tuple(steps)), tuple(mode_names)
    )


def parse_protocol(text: str) -> ProtocolSpec:
    return parse_file(text).spec


def _format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def format_protocol(pf: ProtocolFile) -> str:
    """Canonical text form; parsing it reproduces the spec exactly."""
    spec = pf.spec
    lines = [f"atom {spec.atom_init}"]
    for name, amp in zip(pf.mode_names, spec.mode_init):
        lines.append(f"mode {name} {_format_complex(amp)}")
    for step in spec.steps:
        if isinstance(step, Ramsey):
            lines.append(f"ramsey {step.theta:.17g}")
        elif isinstance(step, Dispersive):
            lines.append(f"disperse {pf.mode_names[step.mode]} {step.phi:.17g}")
        else:
            lines.append(f"detect {step.level}")
    return "\n".join(lines) + "\n"
