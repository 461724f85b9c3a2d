"""Text form of pulse sequences.

Events are written in time order, separated by ``;``::

    (pi/2)y:1,2 ; (pi/2)-x:1 ; delay 1/(2J13) refocus:1,3 ; delay 0.002s

``(angle)axis:spins`` is an ideal rotation of the listed spins; ``delay``
is free evolution, either a fixed time in seconds or ``1/(2 J_ij)``
derived from the spin system at compile time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

AXES = ("x", "y", "z", "-x", "-y", "-z")


class PulseSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def _spin_tuple(spins) -> tuple:
    spins = tuple(int(s) for s in spins)
    if len(set(spins)) != len(spins):
        raise ValueError(f"repeated spin in {spins}")
    if any(s < 1 for s in spins):
        raise ValueError(f"spin indices start at 1, got {spins}")
    return tuple(sorted(spins))


@dataclass(frozen=True)
class Pulse:
    spins: tuple
    axis: str
    angle: float

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        if not math.isfinite(self.angle):
            raise ValueError("pulse angle must be finite")
        spins = _spin_tuple(self.spins)
        if not spins:
            raise ValueError("pulse needs at least one spin")
        object.__setattr__(self, "spins", spins)
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def signed_angle(self) -> float:
        return -self.angle if self.axis.startswith("-") else self.angle

    @property
    def base_axis(self) -> str:
        return self.axis[-1]


@dataclass(frozen=True)
class Delay:
    """Free evolution for ``duration`` seconds, or ``1/(2 J)`` of ``coupling``."""

    duration: Optional[float] = None
    coupling: Optional[tuple] = None
    refocus: tuple = ()

    def __post_init__(self):
        if (self.duration is None) == (self.coupling is None):
            raise ValueError("a delay needs exactly one of duration or coupling")
        if self.duration is not None:
            if not (math.isfinite(self.duration) and self.duration > 0):
                raise ValueError(f"delay duration must be positive, got {self.duration}")
            object.__setattr__(self, "duration", float(self.duration))
        if self.coupling is not None:
            i, j = self.coupling
            if i == j:
                raise ValueError("a coupling-derived delay needs two distinct spins")
            object.__setattr__(self, "coupling", (int(i), int(j)))
        object.__setattr__(self, "refocus", _spin_tuple(self.refocus))


Event = Union[Pulse, Delay]


@dataclass(frozen=True)
class PulseSequence:
    events: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.events + other.events)

    def __str__(self) -> str:
        return format_sequence(self)


def _format_angle(theta: float) -> str:
    # Only emit the pi form when parsing it back yields the same float.
    for den in range(1, 65):
        num = round(theta * den / math.pi)
        if num >= 1 and num * math.pi / den == theta and math.gcd(num, den) == 1:
            head = "pi" if num == 1 else f"{num}pi"
            return head if den == 1 else f"{head}/{den}"
    return repr(theta)


def format_event(ev: Event) -> str:
    if isinstance(ev, Pulse):
        return f"({_format_angle(ev.angle)}){ev.axis}:{','.join(map(str, ev.spins))}"
    if ev.coupling is not None:
        text = f"delay 1/(2J{ev.coupling[0]}{ev.coupling[1]})"
    else:
        text = f"delay {ev.duration!r}s"
    if ev.refocus:
        text += " refocus:" + ",".join(map(str, ev.refocus))
    return text


def format_sequence(seq: PulseSequence) -> str:
    return " ; ".join(format_event(ev) for ev in seq)


_INT = re.compile(r"\d+")
_DECIMAL = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: Optional[int] = None):
        raise PulseSyntaxError(message, self.pos if pos is None else pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos : self.pos + 1]

    def accept(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str):
        if not self.accept(literal):
            found = self.peek()
            self.error(f"expected {literal!r}, found {found!r}" if found else f"expected {literal!r}")

    def match(self, pattern: re.Pattern) -> Optional[str]:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(0)

    def digit(self) -> int:
        self.skip_ws()
        c = self.text[self.pos : self.pos + 1]
        if not c.isdigit() or c == "0":
            self.error("expected spin index 1-9")
        self.pos += 1
        return int(c)

    def spinlist(self) -> tuple:
        start = self.pos
        spins = [self.digit()]
        while self.accept(","):
            spins.append(self.digit())
        if len(set(spins)) != len(spins):
            self.error("repeated spin in spin list", start)
        return tuple(spins)

    def angle(self) -> float:
        self.skip_ws()
        start = self.pos
        if self.text.startswith("pi", self.pos):
            num = 1
        else:
            number = self.match(_DECIMAL)
            if number is None:
                self.error("expected angle")
            if not self.text.startswith("pi", self.pos):
                return float(number)
            if not number.isdigit():
                self.error("multiplier of pi must be an integer", start)
            num = int(number)
        self.expect("pi")
        den = 1
        if self.accept("/"):
            d = self.match(_INT)
            if d is None or int(d) == 0:
                self.error("expected positive integer denominator")
            den = int(d)
        return num * math.pi / den

    def pulse(self) -> Pulse:
        self.expect("(")
        theta = self.angle()
        self.expect(")")
        self.skip_ws()
        axis_pos = self.pos
        neg = self.accept("-")
        self.skip_ws()
        a = self.text[self.pos : self.pos + 1]
        if a not in ("x", "y", "z"):
            self.error(f"unknown axis {a!r}", axis_pos)
        self.pos += 1
        self.expect(":")
        spins = self.spinlist()
        return Pulse(spins, ("-" if neg else "") + a, theta)

    def delay(self) -> Delay:
        self.expect("delay")
        duration = coupling = None
        mark = self.pos
        if self.accept("1") and self.accept("/"):
            self.expect("(")
            self.expect("2")
            self.expect("J")
            pair_pos = self.pos
            i = self.digit()
            j = self.digit()
            if i == j:
                self.error("coupling needs two distinct spins", pair_pos)
            self.expect(")")
            coupling = (i, j)
        else:
            self.pos = mark
            number = self.match(_DECIMAL)
            if number is None:
                self.error("expected delay duration")
            self.expect("s")
            duration = float(number)
            if duration <= 0:
                self.error("delay duration must be positive")
        refocus = ()
        if self.accept("refocus"):
            self.expect(":")
            refocus = self.spinlist()
        return Delay(duration=duration, coupling=coupling, refocus=refocus)

    def item(self) -> Event:
        c = self.peek()
        if c == "(":
            return self.pulse()
        if c == "d":
            return self.delay()
        self.error(f"expected pulse or delay, found {c!r}" if c else "expected pulse or delay")

    def sequence(self) -> PulseSequence:
        if self.peek() == "":
            return PulseSequence(())
        events = [self.item()]
        while self.accept(";"):
            events.append(self.item())
        if self.peek() != "":
            self.error(f"unexpected {self.peek()!r}")
        return PulseSequence(tuple(events))


def parse_sequence(text: str) -> PulseSequence:
    """Parse pulse-sequence text; the empty string is the empty sequence."""
    return _Parser(text).sequence()
