"""Compile pulse sequences to unitaries and run the NMR-level protocol.

Rotations are ``R_axis(theta) = exp(-i * sense * theta * sigma_axis / 2)``
with ``sense = +1`` by default; a negative axis negates ``theta``. With this
sense the five-event CNOT sequence reproduces the permutation CNOT up to a
global phase, and the preparation sequences land on their target product
states with the expected relative phases.

Delays evolve under ``H = sum_{i<j} 2 pi J_ij Iz_i Iz_j + sum_i 2 pi offset_i Iz_i``.
A refocused delay is split in two halves, each followed by a pi_x pulse on
the refocus set: couplings inside the set survive, couplings that cross
the set boundary and offsets of refocused spins cancel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from sepent import tolerances
from sepent.circuits import ProtocolTrace, apply
from sepent.linalg import IDENTITY2, PAULI, evolve_unitary, tensor_product
from sepent.product_ops import spin_operator
from sepent.pulses.dsl import Delay, Pulse, PulseSequence, parse_sequence
from sepent.pulses.system import SpinSystem
from sepent.states import check_density_matrix, pseudopure

ROTATION_SENSE = 1


def rotation(axis: str, theta: float, sense: int = ROTATION_SENSE) -> np.ndarray:
    """Single-spin rotation about ``axis`` (``x``, ``-y``, ...) by ``theta``."""
    if axis.startswith("-"):
        theta = -theta
    half = sense * theta / 2
    return np.cos(half) * IDENTITY2 - 1j * np.sin(half) * PAULI[axis[-1]]


def pulse_unitary(p: Pulse, n: int, sense: int = ROTATION_SENSE) -> np.ndarray:
    if max(p.spins) > n:
        raise ValueError(f"pulse on spin {max(p.spins)} but the system has {n} spins")
    r = rotation(p.axis, p.angle, sense)
    return tensor_product(*[r if k in p.spins else IDENTITY2 for k in range(1, n + 1)])


def delay_duration(d: Delay, sys: SpinSystem) -> float:
    if d.duration is not None:
        return d.duration
    i, j = d.coupling
    for k in (i, j):
        if not 1 <= k <= sys.n:
            raise ValueError(f"delay references spin {k} outside 1..{sys.n}")
    hz = sys.coupling(i, j)
    if hz == 0:
        raise ValueError(f"delay 1/(2J{i}{j}) references a zero coupling")
    return 1 / (2 * abs(hz))


def free_hamiltonian(sys: SpinSystem) -> np.ndarray:
    """Weak-coupling Hamiltonian in rad/s, each spin in its own rotating frame."""
    n = sys.n
    iz = [spin_operator("z", k, n) for k in range(1, n + 1)]
    h = np.zeros((2**n, 2**n), dtype=complex)
    for (i, j), hz in sorted(sys.couplings.items()):
        h += 2 * np.pi * hz * iz[i - 1] @ iz[j - 1]
    for k, off in enumerate(sys.offsets_hz):
        h += 2 * np.pi * off * iz[k]
    return h


def delay_unitary(d: Delay, sys: SpinSystem, sense: int = ROTATION_SENSE) -> np.ndarray:
    if sys.n < 2:
        raise ValueError("free-evolution delays need at least two spins")
    if d.refocus and max(d.refocus) > sys.n:
        raise ValueError(f"refocus spin {max(d.refocus)} outside 1..{sys.n}")
    t = delay_duration(d, sys)
    h = free_hamiltonian(sys)
    if not d.refocus:
        return evolve_unitary(h, t)
    half = evolve_unitary(h, t / 2)
    flip = pulse_unitary(Pulse(d.refocus, "x", np.pi), sys.n, sense)
    return flip @ half @ flip @ half


def compile_sequence(seq: PulseSequence, sys: SpinSystem, sense: int = ROTATION_SENSE) -> np.ndarray:
    """Total propagator; the first event in time is the rightmost factor."""
    u = np.eye(2**sys.n, dtype=complex)
    for ev in seq:
        if isinstance(ev, Pulse):
            step = pulse_unitary(ev, sys.n, sense)
        else:
            step = delay_unitary(ev, sys, sense)
        u = step @ u
    return u


def composite_z(p: Pulse) -> PulseSequence:
    """Replace a z rotation by x/y pulses: (pi/2)-x ; (theta)+-y ; (pi/2)x in time order.

    As an operator product this reads (pi/2)x (theta)y (pi/2)-x, the usual
    form of the composite z pulse.
    """
    if p.base_axis != "z":
        raise ValueError("only z pulses have a composite expansion")
    y_axis = "-y" if p.axis.startswith("-") else "y"
    return PulseSequence(
        (
            Pulse(p.spins, "-x", np.pi / 2),
            Pulse(p.spins, y_axis, p.angle),
            Pulse(p.spins, "x", np.pi / 2),
        )
    )


def expand_composite_z(seq: PulseSequence) -> PulseSequence:
    events = []
    for ev in seq:
        if isinstance(ev, Pulse) and ev.base_axis == "z":
            events.extend(composite_z(ev).events)
        else:
            events.append(ev)
    return PulseSequence(tuple(events))


def cnot_sequence(
    control: int, target: int, sys: Optional[SpinSystem] = None, composite: bool = False
) -> PulseSequence:
    """(pi/2)y:t ; delay 1/(2J_ct) refocus:c,t ; (pi/2)x:t ; (pi/2)-z:t ; (pi/2)z:c."""
    if control == target:
        raise ValueError("control and target must differ")
    if sys is not None and sys.coupling(control, target) == 0:
        raise ValueError(f"spins {control} and {target} are not coupled")
    half_pi = np.pi / 2
    seq = PulseSequence(
        (
            Pulse((target,), "y", half_pi),
            Delay(coupling=(min(control, target), max(control, target)), refocus=(control, target)),
            Pulse((target,), "x", half_pi),
            Pulse((target,), "-z", half_pi),
            Pulse((control,), "z", half_pi),
        )
    )
    return expand_composite_z(seq) if composite else seq


@dataclass(frozen=True)
class PreparationRecipe:
    """Temporal averaging: a weighted sum over separate preparation runs."""

    components: tuple  # of (weight, PulseSequence)

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise ValueError("recipe needs at least one component")
        if any(w <= 0 for w, _ in comps):
            raise ValueError("recipe weights must be positive")
        total = sum(w for w, _ in comps)
        if abs(total - 1) >= tolerances.EXACT:
            raise ValueError(f"recipe weights sum to {total!r}, expected 1")
        object.__setattr__(self, "components", comps)


PREPARATION_SEQUENCES = (
    "(pi/2)y:1,2",
    "(pi/2)-x:1 ; (pi/2)x:2",
    "(pi/2)-y:1,2",
    "(pi/2)x:1 ; (pi/2)-x:2",
    "(pi)y:3",
    "(pi)y:1,2,3",
)


def preparation_recipe() -> PreparationRecipe:
    """Six equally weighted runs starting from the pseudopure ground state."""
    return PreparationRecipe(tuple((1 / 6, parse_sequence(t)) for t in PREPARATION_SEQUENCES))


def run_recipe(
    recipe: PreparationRecipe, sys: SpinSystem, rho_in=None, sense: int = ROTATION_SENSE
) -> np.ndarray:
    rho_in = pseudopure() if rho_in is None else check_density_matrix(rho_in)
    out = np.zeros_like(rho_in)
    # Fixed summation order keeps the result reproducible.
    for weight, seq in recipe.components:
        out = out + weight * apply(compile_sequence(seq, sys, sense), rho_in)
    return out


def run_pulse_protocol(
    sys: SpinSystem, composite: bool = False, sense: int = ROTATION_SENSE
) -> ProtocolTrace:
    """Preparation recipe, then pulse-level CNOT(1->3) and CNOT(2->3)."""
    rho0 = run_recipe(preparation_recipe(), sys, sense=sense)
    u13 = compile_sequence(cnot_sequence(1, 3, sys, composite), sys, sense)
    u23 = compile_sequence(cnot_sequence(2, 3, sys, composite), sys, sense)
    rho1 = apply(u13, rho0)
    rho2 = apply(u23, rho1)
    return ProtocolTrace(rho0, rho1, rho2)
