"""NMR realization: spin systems, pulse-sequence text, compilation."""

from sepent.pulses.compiler import (
    PREPARATION_SEQUENCES,
    ROTATION_SENSE,
    PreparationRecipe,
    cnot_sequence,
    compile_sequence,
    composite_z,
    delay_duration,
    delay_unitary,
    expand_composite_z,
    free_hamiltonian,
    preparation_recipe,
    pulse_unitary,
    rotation,
    run_pulse_protocol,
    run_recipe,
)
from sepent.pulses.dsl import Delay, Pulse, PulseSequence, PulseSyntaxError, format_sequence, parse_sequence
from sepent.pulses.system import SpinSystem, alanine, load_system

__all__ = [
    "PREPARATION_SEQUENCES",
    "ROTATION_SENSE",
    "Delay",
    "PreparationRecipe",
    "Pulse",
    "PulseSequence",
    "PulseSyntaxError",
    "SpinSystem",
    "alanine",
    "cnot_sequence",
    "compile_sequence",
    "composite_z",
    "delay_duration",
    "delay_unitary",
    "expand_composite_z",
    "format_sequence",
    "free_hamiltonian",
    "load_system",
    "parse_sequence",
    "preparation_recipe",
    "pulse_unitary",
    "rotation",
    "run_pulse_protocol",
    "run_recipe",
]
