import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sepent.circuits import cnot, run_protocol
from sepent.linalg import IDENTITY2, PAULI, is_unitary, phase_aligned_diff, tensor_product
from sepent.pulses import (
    PREPARATION_SEQUENCES,
    Delay,
    PreparationRecipe,
    Pulse,
    PulseSequence,
    PulseSyntaxError,
    SpinSystem,
    alanine,
    cnot_sequence,
    compile_sequence,
    composite_z,
    delay_duration,
    delay_unitary,
    format_sequence,
    load_system,
    parse_sequence,
    preparation_recipe,
    rotation,
    run_pulse_protocol,
    run_recipe,
)
from sepent.states import basis_ket, initial_components, initial_state, projector, pseudopure

from oracles import expm_taylor, random_density

ALANINE = alanine()


def test_alanine_couplings():
    assert ALANINE.n == 3
    assert ALANINE.coupling(1, 3) == 54.2
    assert ALANINE.coupling(3, 2) == 35.1
    assert ALANINE.coupling(1, 2) == -1.3
    assert ALANINE.offsets_hz == (0.0, 0.0, 0.0)


def test_parse_single_pulse():
    seq = parse_sequence("(pi/2)y:1,2")
    assert seq.events == (Pulse((1, 2), "y", math.pi / 2),)


def test_parse_two_pulses():
    seq = parse_sequence("(pi/2)-x:1 ; (pi/2)x:2")
    assert seq.events == (Pulse((1,), "-x", math.pi / 2), Pulse((2,), "x", math.pi / 2))


def test_parse_coupling_delay():
    (d,) = parse_sequence("delay 1/(2J13) refocus:1,3").events
    assert d == Delay(coupling=(1, 3), refocus=(1, 3))
    assert delay_duration(d, ALANINE) == 1 / (2 * 54.2)


@pytest.mark.parametrize(
    "text, angle",
    [("(pi)x:1", math.pi), ("(3pi/4)x:1", 3 * math.pi / 4), ("(0.25)x:1", 0.25), ("(2pi)x:1", 2 * math.pi)],
)
def test_parse_angles(text, angle):
    assert parse_sequence(text).events[0].angle == angle


def test_parse_fixed_delay_and_whitespace():
    a = parse_sequence("  ( pi / 2 ) - y : 1 , 3;delay 1.5s  refocus : 2 ")
    assert a.events == (Pulse((1, 3), "-y", math.pi / 2), Delay(duration=1.5, refocus=(2,)))


def test_parse_empty():
    assert len(parse_sequence("")) == 0


@pytest.mark.parametrize(
    "text, pos",
    [
        ("(pi/2)w:1", 6),
        ("(pi/2)x:0", 8),
        ("(pi/2)x:1,1", 8),
        ("(pi/2)x:1 ;", 11),
        ("(pi/2x:1", 5),
        ("delay 1/(2J11)", 11),
        ("(pi/2)x:1 ) ", 10),
        ("pulse", 0),
    ],
)
def test_parse_errors_report_position(text, pos):
    with pytest.raises(PulseSyntaxError) as info:
        parse_sequence(text)
    assert info.value.position == pos


@pytest.mark.parametrize(
    "text",
    list(PREPARATION_SEQUENCES)
    + ["delay 1/(2J23) refocus:2,3", "(0.3)-z:2 ; delay 0.001s", str(cnot_sequence(1, 3, composite=True))],
)
def test_format_roundtrip(text):
    seq = parse_sequence(text)
    assert parse_sequence(format_sequence(seq)) == seq
    assert format_sequence(parse_sequence(format_sequence(seq))) == format_sequence(seq)


def test_format_canonical():
    assert format_sequence(parse_sequence("(pi/2)y:2,1;delay 1/(2J13)refocus:3,1")) == (
        "(pi/2)y:1,2 ; delay 1/(2J13) refocus:1,3"
    )


def test_event_validation():
    with pytest.raises(ValueError):
        Pulse((1,), "w", 1.0)
    with pytest.raises(ValueError):
        Pulse((1,), "x", math.inf)
    with pytest.raises(ValueError):
        Delay(duration=-1.0)
    with pytest.raises(ValueError):
        Delay(duration=1.0, coupling=(1, 3))
    with pytest.raises(ValueError):
        Delay()


def test_rotation_matches_exponential():
    for axis in ("x", "y", "z"):
        np.testing.assert_allclose(
            rotation(axis, 0.7), expm_taylor(-1j * 0.7 * PAULI[axis] / 2), atol=1e-14
        )
        np.testing.assert_allclose(rotation("-" + axis, 0.7), rotation(axis, -0.7), atol=0)


@pytest.mark.parametrize("row", range(6))
def test_preparation_rows_reach_listed_states(row):
    u = compile_sequence(parse_sequence(PREPARATION_SEQUENCES[row]), ALANINE)
    target = initial_components()[row]
    out = u @ basis_ket("000")
    phase = np.vdot(target, out)
    assert abs(abs(phase) - 1) < 1e-10
    assert np.max(np.abs(out - phase * target)) < 1e-10


def test_row_one_example():
    out = compile_sequence(parse_sequence("(pi/2)y:1,2"), ALANINE) @ basis_ket("000")
    plus = np.array([1, 1]) / np.sqrt(2)
    expected = tensor_product(plus, plus, np.array([1, 0]))
    assert abs(abs(np.vdot(expected, out)) - 1) < 1e-10


def test_row_five_alone():
    recipe = PreparationRecipe(((1.0, parse_sequence("(pi)y:3")),))
    rho = run_recipe(recipe, ALANINE)
    assert np.max(np.abs(rho - projector(basis_ket("001")))) < 1e-10


def test_row_six_flips_all():
    out = compile_sequence(parse_sequence("(pi)y:1,2,3"), ALANINE) @ basis_ket("000")
    assert abs(abs(out[7]) - 1) < 1e-10


def test_recipe_reproduces_initial_state():
    rho0 = run_recipe(preparation_recipe(), ALANINE)
    assert np.max(np.abs(rho0 - initial_state())) < 1e-9


def test_identity_recipe_keeps_state():
    rho = random_density(np.random.default_rng(2), 8)
    out = run_recipe(PreparationRecipe(((1.0, PulseSequence()),)), ALANINE, rho)
    np.testing.assert_array_equal(out, rho)


def test_recipe_weight_errors():
    seq = PulseSequence()
    with pytest.raises(ValueError):
        PreparationRecipe(((0.5, seq), (0.4, seq)))
    with pytest.raises(ValueError):
        PreparationRecipe(((1.5, seq), (-0.5, seq)))
    with pytest.raises(ValueError):
        PreparationRecipe(())


def test_recipe_order_independent():
    r = preparation_recipe()
    rev = PreparationRecipe(tuple(reversed(r.components)))
    assert np.max(np.abs(run_recipe(r, ALANINE) - run_recipe(rev, ALANINE))) < 1e-15


@pytest.mark.parametrize("control", [1, 2])
@pytest.mark.parametrize("composite", [False, True])
def test_pulse_cnot_matches_ideal(control, composite):
    u = compile_sequence(cnot_sequence(control, 3, ALANINE, composite), ALANINE)
    assert phase_aligned_diff(u, cnot(control, 3, 3)) < 1e-9


def test_cnot_sequence_structure():
    seq = cnot_sequence(1, 3)
    assert len(seq) == 5
    assert format_sequence(seq) == (
        "(pi/2)y:3 ; delay 1/(2J13) refocus:1,3 ; (pi/2)x:3 ; (pi/2)-z:3 ; (pi/2)z:1"
    )
    assert len(cnot_sequence(1, 3, composite=True)) == 9


def test_cnot_sequence_delay_from_coupling():
    delay = cnot_sequence(2, 3, ALANINE).events[1]
    assert delay_duration(delay, ALANINE) == 1 / (2 * 35.1)
    assert delay.refocus == (2, 3)


def test_cnot_sequence_errors():
    with pytest.raises(ValueError):
        cnot_sequence(3, 3)
    uncoupled = SpinSystem(3, couplings={(1, 2): 10.0})
    with pytest.raises(ValueError):
        cnot_sequence(1, 3, uncoupled)
    with pytest.raises(ValueError):
        compile_sequence(parse_sequence("delay 1/(2J13)"), uncoupled)


def test_spin_out_of_range():
    with pytest.raises(ValueError):
        compile_sequence(parse_sequence("(pi)x:4"), ALANINE)
    with pytest.raises(ValueError):
        compile_sequence(parse_sequence("delay 0.01s refocus:4"), ALANINE)


@pytest.mark.parametrize("axis", ["z", "-z"])
@pytest.mark.parametrize("theta", [math.pi / 2, math.pi, 0.37])
def test_composite_z_matches_rotation(axis, theta):
    sys1 = SpinSystem(1)
    u = compile_sequence(composite_z(Pulse((1,), axis, theta)), sys1)
    assert phase_aligned_diff(u, rotation(axis, theta)) < 1e-10


def test_composite_z_rejects_other_axes():
    with pytest.raises(ValueError):
        composite_z(Pulse((1,), "x", 1.0))


@given(st.lists(st.sampled_from(
    ["(pi/2)x:1", "(0.3)-y:2,3", "(pi)z:3", "delay 1/(2J13) refocus:1,3", "delay 0.004s", "delay 1/(2J23)"]
), max_size=6))
@settings(max_examples=40, deadline=None)
def test_compiled_sequences_are_unitary(items):
    seq = parse_sequence(" ; ".join(items))
    assert is_unitary(compile_sequence(seq, ALANINE.with_offsets((120.0, 0.0, -75.0))), 1e-10)


@pytest.mark.parametrize("offsets", [(0.0, 0.0, 0.0), (120.0, 0.0, -75.0), (-300.0, 0.0, 42.0)])
def test_refocused_delay_decouples_spin_two(offsets):
    sys = ALANINE.with_offsets(offsets)
    u = delay_unitary(parse_sequence("delay 1/(2J13) refocus:1,3").events[0], sys)
    for axis in "xyz":
        op = tensor_product(IDENTITY2, PAULI[axis], IDENTITY2)
        assert np.linalg.norm(u @ op - op @ u) < 1e-9


def test_unrefocused_delay_couples_spin_two():
    u = delay_unitary(Delay(coupling=(1, 3)), ALANINE)
    op = tensor_product(IDENTITY2, PAULI["x"], IDENTITY2)
    assert np.linalg.norm(u @ op - op @ u) > 1e-3


def test_refocus_cancels_offsets():
    sys = SpinSystem(2, couplings={(1, 2): 50.0}, offsets_hz=(80.0, -30.0))
    u = delay_unitary(Delay(coupling=(1, 2), refocus=(1, 2)), sys)
    on_res = delay_unitary(Delay(coupling=(1, 2), refocus=(1, 2)), sys.with_offsets((0.0, 0.0)))
    assert phase_aligned_diff(u, on_res) < 1e-10


def test_delay_needs_two_spins():
    with pytest.raises(ValueError):
        compile_sequence(parse_sequence("delay 0.01s"), SpinSystem(1))


def test_pulse_protocol_matches_ideal():
    ideal = run_protocol()
    for composite in (False, True):
        t = run_pulse_protocol(ALANINE, composite=composite)
        assert np.max(np.abs(t.rho1 - ideal.rho1)) < 1e-9
        assert np.max(np.abs(t.rho2 - ideal.rho2)) < 1e-9


def test_opposite_sense_breaks_cnot():
    # Regression on the frozen rotation sense: the other sign does not give CNOT.
    u = compile_sequence(cnot_sequence(1, 3, ALANINE), ALANINE, sense=-1)
    assert phase_aligned_diff(u, cnot(1, 3, 3)) > 1e-3


def test_spin_system_json_roundtrip(tmp_path):
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(ALANINE.to_json()))
    assert load_system(path) == ALANINE
    assert ALANINE.to_json()["couplings"][0] == {"i": 1, "j": 2, "hz": -1.3}


def test_spin_system_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_system(tmp_path / "missing.json")
    with pytest.raises(ValueError):
        SpinSystem.from_json({"couplings": []})
    with pytest.raises(ValueError):
        SpinSystem(3, couplings={(1, 1): 5.0})
    with pytest.raises(ValueError):
        SpinSystem(3, couplings={(1, 4): 5.0})
    with pytest.raises(ValueError):
        SpinSystem(2, offsets_hz=(1.0,))


def test_pseudopure_is_recipe_default():
    recipe = PreparationRecipe(((1.0, PulseSequence()),))
    np.testing.assert_array_equal(run_recipe(recipe, ALANINE), pseudopure())
