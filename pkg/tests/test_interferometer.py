import cmath
import math
from dataclasses import replace

import numpy as np
import pytest

from ifmsim import (
    Arm,
    ConfigurationError,
    Layout,
    Obstruction,
    PhotonMode,
    build_space,
    fringe_scan,
    propagate_analytic,
    propagation_phase,
    run_shots,
    shot_batches,
    square_layout,
    v_unitary,
    with_obstruction,
)

ORACLE_HALF_EFFICIENCY = (0.25, 0.7285533905932738, 0.021446609406726238)


def test_empty_square_bright_and_dark_ports(square):
    report = propagate_analytic(square)
    assert abs(report.p_d1 - 1.0) < 1e-12
    assert report.p_d2 < 1e-12
    assert report.p_absorbed == 0.0
    assert report.event is None
    # output amplitude is -1 relative to free flight over the same distance
    assert abs(report.amplitude_d1 - (-1.0)) < 1e-12


def test_detector_momenta(square):
    report = propagate_analytic(square)
    p = square.source.momentum
    np.testing.assert_allclose(report.momentum_d1, p, atol=1e-12)
    composed = (
        square.elements["L22"].reflection.matrix
        @ square.elements["L21"].reflection.matrix
        @ square.elements["L11"].reflection.matrix
    )
    np.testing.assert_allclose(report.momentum_d2, composed @ p, atol=1e-12)
    # same thing as the single mirror reflection on this geometry
    np.testing.assert_allclose(
        report.momentum_d2, square.elements["L12"].reflection.matrix @ p, atol=1e-12
    )
    assert abs(np.linalg.norm(report.momentum_d2) - np.linalg.norm(p)) < 1e-12


@pytest.mark.parametrize("arm", ["lower", "upper"])
def test_full_obstruction_quarters(square, arm):
    report = propagate_analytic(with_obstruction(square, arm))
    assert abs(report.p_d1 - 0.25) < 1e-12
    assert abs(report.p_d2 - 0.25) < 1e-12
    assert abs(report.p_absorbed - 0.5) < 1e-12
    assert report.event is not None
    assert report.event.arm == arm
    assert abs(report.event.absorbed_weight - 0.5) < 1e-12


def test_obstruction_event_position(square):
    report = propagate_analytic(with_obstruction(square, "lower"))
    np.testing.assert_allclose(report.event.position, [0.5, 0.0, 0.0], atol=1e-15)


def test_half_efficiency_oracle_values(square):
    report = propagate_analytic(with_obstruction(square, "lower", 0.5))
    p_abs, p_d1, p_d2 = ORACLE_HALF_EFFICIENCY
    assert abs(report.p_absorbed - p_abs) < 1e-12
    assert abs(report.p_d1 - p_d1) < 1e-12
    assert abs(report.p_d2 - p_d2) < 1e-12


def test_zero_efficiency_is_transparent(square):
    report = propagate_analytic(with_obstruction(square, "lower", 0.0))
    assert abs(report.p_d1 - 1.0) < 1e-12
    assert report.event is not None and report.event.absorbed_weight == 0.0


def test_probability_conservation_over_efficiencies(square):
    for arm in ("lower", "upper"):
        for eff in np.linspace(0.0, 1.0, 21):
            report = propagate_analytic(with_obstruction(square, arm, float(eff)))
            total = report.p_d1 + report.p_d2 + report.p_absorbed
            assert abs(total - 1.0) < 1e-12


def test_with_obstruction_leaves_original_alone(square):
    blocked = with_obstruction(square, "upper", 0.7)
    assert square.obstruction is None
    assert blocked.obstruction == Obstruction("upper", 0.7)
    assert blocked is not square


def test_with_obstruction_validation(square):
    with pytest.raises(ConfigurationError, match="input-side"):
        with_obstruction(square, "lower_exit")
    with pytest.raises(ConfigurationError, match="lower"):
        # the error lists the valid labels
        with_obstruction(square, "nowhere")
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        with_obstruction(square, "lower", 1.5)


def test_fock_chain_reproduces_empty_square(two_mode_space):
    """Independent route: the truncated-space rotations for splitter,
    mirror, splitter composed on |1 photon, mode p> must give back the
    engine's -1 amplitude on the same mode."""
    space = two_mode_space
    chain = (
        v_unitary(space, ("p", "q"), math.pi / 4)
        @ v_unitary(space, ("p", "q"), math.pi / 2)
        @ v_unitary(space, ("p", "q"), math.pi / 4)
    )
    one_p = np.zeros(space.dim, dtype=complex)
    one_p[space.index_of((1, 0))] = 1.0
    out = chain @ one_p
    assert np.linalg.norm(out + one_p) < 1e-12

    engine = propagate_analytic(square_layout())
    assert abs(out[space.index_of((1, 0))] - engine.amplitude_d1) < 1e-12


@pytest.mark.parametrize("efficiency", [1.0, 0.5, 0.25])
def test_fock_chain_with_absorber_matches_engine(two_mode_space, efficiency):
    # Kraus damping of the blocked mode between splitter and mirror,
    # built directly in the truncated space
    space = two_mode_space
    pair = ("p", "q")
    i_p = space.index_of((1, 0))
    state = np.zeros(space.dim, dtype=complex)
    state[i_p] = 1.0
    state = v_unitary(space, pair, math.pi / 4) @ state
    absorbed = efficiency * abs(state[i_p]) ** 2
    state[i_p] *= math.sqrt(1.0 - efficiency)
    state = v_unitary(space, pair, math.pi / 4) @ v_unitary(space, pair, math.pi / 2) @ state

    engine = propagate_analytic(with_obstruction(square_layout(), "lower", efficiency))
    assert abs(absorbed - engine.p_absorbed) < 1e-12
    assert abs(abs(state[i_p]) ** 2 - engine.p_d1) < 1e-12
    assert abs(abs(state[space.index_of((0, 1))]) ** 2 - engine.p_d2) < 1e-12


def test_propagation_phase_values():
    assert propagation_phase(0.0, 2.5) == 1.0
    z = propagation_phase(1.25, 2.0)
    assert abs(z - cmath.exp(2.5j)) < 1e-15
    assert abs(abs(z) - 1.0) < 1e-15
    with pytest.raises(ValueError, match="nonnegative"):
        propagation_phase(-0.1, 1.0)
    with pytest.raises(ValueError, match="positive"):
        propagation_phase(1.0, 0.0)


def test_unequal_exit_arm_acts_like_mismatch():
    # lengthening one exit arm by d shifts the relative phase by |p| d
    d = 0.37
    layout = square_layout()
    layout.arms[("L12", "L22")] = replace(layout.arms[("L12", "L22")], length=1.0 + d)
    report = propagate_analytic(layout)
    assert abs(report.p_d1 - math.cos(d / 2.0) ** 2) < 1e-12


def test_fringe_scan_cosine_law(square):
    p_mag = square.source.energy
    rows = fringe_scan(square, (0.0, 2.0 * math.pi), 33)
    assert rows.shape == (33, 3)
    for delta_l, p_d1, p_d2 in rows:
        expected = math.cos(p_mag * delta_l / 2.0) ** 2
        assert abs(p_d1 - expected) < 1e-12
        assert abs(p_d1 + p_d2 - 1.0) < 1e-12
    assert rows[0][1] == propagate_analytic(square).p_d1


def test_fringe_scan_validation(square, bomb_layout):
    with pytest.raises(ConfigurationError, match="unobstructed"):
        fringe_scan(bomb_layout, (0.0, 1.0), 5)
    with pytest.raises(ValueError, match="steps"):
        fringe_scan(square, (0.0, 1.0), 1)
    with pytest.raises(ValueError, match="finite"):
        fringe_scan(square, (0.0, math.inf), 5)


def test_locality_certification_gates_propagation():
    wide = square_layout(width=10.0)
    with pytest.raises(ConfigurationError, match="overlap"):
        propagate_analytic(wide)
    # same geometry passes once the packets are narrow
    propagate_analytic(square_layout(width=0.05))
    # or with a tolerance loose enough to accept the overlap
    propagate_analytic(wide, locality_tolerance=0.9999)


def test_misaligned_source_rejected(square):
    diag = 1.0 / math.sqrt(2.0)
    bad = replace(square, source=PhotonMode((diag, diag, 0.0), (0.0, 0.0, 1.0)))
    with pytest.raises(ConfigurationError, match="exactly one arm"):
        propagate_analytic(bad)


def test_bad_splitter_normal_rejected(square):
    from ifmsim import ElementKind, OpticalElement, householder

    elements = dict(square.elements)
    # normal along x reflects the beam straight back instead of up
    elements["L11"] = OpticalElement(ElementKind.BEAMSPLITTER, householder((1.0, 0.0, 0.0)), "L11")
    bad = replace(square, elements=elements)
    with pytest.raises(ConfigurationError, match="steer"):
        propagate_analytic(bad)


def test_layout_validation_errors(square):
    with pytest.raises(ConfigurationError, match="missing vertex"):
        vertices = {k: v for k, v in square.vertices.items() if k != "L21"}
        Layout(vertices, square.elements, square.arms, square.source, 0.05)
    with pytest.raises(ConfigurationError, match="needs a beamsplitter"):
        elements = dict(square.elements)
        elements["L12"], elements["L11"] = elements["L11"], elements["L12"]
        Layout(square.vertices, elements, square.arms, square.source, 0.05)
    with pytest.raises(ConfigurationError, match="missing arm"):
        arms = {k: v for k, v in square.arms.items() if k != ("L12", "L22")}
        Layout(square.vertices, square.elements, arms, square.source, 0.05)
    with pytest.raises(ConfigurationError, match="unique"):
        arms = dict(square.arms)
        arms[("L12", "L22")] = replace(arms[("L12", "L22")], label="upper")
        Layout(square.vertices, square.elements, arms, square.source, 0.05)
    with pytest.raises(ConfigurationError, match="width"):
        Layout(square.vertices, square.elements, square.arms, square.source, 0.0)
    with pytest.raises(ConfigurationError, match="ports a and b"):
        Layout(square.vertices, square.elements, square.arms, square.source, 0.05,
               detectors={"D1": "a", "D2": "a"})


def test_arm_length_must_be_positive():
    with pytest.raises(ConfigurationError, match="positive length"):
        Arm("L11", "L12", 0.0, "lower")


def test_square_layout_argument_validation():
    with pytest.raises(ValueError):
        square_layout(arm_length=0.0)
    with pytest.raises(ValueError):
        square_layout(momentum_magnitude=-1.0)


def test_shots_all_bright_without_obstruction(square):
    counts = run_shots(square, 1000, seed=7)
    assert (counts.d1, counts.d2, counts.absorbed) == (1000, 0, 0)


def test_shots_reproducible_and_chunk_invariant(bomb_layout):
    baseline = run_shots(bomb_layout, 20_000, seed=123)
    assert baseline.total == 20_000
    assert run_shots(bomb_layout, 20_000, seed=123) == baseline
    for chunk in (1, 13, 999, 20_000, 1 << 20):
        again = run_shots(bomb_layout, 20_000, seed=123, chunk_size=chunk)
        assert again == baseline
    assert run_shots(bomb_layout, 20_000, seed=124) != baseline


def test_shot_batches_merge_to_totals(bomb_layout):
    total = run_shots(bomb_layout, 5_000, seed=9)
    rows = shot_batches(bomb_layout, 5_000, seed=9, batch_size=777)
    assert [start for start, _ in rows] == list(range(0, 5_000, 777))
    assert sum(c.d1 for _, c in rows) == total.d1
    assert sum(c.d2 for _, c in rows) == total.d2
    assert sum(c.absorbed for _, c in rows) == total.absorbed


def test_shots_validation(square):
    with pytest.raises(ValueError, match="positive"):
        run_shots(square, 0, seed=1)
    with pytest.raises(ValueError, match="batch size"):
        shot_batches(square, 10, seed=1, batch_size=0)
