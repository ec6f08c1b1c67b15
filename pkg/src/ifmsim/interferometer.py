"""Branch propagation through a square two-path interferometer.

Topology is fixed: a beamsplitter at L11 splits the source into two
localized branches, mirrors at L12 and L21 fold them, and a second
beamsplitter at L22 merges them into output ports a and b. The engine
tracks one complex amplitude per branch together with its momentum,
polarization, and accumulated path length.

Conventions used throughout:
  * at each element the two-port column is (u, v) with u the component
    whose momentum passes the element unchanged and v the reflected one;
    elements act by the rotation [[c, s], [-s, c]] of `port_matrix`;
  * a mirror is the angle pi/2 case: the populated port hops to the
    other port, picking up -1 when it arrives on the reflected side;
  * output port a continues the momentum of the u input at L22, port b
    continues the v input;
  * reported amplitudes are quoted relative to free flight over the
    shortest path, i.e. the common phase exp(i |p| L_min) is divided
    out, so an empty balanced square yields amplitude exactly -1 at
    port a.

An obstruction on one of the input-side arms removes amplitude
coherently: the blocked branch keeps a factor sqrt(1 - e) and the weight
e |amplitude|^2 is booked against the absorber.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .optics import (
    ElementKind,
    GaussianPacket,
    OpticalElement,
    PhotonMode,
    householder,
    locality_check,
    packet_overlap,
    port_matrix,
    reflect_mode,
)

VERTEX_IDS = ("L11", "L12", "L21", "L22")
ARM_PAIRS = (("L11", "L12"), ("L11", "L21"), ("L12", "L22"), ("L21", "L22"))
INPUT_ARM_PAIRS = (("L11", "L12"), ("L11", "L21"))

_EXPECTED_KINDS = {
    "L11": ElementKind.BEAMSPLITTER,
    "L12": ElementKind.MIRROR,
    "L21": ElementKind.MIRROR,
    "L22": ElementKind.BEAMSPLITTER,
}

_DIR_TOL = 1e-9


@dataclass
class Arm:
    """Directed arm of the square, with its physical length and a label."""

    start: str
    end: str
    length: float
    label: str

    def __post_init__(self):
        self.length = float(self.length)
        if not self.length > 0.0:
            raise ConfigurationError(
                f"arm {self.start}->{self.end} must have positive length, got {self.length}"
            )


@dataclass
class Obstruction:
    """Absorbing object on one arm; efficiency 1 removes the branch entirely."""

    arm: str
    efficiency: float = 1.0

    def __post_init__(self):
        self.efficiency = float(self.efficiency)
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(
                f"obstruction efficiency must lie in [0, 1], got {self.efficiency}"
            )


@dataclass
class Branch:
    """One localized component of the field during propagation."""

    amplitude: complex
    mode: PhotonMode
    vertex: str
    path_length: float
    reflected: bool


@dataclass(eq=False)
class InteractionEvent:
    """Record of amplitude removed by the obstruction."""

    arm: str
    position: np.ndarray
    absorbed_weight: float


@dataclass(eq=False)
class DetectionReport:
    """Final probabilities, detector-side momenta, and the port-a amplitude."""

    p_d1: float
    p_d2: float
    p_absorbed: float
    momentum_d1: np.ndarray
    momentum_d2: np.ndarray
    amplitude_d1: complex
    event: InteractionEvent | None = None


@dataclass(eq=False)
class Layout:
    """Complete description of one interferometer configuration.

    vertices maps the four ids to positions; elements maps each vertex to
    its optical element; arms is keyed by (start, end); detectors maps
    D1/D2 to output ports a/b. Validation happens on construction.
    """

    vertices: dict[str, np.ndarray]
    elements: dict[str, OpticalElement]
    arms: dict[tuple[str, str], Arm]
    source: PhotonMode
    source_width: float
    obstruction: Obstruction | None = None
    detectors: dict[str, str] = field(default_factory=lambda: {"D1": "a", "D2": "b"})

    def __post_init__(self):
        self.vertices = {k: np.asarray(v, dtype=float) for k, v in self.vertices.items()}
        for vid in VERTEX_IDS:
            if vid not in self.vertices:
                raise ConfigurationError(f"layout is missing vertex {vid}")
            if self.vertices[vid].shape != (3,):
                raise ConfigurationError(f"vertex {vid} position must be a 3-vector")
        for vid, kind in _EXPECTED_KINDS.items():
            element = self.elements.get(vid)
            if element is None:
                raise ConfigurationError(f"layout is missing the {kind.value} at {vid}")
            if element.kind is not kind:
                raise ConfigurationError(
                    f"vertex {vid} needs a {kind.value}, found a {element.kind.value}"
                )
            if element.vertex != vid:
                raise ConfigurationError(
                    f"element stored under {vid} claims vertex {element.vertex}"
                )
        for pair in ARM_PAIRS:
            if pair not in self.arms:
                raise ConfigurationError(f"layout is missing arm {pair[0]}->{pair[1]}")
        labels = [arm.label for arm in self.arms.values()]
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"arm labels must be unique, got {sorted(labels)}")
        self.source_width = float(self.source_width)
        if not self.source_width > 0.0:
            raise ConfigurationError(
                f"source packet width must be positive, got {self.source_width}"
            )
        if self.obstruction is not None:
            allowed = self.input_arm_labels()
            if self.obstruction.arm not in allowed:
                raise ConfigurationError(
                    f"obstruction arm {self.obstruction.arm!r} is not one of the "
                    f"input-side arms {sorted(allowed)}"
                )
        if set(self.detectors) != {"D1", "D2"}:
            raise ConfigurationError(
                f"detectors must map exactly D1 and D2, got {sorted(self.detectors)}"
            )
        ports = [self.detectors["D1"], self.detectors["D2"]]
        if sorted(ports) != ["a", "b"]:
            raise ConfigurationError(
                f"detectors must cover ports a and b once each, got {ports}"
            )

    def input_arm_labels(self) -> tuple[str, ...]:
        return tuple(self.arms[pair].label for pair in INPUT_ARM_PAIRS if pair in self.arms)

    def arm_by_label(self, label: str) -> Arm:
        for arm in self.arms.values():
            if arm.label == label:
                return arm
        raise KeyError(f"no arm labeled {label!r}")

    def __eq__(self, other):
        if not isinstance(other, Layout):
            return NotImplemented
        return (
            set(self.vertices) == set(other.vertices)
            and all(np.array_equal(self.vertices[k], other.vertices[k]) for k in self.vertices)
            and self.elements == other.elements
            and self.arms == other.arms
            and self.source == other.source
            and self.source_width == other.source_width
            and self.obstruction == other.obstruction
            and self.detectors == other.detectors
        )


@dataclass
class ShotCounts:
    """Tallies from repeated single-photon runs."""

    d1: int
    d2: int
    absorbed: int

    @property
    def total(self) -> int:
        return self.d1 + self.d2 + self.absorbed


def square_layout(arm_length: float = 1.0, momentum_magnitude: float = 1.0,
                  width: float = 0.05) -> Layout:
    """Balanced square in the xy plane, source traveling along +x.

    All four elements share the diagonal normal (1, -1, 0)/sqrt(2), which
    swaps the +x and +y directions; the polarization sits along z and is
    untouched by every reflection.
    """
    a = float(arm_length)
    if not a > 0.0:
        raise ValueError(f"arm length must be positive, got {a}")
    p = float(momentum_magnitude)
    if not p > 0.0:
        raise ValueError(f"momentum magnitude must be positive, got {p}")
    vertices = {
        "L11": np.array([0.0, 0.0, 0.0]),
        "L12": np.array([a, 0.0, 0.0]),
        "L21": np.array([0.0, a, 0.0]),
        "L22": np.array([a, a, 0.0]),
    }
    elements = {
        vid: OpticalElement(_EXPECTED_KINDS[vid], householder((1.0, -1.0, 0.0)), vid)
        for vid in VERTEX_IDS
    }
    labels = {
        ("L11", "L12"): "lower",
        ("L11", "L21"): "upper",
        ("L12", "L22"): "lower_exit",
        ("L21", "L22"): "upper_exit",
    }
    arms = {pair: Arm(pair[0], pair[1], a, labels[pair]) for pair in ARM_PAIRS}
    source = PhotonMode(momentum=(p, 0.0, 0.0), polarization=(0.0, 0.0, 1.0))
    return Layout(vertices=vertices, elements=elements, arms=arms,
                  source=source, source_width=width)


def with_obstruction(layout: Layout, arm: str, efficiency: float = 1.0) -> Layout:
    """New layout with an absorber on the named input-side arm.

    The original layout is left untouched. The arm must be one of the two
    arms leaving L11; anything else is a configuration error.
    """
    return replace(layout, obstruction=Obstruction(arm=arm, efficiency=efficiency))


def propagation_phase(length: float, momentum_magnitude: float) -> complex:
    """Free-flight phase exp(i |p| L) for a nonnegative path length."""
    length = float(length)
    momentum_magnitude = float(momentum_magnitude)
    if length < 0.0:
        raise ValueError(f"propagation length must be nonnegative, got {length}")
    if not momentum_magnitude > 0.0:
        raise ValueError(
            f"momentum magnitude must be positive, got {momentum_magnitude}"
        )
    return cmath.exp(1j * momentum_magnitude * length)


def _unit_direction(layout: Layout, start: str, end: str) -> np.ndarray:
    d = layout.vertices[end] - layout.vertices[start]
    n = float(np.linalg.norm(d))
    if n == 0.0:
        raise ConfigurationError(f"vertices {start} and {end} coincide")
    return d / n


def _certify_locality(layout: Layout, branches, tolerance: float) -> None:
    # branch envelopes sit at the midpoints of the two input-side arms
    packets = []
    for branch, mirror_vertex in branches:
        mid = 0.5 * (layout.vertices["L11"] + layout.vertices[mirror_vertex])
        packets.append(GaussianPacket(center=mid, width=layout.source_width,
                                      carrier=branch.mode))
    if not locality_check(packets[0], packets[1], tolerance):
        overlap = packet_overlap(packets[0], packets[1])
        raise ConfigurationError(
            f"branch packets overlap {overlap:.3e} at width {layout.source_width}; "
            "treating the branches as independently localized needs arm "
            "separations well beyond the packet width"
        )


def _traverse(layout: Layout, branch: Branch, end: str, path_mismatch: float,
              tally: dict) -> None:
    pair = (branch.vertex, end)
    arm = layout.arms[pair]
    branch.path_length += arm.length
    if pair == ("L11", "L12"):
        branch.path_length += path_mismatch
    obstruction = layout.obstruction
    if obstruction is not None and obstruction.arm == arm.label:
        weight = obstruction.efficiency * abs(branch.amplitude) ** 2
        tally["absorbed"] += weight
        tally["event"] = InteractionEvent(
            arm=arm.label,
            position=0.5 * (layout.vertices[pair[0]] + layout.vertices[pair[1]]),
            absorbed_weight=weight,
        )
        branch.amplitude *= math.sqrt(1.0 - obstruction.efficiency)
    branch.vertex = end


def _propagate(layout: Layout, path_mismatch: float,
               locality_tolerance: float) -> DetectionReport:
    source = layout.source
    p_mag = source.energy
    bs1 = layout.elements["L11"]
    bs2 = layout.elements["L22"]

    # decide which mirror the momentum-keeping branch flies toward
    p_hat = source.momentum / p_mag
    directions = {v: _unit_direction(layout, "L11", v) for v in ("L12", "L21")}
    matches = [v for v, d in directions.items()
               if np.allclose(d, p_hat, rtol=0.0, atol=_DIR_TOL)]
    if len(matches) != 1:
        raise ConfigurationError(
            "source momentum must point along exactly one arm leaving L11; "
            f"arm directions are {directions['L12']} and {directions['L21']}"
        )
    t_vertex = matches[0]
    r_vertex = "L21" if t_vertex == "L12" else "L12"

    reflected_mode = reflect_mode(bs1.reflection, source)
    if not np.allclose(reflected_mode.momentum / p_mag, directions[r_vertex],
                       rtol=0.0, atol=_DIR_TOL):
        raise ConfigurationError(
            f"beamsplitter normal at L11 does not steer the reflected branch "
            f"along the arm toward {r_vertex}"
        )

    m1 = port_matrix(bs1)
    t_branch = Branch(complex(m1[0, 0]), source, "L11", 0.0, reflected=False)
    r_branch = Branch(complex(m1[1, 0]), reflected_mode, "L11", 0.0, reflected=True)
    routing = ((t_branch, t_vertex), (r_branch, r_vertex))

    _certify_locality(layout, routing, locality_tolerance)

    tally = {"absorbed": 0.0, "event": None}
    for branch, mirror_vertex in routing:
        _traverse(layout, branch, mirror_vertex, path_mismatch, tally)

    for branch, mirror_vertex in routing:
        mirror = layout.elements[mirror_vertex]
        mm = port_matrix(mirror)
        # populated port hops to the other one; entries are exactly +-1
        branch.amplitude *= mm[0, 1] if branch.reflected else mm[1, 0]
        branch.mode = reflect_mode(mirror.reflection, branch.mode)
        branch.reflected = not branch.reflected
        outgoing = branch.mode.momentum / p_mag
        if not np.allclose(outgoing, _unit_direction(layout, mirror_vertex, "L22"),
                           rtol=0.0, atol=_DIR_TOL):
            raise ConfigurationError(
                f"mirror at {mirror_vertex} does not steer its branch along "
                f"the arm toward L22"
            )

    for branch, _ in routing:
        _traverse(layout, branch, "L22", path_mismatch, tally)

    if t_branch.reflected == r_branch.reflected:
        raise ConfigurationError("branches reach L22 on the same port")
    u_branch = t_branch if not t_branch.reflected else r_branch
    v_branch = r_branch if u_branch is t_branch else t_branch

    k_u = u_branch.mode.momentum
    k_v = v_branch.mode.momentum
    if np.linalg.norm(bs2.reflection.matrix @ k_v - k_u) > _DIR_TOL * p_mag:
        raise ConfigurationError(
            "branches reach L22 with momenta the beamsplitter cannot merge "
            "into shared output ports"
        )

    # quote amplitudes relative to free flight over the shortest path
    l_ref = min(t_branch.path_length, r_branch.path_length)
    for branch, _ in routing:
        branch.amplitude *= propagation_phase(branch.path_length - l_ref, p_mag)

    m2 = port_matrix(bs2)
    out = m2 @ np.array([u_branch.amplitude, v_branch.amplitude])
    by_port = {"a": (complex(out[0]), k_u.copy()), "b": (complex(out[1]), k_v.copy())}
    amp_d1, mom_d1 = by_port[layout.detectors["D1"]]
    amp_d2, mom_d2 = by_port[layout.detectors["D2"]]

    return DetectionReport(
        p_d1=abs(amp_d1) ** 2,
        p_d2=abs(amp_d2) ** 2,
        p_absorbed=tally["absorbed"],
        momentum_d1=mom_d1,
        momentum_d2=mom_d2,
        amplitude_d1=amp_d1,
        event=tally["event"],
    )


def propagate_analytic(layout: Layout, locality_tolerance: float = 1e-6) -> DetectionReport:
    """Exact single-photon propagation of a layout.

    Certifies branch locality first, validates that reflections steer
    momenta along the arms, and returns probabilities that sum to one
    with the absorbed weight.
    """
    return _propagate(layout, path_mismatch=0.0, locality_tolerance=locality_tolerance)


def fringe_scan(layout: Layout, mismatch_range, steps: int,
                locality_tolerance: float = 1e-6) -> np.ndarray:
    """Sweep an extra length on the L11->L12 arm and tabulate port powers.

    Returns an array of rows (delta_l, p_d1, p_d2). For the balanced
    square this traces p_d1 = cos^2(|p| delta_l / 2). A layout holding an
    obstruction cannot show clean fringes, so that is rejected.
    """
    if layout.obstruction is not None:
        raise ConfigurationError(
            "fringe scan needs an unobstructed interferometer; remove the absorber first"
        )
    steps = int(steps)
    if steps < 2:
        raise ValueError(f"a fringe scan needs at least 2 steps, got {steps}")
    lo, hi = (float(x) for x in mismatch_range)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("mismatch range must be finite")
    rows = np.empty((steps, 3))
    for i, dl in enumerate(np.linspace(lo, hi, steps)):
        report = _propagate(layout, path_mismatch=float(dl),
                            locality_tolerance=locality_tolerance)
        rows[i] = (dl, report.p_d1, report.p_d2)
    return rows


def _chunk_counts(seed: int, start: int, count: int, t1: float, t2: float):
    bitgen = np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF)
    bitgen.advance(start)
    raw = bitgen.random_raw(4 * count)[::4]
    u = (raw >> np.uint64(11)) * 2.0 ** -53
    n1 = int(np.count_nonzero(u < t1))
    n12 = int(np.count_nonzero(u < t2))
    return n1, n12 - n1, count - n12


def shot_batches(layout: Layout, n_shots: int, seed: int,
                 batch_size: int) -> list[tuple[int, ShotCounts]]:
    """Counts per batch of shots, as (start index, counts) rows.

    Shot s always consumes counter block s of a Philox stream keyed by
    the seed (one 256-bit block per shot, first 64-bit word kept), so the
    outcome of every shot is fixed by (seed, s) alone. Splitting the same
    run into different batch sizes permutes nothing: concatenating rows
    reproduces `run_shots` exactly.
    """
    n_shots = int(n_shots)
    if n_shots < 1:
        raise ValueError(f"shot count must be positive, got {n_shots}")
    batch_size = int(batch_size)
    if batch_size < 1:
        raise ValueError(f"batch size must be positive, got {batch_size}")
    report = propagate_analytic(layout)
    t1 = report.p_d1
    t2 = report.p_d1 + report.p_d2
    rows = []
    for start in range(0, n_shots, batch_size):
        m = min(batch_size, n_shots - start)
        d1, d2, absorbed = _chunk_counts(int(seed), start, m, t1, t2)
        rows.append((start, ShotCounts(d1, d2, absorbed)))
    return rows


def run_shots(layout: Layout, n_shots: int, seed: int,
              chunk_size: int = 65536) -> ShotCounts:
    """Monte Carlo detector tallies for repeated single-photon runs.

    Outcomes follow the exact probabilities of `propagate_analytic` via a
    counter-based generator; see `shot_batches` for the per-shot scheme
    that makes the totals independent of chunking.
    """
    totals = ShotCounts(0, 0, 0)
    for _, counts in shot_batches(layout, n_shots, seed, chunk_size):
        totals = ShotCounts(totals.d1 + counts.d1, totals.d2 + counts.d2,
                            totals.absorbed + counts.absorbed)
    return totals
