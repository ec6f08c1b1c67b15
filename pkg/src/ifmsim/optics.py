"""Mirror and beamsplitter algebra for a two-path interferometer.

Every optical element is modeled as a plane with unit normal n. Momenta
reflect through the plane by the Householder matrix R = I - 2 n n^T, and
the pair of field amplitudes meeting at an element mixes by a real
two-port rotation whose angle is fixed by the element kind: pi/2 for a
mirror (full exchange), pi/4 for a balanced beamsplitter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError

_UNIT_TOL = 1e-9


def _as_vec3(value, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{what} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} must be finite")
    return arr


@dataclass(eq=False)
class PhotonMode:
    """A single-photon mode label: momentum 3-vector plus transverse polarization.

    The polarization must be a unit vector orthogonal to the momentum;
    both constraints are checked on construction.
    """

    momentum: np.ndarray
    polarization: np.ndarray

    def __post_init__(self):
        self.momentum = _as_vec3(self.momentum, "momentum")
        self.polarization = _as_vec3(self.polarization, "polarization")
        if self.energy == 0.0:
            raise ValueError("momentum must be nonzero")
        if abs(np.linalg.norm(self.polarization) - 1.0) > _UNIT_TOL:
            raise ValueError("polarization must be a unit vector")
        if abs(float(self.polarization @ self.momentum)) > _UNIT_TOL * self.energy:
            raise ValueError("polarization must be transverse to the momentum")

    @property
    def energy(self) -> float:
        """Photon energy |p| (units with c = hbar = 1)."""
        return float(np.linalg.norm(self.momentum))

    def __eq__(self, other):
        if not isinstance(other, PhotonMode):
            return NotImplemented
        return np.array_equal(self.momentum, other.momentum) and np.array_equal(
            self.polarization, other.polarization
        )


@dataclass(eq=False)
class HouseholderReflection:
    """Reflection through the plane orthogonal to a unit normal."""

    normal: np.ndarray
    matrix: np.ndarray

    @property
    def spacetime(self) -> np.ndarray:
        """4x4 block form acting on (t, x, y, z): time untouched."""
        out = np.eye(4)
        out[1:, 1:] = self.matrix
        return out

    def __eq__(self, other):
        if not isinstance(other, HouseholderReflection):
            return NotImplemented
        return np.array_equal(self.normal, other.normal)


def householder(normal) -> HouseholderReflection:
    """Build the reflection R = I - 2 n n^T for a (not necessarily unit) normal.

    R is symmetric and involutive with det R = -1. A zero normal has no
    reflection plane and is rejected.
    """
    n = _as_vec3(normal, "normal")
    length = float(np.linalg.norm(n))
    if length == 0.0:
        raise ConfigurationError("degenerate normal: zero vector defines no plane")
    # skip the division when already unit to rounding: renormalizing would
    # only churn last bits and make normalization non-idempotent
    if abs(length - 1.0) > 4.0 * np.finfo(float).eps:
        n = n / length
    return HouseholderReflection(normal=n, matrix=np.eye(3) - 2.0 * np.outer(n, n))


def reflect_mode(reflection: HouseholderReflection, mode: PhotonMode) -> PhotonMode:
    """Apply a reflection to both the momentum and the polarization of a mode."""
    return PhotonMode(
        momentum=reflection.matrix @ mode.momentum,
        polarization=reflection.matrix @ mode.polarization,
    )


class ElementKind(str, Enum):
    MIRROR = "mirror"
    BEAMSPLITTER = "beamsplitter"


_KIND_ANGLE = {ElementKind.MIRROR: math.pi / 2, ElementKind.BEAMSPLITTER: math.pi / 4}


@dataclass(eq=False)
class OpticalElement:
    """A mirror or beamsplitter sitting at a named vertex of the layout."""

    kind: ElementKind
    reflection: HouseholderReflection
    vertex: str

    def __post_init__(self):
        self.kind = ElementKind(self.kind)

    @property
    def alpha(self) -> float:
        """Two-port mixing angle implied by the element kind."""
        return _KIND_ANGLE[self.kind]

    def __eq__(self, other):
        if not isinstance(other, OpticalElement):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.vertex == other.vertex
            and self.reflection == other.reflection
        )


def two_port_rotation(alpha: float) -> np.ndarray:
    """Rotation [[cos a, sin a], [-sin a, cos a]] mixing the two port amplitudes.

    Acting on a column (u, v) of amplitudes, where u rides the port that
    keeps its momentum at the element and v rides the reflected port.
    """
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, s], [-s, c]])


def port_matrix(element: OpticalElement) -> np.ndarray:
    """Two-port amplitude matrix of an element (angle fixed by its kind)."""
    return two_port_rotation(element.alpha)


@dataclass(eq=False)
class GaussianPacket:
    """Gaussian envelope of a branch: center position, common width, carrier mode."""

    center: np.ndarray
    width: float
    carrier: PhotonMode

    def __post_init__(self):
        self.center = _as_vec3(self.center, "center")
        self.width = float(self.width)
        if not self.width > 0.0:
            raise ValueError("packet width must be positive")

    def __eq__(self, other):
        if not isinstance(other, GaussianPacket):
            return NotImplemented
        return (
            np.array_equal(self.center, other.center)
            and self.width == other.width
            and self.carrier == other.carrier
        )


def packet_overlap(first: GaussianPacket, second: GaussianPacket) -> float:
    """|<w1|w2>| for two equal-width Gaussian envelopes.

    Equal widths are required; the overlap is exp(-d^2 / (4 sigma^2)) with
    d the center separation. Value is 1 at zero separation and strictly
    decreasing in d.
    """
    if first.width != second.width:
        raise ConfigurationError(
            f"packet widths differ ({first.width} vs {second.width}); "
            "overlap is defined here for equal widths only"
        )
    d2 = float(np.sum((first.center - second.center) ** 2))
    return math.exp(-d2 / (4.0 * first.width**2))


def locality_check(first: GaussianPacket, second: GaussianPacket, tolerance: float = 1e-6) -> bool:
    """True when two branch envelopes are effectively disjoint.

    The check passes when the overlap falls below `tolerance`, which must
    sit strictly inside (0, 1).
    """
    if not 0.0 < tolerance < 1.0:
        raise ValueError("locality tolerance must lie strictly between 0 and 1")
    return packet_overlap(first, second) < tolerance
