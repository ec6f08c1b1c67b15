"""Residual checks of the operator identities behind the simulator.

Each check computes a numerical residual and compares it against a
pinned tolerance; `run_verification` prints one line per check and
reports overall success. These run the truncated occupation-number
oracle against the closed-form optics, so a failure flags a real
algebra break, not a loose test.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from . import fock
from .optics import GaussianPacket, PhotonMode, householder, packet_overlap, two_port_rotation

_ANGLE_GRID = tuple(np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)) + (
    math.pi / 7, math.pi / 4, math.pi / 2)


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def _space(n_max=6):
    return fock.build_space(("p", "q"), n_max)


def fock_checks(n_max: int = 6) -> list[CheckResult]:
    space = _space(n_max)
    pair = ("p", "q")
    results = []

    worst = 0.0
    for alpha in (math.pi / 7, math.pi / 4, 1.0):
        v = fock.v_unitary(space, pair, alpha)
        worst = max(worst, float(np.max(np.abs(v.conj().T @ v - np.eye(space.dim)))))
    results.append(CheckResult("rotation unitarity", worst, 1e-12))

    worst = max(fock.rotation_check(space, pair, alpha) for alpha in _ANGLE_GRID)
    results.append(CheckResult("ladder conjugation (restricted)", worst, 1e-9))

    # the same residual on the full truncated space must blow up: the
    # truncation edge is real, and confinement to the buffered subspace
    # is exactly what the restricted check certifies
    full = fock.rotation_check(space, pair, math.pi / 4, restrict=False)
    confinement = 1.0 if full < 1e-3 else 0.0
    results.append(CheckResult("truncation edge visible (full space)", confinement, 0.0))

    worst = max(fock.commutator_preservation_check(space, pair, alpha)
                for alpha in (math.pi / 7, math.pi / 4, math.pi / 2))
    results.append(CheckResult("commutator preservation", worst, 1e-10))

    worst = 0.0
    for alpha in (0.3, math.pi / 4, 2.0):
        prod = fock.v_unitary(space, pair, alpha) @ fock.v_unitary(space, pair, -alpha)
        worst = max(worst, float(np.max(np.abs(prod - np.eye(space.dim)))))
    results.append(CheckResult("inverse at negated angle", worst, 1e-12))

    worst = 0.0
    for a, b in ((0.2, 0.5), (math.pi / 4, math.pi / 2), (-0.7, 1.1)):
        lhs = fock.v_unitary(space, pair, a) @ fock.v_unitary(space, pair, b)
        rhs = fock.v_unitary(space, pair, a + b)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    results.append(CheckResult("one-parameter group law", worst, 1e-10))

    n_total = fock.number_operator(space)
    worst = 0.0
    for alpha in (math.pi / 7, math.pi / 2):
        v = fock.v_unitary(space, pair, alpha)
        worst = max(worst, float(np.max(np.abs(fock.commutator(n_total, v)))))
    results.append(CheckResult("photon number conserved", worst, 1e-10))

    # [a, a+] is the identity except a single -n_max entry at the top state
    a = fock.ladder(space, "p", "lowering")
    comm = fock.commutator(a, a.conj().T)
    expected = np.eye(space.dim, dtype=np.complex128)
    for idx in range(space.dim):
        if space.occupations[idx, 0] == n_max:
            expected[idx, idx] = -n_max
    worst = float(np.max(np.abs(comm - expected)))
    results.append(CheckResult("ladder truncation signature", worst, 1e-12))

    return results


def optics_checks(samples: int = 1000, seed: int = 20260822) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []

    worst_energy = 0.0
    worst_transverse = 0.0
    worst_det = 0.0
    worst_invol = 0.0
    worst_orth = 0.0
    for _ in range(samples):
        normal = rng.normal(size=3)
        while np.linalg.norm(normal) < 1e-3:
            normal = rng.normal(size=3)
        refl = householder(normal)
        r = refl.matrix
        worst_det = max(worst_det, abs(float(np.linalg.det(r)) + 1.0))
        worst_invol = max(worst_invol, float(np.max(np.abs(r @ r - np.eye(3)))))
        worst_orth = max(worst_orth, float(np.max(np.abs(r.T @ r - np.eye(3)))))

        p = rng.normal(size=3) * rng.uniform(0.1, 10.0)
        while np.linalg.norm(p) < 1e-6:
            p = rng.normal(size=3)
        pol = np.cross(p, rng.normal(size=3))
        while np.linalg.norm(pol) < 1e-9:
            pol = np.cross(p, rng.normal(size=3))
        pol = pol / np.linalg.norm(pol)
        mode = PhotonMode(momentum=p, polarization=pol)
        out_p = r @ mode.momentum
        out_pol = r @ mode.polarization
        worst_energy = max(worst_energy,
                           abs(float(np.linalg.norm(out_p)) - mode.energy))
        worst_transverse = max(worst_transverse, abs(float(out_pol @ out_p)))
    results.append(CheckResult("reflection preserves |p|", worst_energy, 1e-12))
    results.append(CheckResult("reflection keeps transversality", worst_transverse, 1e-11))
    results.append(CheckResult("reflection determinant -1", worst_det, 1e-12))
    results.append(CheckResult("reflection involutive", worst_invol, 1e-14))
    results.append(CheckResult("reflection orthogonal", worst_orth, 1e-14))

    worst = 0.0
    for alpha in _ANGLE_GRID:
        m = two_port_rotation(alpha)
        worst = max(worst, float(np.max(np.abs(m @ two_port_rotation(-alpha) - np.eye(2)))))
        worst = max(worst, abs(float(np.linalg.det(m)) - 1.0))
    results.append(CheckResult("port rotation inverse and det", worst, 1e-15))

    carrier = PhotonMode(momentum=(1.0, 0.0, 0.0), polarization=(0.0, 0.0, 1.0))
    base = GaussianPacket(center=(0.0, 0.0, 0.0), width=0.3, carrier=carrier)
    overlaps = [packet_overlap(base, GaussianPacket(center=(d, 0.0, 0.0), width=0.3,
                                                    carrier=carrier))
                for d in np.linspace(0.0, 5.0, 50)]
    rise = max(b - a for a, b in zip(overlaps, overlaps[1:]))
    results.append(CheckResult("packet overlap monotone", max(0.0, rise), 0.0))

    return results


def run_verification(stream=None) -> bool:
    """Run every check, print one PASS/FAIL line each, return overall success."""
    if stream is None:
        stream = sys.stdout
    results = fock_checks() + optics_checks()
    ok = True
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        ok = ok and result.passed
        print(f"[{status}] {result.name}: residual {result.residual:.3e} "
              f"(tolerance {result.tolerance:.1e})", file=stream)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed", file=stream)
    return ok
