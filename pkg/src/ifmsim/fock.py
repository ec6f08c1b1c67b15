"""Truncated occupation-number oracle for the interferometer algebra.

The analytic engine tracks one complex amplitude per branch. This module
rebuilds the same physics as dense matrices on a truncated multimode
occupation basis, so the closed-form rules elsewhere in the package can
be checked against brute-force linear algebra instead of against
themselves.

Basis conventions:
  * modes are an ordered tuple of string ids;
  * each mode holds 0..n_max quanta, so the space has (n_max+1)^k states;
  * basis states are ordered lexicographically by occupation tuple with
    the first mode most significant; the vacuum is index 0.

Truncation bends the algebra at the top of the ladder: [a, a+] equals
the identity except for a single diagonal entry -n_max at the fully
occupied state of that mode. All identities checked here are exact on
the subspace that keeps a buffer below the cap, and the checks expose
the restriction explicitly rather than hiding the artifact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

DEFAULT_DIM_CAP = 100_000

_KINDS = ("lowering", "raising")


@dataclass(eq=False)
class FockSpace:
    """Truncated multimode occupation space with a precomputed basis table."""

    modes: tuple[str, ...]
    n_max: int
    dim: int
    occupations: np.ndarray = field(repr=False)  # (dim, len(modes)) int array

    def mode_position(self, mode: str) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise KeyError(f"unknown mode id {mode!r}; known modes: {list(self.modes)}") from None

    def index_of(self, occupation) -> int:
        """Basis index of an occupation tuple (inverse of `occupation_of`)."""
        occ = tuple(int(n) for n in occupation)
        if len(occ) != len(self.modes):
            raise ValueError(f"occupation must list {len(self.modes)} entries, got {len(occ)}")
        d = self.n_max + 1
        index = 0
        for n in occ:
            if not 0 <= n <= self.n_max:
                raise ValueError(f"occupation {n} outside 0..{self.n_max}")
            index = index * d + n
        return index

    def occupation_of(self, index: int) -> tuple[int, ...]:
        return tuple(int(n) for n in self.occupations[index])


def build_space(modes, n_max: int, dim_cap: int = DEFAULT_DIM_CAP) -> FockSpace:
    """Construct a truncated space for the given mode ids.

    Rejects duplicate mode ids, n_max < 1, and any request whose basis
    dimension (n_max+1)^len(modes) exceeds `dim_cap`.
    """
    modes = tuple(str(m) for m in modes)
    if len(modes) == 0:
        raise ValueError("at least one mode id is required")
    if len(set(modes)) != len(modes):
        raise ValueError(f"duplicate mode ids in {list(modes)}")
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    d = n_max + 1
    dim = d ** len(modes)
    if dim > dim_cap:
        raise ValueError(
            f"basis dimension (n_max+1)^n_modes = {d}^{len(modes)} = {dim} "
            f"exceeds the cap of {dim_cap}"
        )
    occupations = np.array(list(itertools.product(range(d), repeat=len(modes))), dtype=np.int64)
    return FockSpace(modes=modes, n_max=n_max, dim=dim, occupations=occupations)


def _single_mode_lowering(d: int) -> np.ndarray:
    a = np.zeros((d, d), dtype=np.complex128)
    for n in range(1, d):
        a[n - 1, n] = math.sqrt(n)
    return a


def ladder(space: FockSpace, mode: str, kind: str) -> np.ndarray:
    """Dense lowering or raising operator for one mode of the space.

    Built as kron(I, ..., a, ..., I) with the single-mode block at the
    position matching the basis ordering.
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    pos = space.mode_position(mode)
    d = space.n_max + 1
    a = _single_mode_lowering(d)
    if kind == "raising":
        a = a.conj().T
    left = np.eye(d ** pos, dtype=np.complex128)
    right = np.eye(d ** (len(space.modes) - pos - 1), dtype=np.complex128)
    return np.kron(np.kron(left, a), right)


def vacuum_state(space: FockSpace) -> np.ndarray:
    state = np.zeros(space.dim, dtype=np.complex128)
    state[0] = 1.0
    return state


def number_operator(space: FockSpace, mode: str | None = None) -> np.ndarray:
    """Diagonal photon-number operator; totals over all modes when mode is None."""
    if mode is None:
        diag = space.occupations.sum(axis=1)
    else:
        diag = space.occupations[:, space.mode_position(mode)]
    return np.diag(diag.astype(np.complex128))


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"operators must be square matrices, got shape {x.shape}")
    if x.shape != y.shape:
        raise ValueError(f"operator shapes {x.shape} and {y.shape} do not match")
    return x @ y - y @ x


def _pair_positions(space: FockSpace, mode_pair) -> tuple[str, str]:
    p, q = mode_pair
    if p == q:
        raise ValueError(f"mode pair must name two distinct modes, got {(p, q)!r}")
    space.mode_position(p)
    space.mode_position(q)
    return p, q


def v_unitary(space: FockSpace, mode_pair, alpha: float) -> np.ndarray:
    """Two-mode rotation exp(alpha (a+_p a_q - a+_q a_p)) for (p, q) = mode_pair.

    The generator is anti-hermitian, so the matrix exponential is unitary
    at every truncation level. Conjugation rotates the pair of lowering
    operators into each other:

        V+ a_p V = cos(alpha) a_p + sin(alpha) a_q
        V+ a_q V = cos(alpha) a_q - sin(alpha) a_p

    exactly on the subspace whose pair occupation stays below n_max (see
    `rotation_check`). On single-photon amplitudes over (p, q) this acts
    as the same [[c, s], [-s, c]] matrix the analytic engine uses, which
    is what makes this module a cross-check of that engine.
    """
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ValueError("rotation angle must be finite")
    p, q = _pair_positions(space, mode_pair)
    gen = ladder(space, p, "raising") @ ladder(space, q, "lowering")
    gen = gen - ladder(space, q, "raising") @ ladder(space, p, "lowering")
    return expm(alpha * gen)


def rotation_check(space: FockSpace, mode_pair, alpha: float, restrict: bool = True) -> float:
    """Residual of the conjugation rule V+ a V = rotated ladder pair.

    Returns the larger Frobenius norm of the two defect matrices. With
    restrict=True, columns are kept only for basis states whose combined
    occupation of the pair stays below n_max; on that subspace the rule
    is an exact identity and the residual sits at rounding level. With
    restrict=False the truncation edge contributes O(1) defects for any
    appreciable angle, which is the expected signature of the cap, not
    an implementation fault.
    """
    p, q = _pair_positions(space, mode_pair)
    v = v_unitary(space, mode_pair, alpha)
    a_p = ladder(space, p, "lowering")
    a_q = ladder(space, q, "lowering")
    c, s = math.cos(alpha), math.sin(alpha)
    vh = v.conj().T
    defect_p = vh @ a_p @ v - (c * a_p + s * a_q)
    defect_q = vh @ a_q @ v - (c * a_q - s * a_p)
    if restrict:
        pair_total = (
            space.occupations[:, space.mode_position(p)]
            + space.occupations[:, space.mode_position(q)]
        )
        keep = pair_total < space.n_max
        defect_p = defect_p[:, keep]
        defect_q = defect_q[:, keep]
    return max(float(np.linalg.norm(defect_p)), float(np.linalg.norm(defect_q)))


def commutator_preservation_check(space: FockSpace, mode_pair, alpha: float) -> float:
    """Max-norm residual of [V+ X V, V+ Y V] = V+ [X, Y] V over ladder pairs.

    Unitary conjugation is an algebra homomorphism, so this holds on the
    full truncated space (no subspace restriction needed); the residual
    only carries floating-point noise.
    """
    p, q = _pair_positions(space, mode_pair)
    v = v_unitary(space, mode_pair, alpha)
    vh = v.conj().T
    ops = []
    for m in (p, q):
        for kind in _KINDS:
            ops.append(ladder(space, m, kind))
    worst = 0.0
    for x in ops:
        for y in ops:
            lhs = commutator(vh @ x @ v, vh @ y @ v)
            rhs = vh @ commutator(x, y) @ v
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
