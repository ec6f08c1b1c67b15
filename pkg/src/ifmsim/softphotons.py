"""Low-energy photon emission statistics for charged scattering.

Any scattering of charges radiates arbitrarily soft photons. Within an
energy window [E-, E+] the number of emitted photons is Poisson with
mean mu = A ln(E+/E-), where A depends only on the charges and
velocities of the in/out legs. For a single charge scattered from rest
to speed beta (one incoming leg at rest, one outgoing at beta) the
factor collapses to

    A(beta) = (2 e^2 / (2 pi)^2) (arctanh(beta)/beta - 1),

quoted here in units of e^2. A is finite for beta < 1 but the photon
count inside a window reaching E- = 0 diverges, as does A itself at
beta = 1; both regimes raise DivergenceError rather than returning
infinities.

These emissions pollute an interaction-free measurement: an absorber
firing on one branch radiates, and a soft photon landing in a detector
mimics a photon count. The correction here multiplies the absorption
weight by the probability that at least one emitted photon enters the
detector's angular acceptance, and books those joint events explicitly
so the probability budget still closes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DivergenceError
from .interferometer import DetectionReport

# e^2 = 4 pi alpha in Heaviside-Lorentz units, alpha = 1/137.035999
E_SQUARED_HEAVISIDE_LORENTZ = 4.0 * math.pi / 137.035999

# below this speed arctanh(beta)/beta loses digits to cancellation;
# the even series in beta^2 is exact to double precision there
SERIES_BETA_CROSSOVER = 1e-4

_TWO_PI_SQ = (2.0 * math.pi) ** 2


@dataclass
class ProcessLeg:
    """One external charged leg: charge, direction flag, and speed.

    eta is +1 for an outgoing leg and -1 for an incoming one; velocity
    is the speed fraction beta in [0, 1).
    """

    charge: float
    eta: int
    velocity: float

    def __post_init__(self):
        self.charge = float(self.charge)
        if self.eta not in (-1, 1):
            raise ValueError(f"eta must be +1 (outgoing) or -1 (incoming), got {self.eta}")
        self.velocity = float(self.velocity)
        if self.velocity < 0.0:
            raise ValueError(f"leg velocity must be nonnegative, got {self.velocity}")
        if self.velocity >= 1.0:
            raise DivergenceError(
                f"leg velocity {self.velocity} reaches the speed of light; "
                "the emission factor diverges as beta -> 1"
            )


@dataclass
class SoftWindow:
    """Detected-photon energy window [e_minus, e_plus].

    The lower edge must be positive: the expected photon count grows as
    ln(1/E-) and diverges when the window opens down to zero energy.
    Equal edges are allowed and give an empty window (mean zero).
    """

    e_minus: float
    e_plus: float

    def __post_init__(self):
        self.e_minus = float(self.e_minus)
        self.e_plus = float(self.e_plus)
        if not self.e_minus > 0.0:
            raise DivergenceError(
                f"window lower edge must be positive, got {self.e_minus}; "
                "the soft-photon count diverges logarithmically as it reaches zero"
            )
        if not math.isfinite(self.e_plus) or self.e_plus < self.e_minus:
            raise ValueError(
                f"window upper edge {self.e_plus} must be finite and not below "
                f"the lower edge {self.e_minus}"
            )

    @property
    def log_ratio(self) -> float:
        return math.log(self.e_plus / self.e_minus)


def _arctanh_over_beta_excess(beta: float) -> float:
    """arctanh(beta)/beta - 1, kept cancellation-free at small beta.

    Below the crossover the leading 1 is dropped analytically instead of
    being added and subtracted back, which would erase the tiny remainder.
    """
    if beta < SERIES_BETA_CROSSOVER:
        b2 = beta * beta
        return b2 / 3.0 + b2 * b2 / 5.0 + b2 * b2 * b2 / 7.0
    return math.atanh(beta) / beta - 1.0


def _arctanh_over_beta(beta: float) -> float:
    """arctanh(beta)/beta, switching to its even series at small beta."""
    if beta < SERIES_BETA_CROSSOVER:
        return 1.0 + _arctanh_over_beta_excess(beta)
    return math.atanh(beta) / beta


def weinberg_factor_fermion(beta: float) -> float:
    """Emission factor for one charge kicked from rest to speed beta.

    Returned in units of e^2. Grows like beta^2/3 near zero speed and
    diverges logarithmically as beta -> 1, where DivergenceError is
    raised with the physical reason.
    """
    beta = float(beta)
    if beta < 0.0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    if beta >= 1.0:
        raise DivergenceError(
            f"beta = {beta} is at or beyond the speed of light; arctanh(beta) "
            "and the emission factor diverge in that limit"
        )
    return (2.0 / _TWO_PI_SQ) * _arctanh_over_beta_excess(beta)


def weinberg_factor_general(legs, pairwise_beta) -> float:
    """Emission factor for an arbitrary set of external charged legs.

    pairwise_beta[n, m] is the relative speed of legs n and m: the matrix
    must be symmetric with a zero diagonal, entries in [0, 1). The factor
    is, in units of e^2,

        A = -(2 pi)^-2 sum_{n,m} q_n q_m eta_n eta_m arctanh(b_nm)/b_nm,

    with the diagonal terms taking the b -> 0 limit of 1. For one
    incoming and one outgoing leg of unit charge this reduces exactly to
    `weinberg_factor_fermion` of the outgoing speed when the incoming
    leg is at rest.
    """
    legs = list(legs)
    if not legs:
        raise ValueError("at least one process leg is required")
    beta = np.asarray(pairwise_beta, dtype=float)
    n = len(legs)
    if beta.shape != (n, n):
        raise ValueError(
            f"pairwise_beta must be {n}x{n} for {n} legs, got shape {beta.shape}"
        )
    if not np.array_equal(beta, beta.T):
        raise ValueError("pairwise_beta must be symmetric")
    if np.any(np.diag(beta) != 0.0):
        raise ValueError("pairwise_beta must have a zero diagonal")
    if np.any(beta < 0.0):
        raise ValueError("pairwise relative speeds must be nonnegative")
    if np.any(beta >= 1.0):
        raise DivergenceError(
            "a pairwise relative speed reaches 1; the emission factor diverges "
            "for lightlike relative motion"
        )
    total = 0.0
    for i, leg_i in enumerate(legs):
        for j, leg_j in enumerate(legs):
            weight = leg_i.charge * leg_j.charge * leg_i.eta * leg_j.eta
            total += weight * _arctanh_over_beta(float(beta[i, j]))
    return -total / _TWO_PI_SQ


def mean_photons(factor: float, window: SoftWindow) -> float:
    """Expected photon count mu = A ln(E+/E-) inside the window."""
    factor = float(factor)
    if factor < 0.0:
        raise ValueError(f"emission factor must be nonnegative, got {factor}")
    return factor * window.log_ratio


@dataclass
class EmissionModel:
    """Pinned pair (A, mu) for one scattering process and window."""

    factor: float
    mean: float

    def __post_init__(self):
        if self.factor < 0.0 or self.mean < 0.0:
            raise ValueError("emission factor and mean must be nonnegative")

    @classmethod
    def from_window(cls, factor: float, window: SoftWindow) -> "EmissionModel":
        return cls(factor=float(factor), mean=mean_photons(factor, window))


def poisson_pmf(n: int, mu: float) -> float:
    """P(N = n) for a Poisson law of mean mu, stable for large n and mu.

    Evaluated as exp(n ln mu - mu - ln n!) so extreme parameters
    underflow gracefully instead of overflowing intermediate factorials.
    """
    if not float(n).is_integer() or n < 0:
        raise ValueError(f"photon count must be a nonnegative integer, got {n}")
    n = int(n)
    mu = float(mu)
    if mu < 0.0:
        raise ValueError(f"Poisson mean must be nonnegative, got {mu}")
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mu) - mu - math.lgamma(n + 1))


@dataclass
class PollutionConfig:
    """Angular acceptance of a detector for stray soft photons.

    solid_angle_fraction is the fraction of the emission sphere the
    detector subtends, under an isotropic angular model (the only one
    implemented).
    """

    solid_angle_fraction: float
    angular_model: str = "isotropic"

    def __post_init__(self):
        self.solid_angle_fraction = float(self.solid_angle_fraction)
        if not 0.0 < self.solid_angle_fraction <= 1.0:
            raise ValueError(
                f"solid angle fraction must lie in (0, 1], got {self.solid_angle_fraction}"
            )
        if self.angular_model != "isotropic":
            raise ConfigurationError(
                f"unsupported angular model {self.angular_model!r}; only "
                "'isotropic' is implemented"
            )


def pollution_probability(mu: float, config: PollutionConfig) -> float:
    """Probability that at least one soft photon lands in the detector.

    Photons entering the acceptance are Poisson-thinned with rate
    mu * f, so the result is 1 - exp(-mu f), computed with expm1 to keep
    precision when the rate is tiny.
    """
    mu = float(mu)
    if mu < 0.0:
        raise ValueError(f"mean photon count must be nonnegative, got {mu}")
    return -math.expm1(-mu * config.solid_angle_fraction)


@dataclass
class CorrectedReport:
    """Detection probabilities after folding in soft-photon pollution.

    p_joint is the probability of an absorption accompanied by a stray
    detector hit; those events are double-booked in the raised detector
    rows, so the budget closes as p_d1 + p_d2 + p_absorbed - p_joint = 1.
    """

    p_d1: float
    p_d2: float
    p_absorbed: float
    p_joint: float


def corrected_probabilities(report: DetectionReport, pollution: float,
                            detector_share=(0.5, 0.5)) -> CorrectedReport:
    """Fold stray-photon pollution into a detection report.

    Each absorption event fakes a detector count with probability
    `pollution`; the fake lands on D1 or D2 per `detector_share` (split
    evenly by default). The input report is not modified.
    """
    pollution = float(pollution)
    if not 0.0 <= pollution <= 1.0:
        raise ValueError(f"pollution probability must lie in [0, 1], got {pollution}")
    share_d1, share_d2 = (float(s) for s in detector_share)
    if share_d1 < 0.0 or share_d2 < 0.0 or share_d1 + share_d2 > 1.0 + 1e-12:
        raise ValueError(
            f"detector shares must be nonnegative with sum at most 1, got {detector_share}"
        )
    joint = report.p_absorbed * pollution
    return CorrectedReport(
        p_d1=report.p_d1 + joint * share_d1,
        p_d2=report.p_d2 + joint * share_d2,
        p_absorbed=report.p_absorbed,
        p_joint=joint * (share_d1 + share_d2),
    )
