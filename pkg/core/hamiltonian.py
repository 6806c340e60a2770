import math
from dataclasses import dataclass, field

import numpy as np

from core.mass import MassSpec
from core.model import PotentialModel
from core.rng import RngStream
from core.schedule import IndexDistribution, MassSchedule

INFINITE_ENERGY = math.inf


@dataclass(frozen=True, slots=True)
class ExtendedState:
    """Position, schedule index and velocity (x, k, v~)."""

    x: np.ndarray
    k: int
    v: np.ndarray
    # gradient of U at x, carried along so the next leapfrog step can reuse it
    grad: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.x.shape != self.v.shape:
            raise ValueError(f"x and v shapes differ: {self.x.shape} vs {self.v.shape}")


def sample_initial_velocity(mass: MassSpec, alpha_k0: float, rng: RngStream) -> np.ndarray:
    """Draws v~(0) ~ N(0, alpha^-1 M^-1)."""
    if alpha_k0 <= 0:
        raise ValueError(f"mass scale must be positive, got {alpha_k0}")
    z = rng.standard_normal(mass.dim)
    return mass.chol_Minv_mul(z) / math.sqrt(alpha_k0)


def hamiltonian(model: PotentialModel, mass: MassSpec, x: np.ndarray, v: np.ndarray) -> float:
    """Plain H(x, v) = U(x) + 0.5 v^T M v."""
    return model.potential(x) + 0.5 * mass.quadratic(v)


def extended_hamiltonian(model: PotentialModel, s: ExtendedState, schedule: MassSchedule,
                         psi: IndexDistribution | None, mass: MassSpec) -> float:
    """H(x, k, v~) = U - log psi(k) + 0.5 v~^T (alpha_k M) v~ - 0.5 log det(alpha_k M).

    Returns INFINITE_ENERGY without touching the model when psi(k) = 0. With
    ``psi=None`` the index term is dropped, which is how H traces are drawn.
    """
    log_psi = 0.0
    if psi is not None:
        log_psi = psi.log_prob(s.k)
        if log_psi == -math.inf:
            return INFINITE_ENERGY
    eta = schedule.eta(s.k)
    alpha = math.exp(2.0 * eta)
    d = s.x.size
    kinetic = 0.5 * alpha * mass.quadratic(s.v)
    log_det = d * 2.0 * eta + mass.log_det_M
    return model.potential(s.x) - log_psi + kinetic - 0.5 * log_det


def chernoff_jump_bound(d: int, delta: float) -> float:
    """Upper bound (2 delta / d)^(d/2) e^(d/2 - delta) on P(chi2_d > 2 delta)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    log_bound = 0.5 * d * math.log(2.0 * delta / d) + 0.5 * d - delta
    return math.exp(log_bound)
