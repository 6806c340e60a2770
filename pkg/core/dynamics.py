"""Leapfrog integration, the THT proposal map, box folding and the bar transform."""
import math
from dataclasses import dataclass, field

import numpy as np

from core.errors import DegenerateBox, NonFiniteState
from core.hamiltonian import ExtendedState
from core.mass import MassSpec
from core.model import PotentialModel
from core.schedule import MassSchedule

MAX_FOLDS = 10_000


@dataclass(frozen=True, slots=True)
class PhasePoint:
    x: np.ndarray
    v: np.ndarray
    grad: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.x.shape != self.v.shape:
            raise ValueError(f"x and v shapes differ: {self.x.shape} vs {self.v.shape}")


def _check_finite(*arrays: np.ndarray) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NonFiniteState("leapfrog produced a non-finite coordinate")


def reflect_into_box(x: np.ndarray, v: np.ndarray, bounds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Folds x back into [lo, hi] by mirror reflection, negating v once per fold."""
    lo, hi = bounds[:, 0], bounds[:, 1]
    if np.any(lo >= hi):
        raise DegenerateBox(f"box has lo >= hi on coordinates {np.flatnonzero(lo >= hi).tolist()}")
    above = x > hi
    below = x < lo
    if not (above.any() or below.any()):
        return x, v
    _check_finite(x)
    x = x.copy()
    v = v.copy()
    for _ in range(MAX_FOLDS):
        x[above] = 2.0 * hi[above] - x[above]
        x[below] = 2.0 * lo[below] - x[below]
        flipped = above | below
        v[flipped] = -v[flipped]
        above = x > hi
        below = x < lo
        if not (above.any() or below.any()):
            return x, v
    raise NonFiniteState(f"position still outside the box after {MAX_FOLDS} folds")


def leapfrog_step(model: PotentialModel, p: PhasePoint, mass: MassSpec, mass_scale: float,
                  step: float, bounds: np.ndarray | None = None) -> PhasePoint:
    """Half kick, drift, half kick with effective mass ``mass_scale * M``.

    With ``bounds`` the drifted position is folded into the box before the
    second kick, so the gradient is taken at the folded point.
    """
    grad = p.grad if p.grad is not None else model.gradient(p.x)
    kick = 0.5 * step / mass_scale
    with np.errstate(over="ignore", invalid="ignore"):
        v_half = p.v - kick * mass.apply_Minv(grad)
        x_new = p.x + step * v_half
        _check_finite(v_half, x_new)
        if bounds is not None:
            x_new, v_half = reflect_into_box(x_new, v_half, bounds)
        grad_new = model.gradient(x_new)
        v_new = v_half - kick * mass.apply_Minv(grad_new)
    _check_finite(grad_new, v_new)
    return PhasePoint(x_new, v_new, grad_new)


def tht_map(model: PotentialModel, s: ExtendedState, schedule: MassSchedule, cfg) -> ExtendedState:
    """S(x, k, v~): one leapfrog step with mass alpha_{k+1/2} M and step eps * alpha_{k+1/2}^a."""
    eta_half = schedule.eta(s.k + 0.5)
    alpha = math.exp(2.0 * eta_half)
    step = cfg.eps * math.exp(2.0 * cfg.a * eta_half)
    p = leapfrog_step(model, PhasePoint(s.x, s.v, s.grad), cfg.mass, alpha, step, bounds=model.bounds)
    return ExtendedState(p.x, (s.k + 1) % schedule.K, p.v, p.grad)


def time_reversal(s: ExtendedState, K: int) -> ExtendedState:
    """T(x, k, v~) = (x, -k mod K, -v~)."""
    return ExtendedState(s.x, (-s.k) % K, -s.v, s.grad)


def bar_transform(x: np.ndarray, v: np.ndarray, eta: float, a: float) -> tuple[np.ndarray, np.ndarray]:
    scale = math.exp(a * eta)
    return x / scale, v * scale
