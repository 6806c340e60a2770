import logging
import math
from typing import Callable, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.optimize import minimize

from core.dynamics import tht_map
from core.errors import NonFiniteState
from core.hamiltonian import ExtendedState, extended_hamiltonian, sample_initial_velocity
from core.model import PotentialModel
from core.rng import RngStream
from schemas.sampler import ThtConfig

logger = logging.getLogger(__name__)

ModeClassifier = Callable[[np.ndarray], Optional[Hashable]]


def _split_chains(ary: np.ndarray) -> np.ndarray:
    """Split and stack chains."""
    half = ary.shape[1] // 2
    return np.vstack((ary[:, :half], ary[:, -half:]))


def _z_scale(ary: np.ndarray) -> np.ndarray:
    size = ary.size
    rank = stats.rankdata(ary, method="average")
    z = stats.norm.ppf((rank - 0.375) / (size + 0.25))
    return z.reshape(ary.shape)


def rank_normalized_rhat(chains: Sequence[Sequence[float]]) -> Optional[float]:
    """Split R-hat on normal scores of the pooled ranks.

    Returns None when all values are equal, since the ratio is undefined.
    """
    ary = np.asarray(chains, dtype=float)
    if ary.ndim != 2 or ary.shape[0] < 2 or ary.shape[1] < 4:
        raise ValueError(f"need at least 2 chains of length 4, got shape {ary.shape}")
    split = _split_chains(ary)
    if np.var(split) == 0.0:
        logger.warning("R-hat undefined for constant input")
        return None
    z = _z_scale(split)
    n = z.shape[1]
    chain_mean = np.mean(z, axis=1)
    within = np.mean(np.var(z, axis=1, ddof=1))
    between = n * np.var(chain_mean, ddof=1)
    if within == 0.0:
        return math.inf
    return float(np.sqrt((n - 1) / n + between / (n * within)))


def effective_sample_size(series: Sequence[float]) -> float:
    """Single-chain ESS with Geyer's initial positive sequence truncation."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 4:
        raise ValueError("need at least 4 draws")
    c = x - x.mean()
    var = np.dot(c, c) / n
    if var == 0.0:
        return float(n)
    # autocovariance via FFT, zero padded to avoid wrap-around
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(c, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[:n] / n
    rho = acov / var
    total = 0.0
    for t in range(0, n - 1, 2):
        pair = rho[t] + rho[t + 1]
        if pair <= 0:
            break
        total += pair
    tau = max(2.0 * total - 1.0, 1.0 / math.log10(max(n, 10)))
    return float(n / tau)


class SignClassifier:
    """Label by the sign of the first coordinate."""

    def __call__(self, x: np.ndarray) -> Optional[int]:
        v = float(np.ravel(x)[0])
        if v == 0.0:
            return None
        return 1 if v > 0 else 0


class ProjectionClassifier:
    """Label by the side of the midpoint hyperplane between two means."""

    def __init__(self, mu1, mu2):
        self.mu1 = np.asarray(mu1, dtype=float).ravel()
        self.mu2 = np.asarray(mu2, dtype=float).ravel()
        self._mid = 0.5 * (self.mu1 + self.mu2)
        self._dir = self.mu2 - self.mu1

    def project(self, x: np.ndarray) -> float:
        return float((np.ravel(x) - self._mid) @ self._dir)

    def __call__(self, x: np.ndarray) -> Optional[int]:
        s = self.project(x)
        if s == 0.0:
            return None
        return 1 if s > 0 else 0


class ReferenceClassifier:
    """Label by the nearest reference configuration, Unassigned when nearly equidistant."""

    def __init__(self, references: Iterable, margin: float = 0.1):
        self.references = [np.asarray(r, dtype=float).ravel() for r in references]
        self.margin = margin

    def __call__(self, x: np.ndarray) -> Optional[int]:
        d = np.array([np.linalg.norm(np.ravel(x) - r) for r in self.references])
        order = np.argsort(d)
        best, second = d[order[0]], d[order[1]]
        if second - best < self.margin * second:
            return None
        return int(order[0])


class BasinClassifier:
    """Label a state by the reference minimum that local descent from it reaches.

    Each state is descended with L-BFGS-B (inside ``model.bounds`` when the
    model has them). A descent that stops more than ``level_gap`` above the
    highest reference level, or farther than ``radius`` from every reference,
    lands in some other local mode and stays Unassigned.
    """

    def __init__(self, model: PotentialModel, references: Iterable, radius: float = 0.05,
                 level_gap: float = 1.0, max_iter: int = 500):
        self.model = model
        self.radius = float(radius)
        self.max_iter = max_iter
        self.references = [self.descend(r) for r in references]
        self.levels = [model.potential(r) for r in self.references]
        self.ceiling = max(self.levels) + float(level_gap)
        self._labels: dict[bytes, Optional[int]] = {}
        for i, r in enumerate(self.references):
            for j in range(i):
                if np.linalg.norm(r - self.references[j]) <= self.radius:
                    logger.warning(f"References {j} and {i} descend to the same minimum")

    def descend(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        bounds = None
        if self.model.bounds is not None:
            bounds = [tuple(b) for b in self.model.bounds]
            x = np.clip(x, self.model.bounds[:, 0], self.model.bounds[:, 1])
        result = minimize(self.model.potential, x, jac=self.model.gradient, method="L-BFGS-B",
                          bounds=bounds, options={"maxiter": self.max_iter})
        return np.asarray(result.x, dtype=float)

    def __call__(self, x: np.ndarray) -> Optional[int]:
        x = np.asarray(x, dtype=float).ravel()
        key = x.tobytes()
        if key not in self._labels:
            self._labels[key] = self._classify(x)
        return self._labels[key]

    def _classify(self, x: np.ndarray) -> Optional[int]:
        end = self.descend(x)
        if self.model.potential(end) > self.ceiling:
            return None
        d = np.array([np.linalg.norm(end - r) for r in self.references])
        best = int(np.argmin(d))
        return best if d[best] <= self.radius else None


def count_mode_hops(series: Iterable, classifier: ModeClassifier) -> int:
    hops = 0
    last = None
    for x in series:
        label = classifier(np.asarray(x))
        if label is None:
            continue
        if last is not None and label != last:
            hops += 1
        last = label
    return hops


def estimate_oscillation_frequency(trace: Sequence[float], dt: float, band: float = 0.25) -> float:
    """Oscillation frequency of a scalar trace from its mean crossings.

    The centered trace switches sign only when it leaves a band of +-band*sd,
    so noise near zero does not add crossings. Crossing times are interpolated
    at the band edge and rho = (crossings - 1) / (2 * (t_last - t_first)).
    """
    y = np.asarray(trace, dtype=float)
    if y.size < 4:
        raise ValueError("trace needs at least 4 samples")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    c = y - y.mean()
    sd = float(c.std())
    if sd == 0.0:
        return 0.0
    h = band * sd
    state = 0
    times: List[float] = []
    for i in range(c.size):
        if c[i] > h:
            new, level = 1, h
        elif c[i] < -h:
            new, level = -1, -h
        else:
            continue
        if state != 0 and new != state:
            prev = c[i - 1]
            frac = (level - prev) / (c[i] - prev) if c[i] != prev else 0.0
            times.append((i - 1 + frac) * dt)
        state = new
    if len(times) < 2 or times[-1] == times[0]:
        return 0.0
    return (len(times) - 1) / (2.0 * (times[-1] - times[0]))


def delta_h_trace(model: PotentialModel, x0, cfg: ThtConfig, rng: RngStream,
                  k0: int | None = None,
                  on_step: Callable[[int, ExtendedState], None] | None = None) -> List[Tuple[int, float]]:
    """H_n - H_0 along one full proposal sweep of N steps, without acceptance.

    The index term of H is left out so every step gets a finite value. A
    non-finite state ends the trace early. ``on_step`` sees every state,
    the initial one included as step 0.
    """
    x = np.asarray(x0, dtype=float).ravel()
    if k0 is None:
        k0 = cfg.psi.sample(rng)
    v0 = sample_initial_velocity(cfg.mass, cfg.schedule.alpha(k0), rng)
    s = ExtendedState(x, k0, v0)
    h0 = extended_hamiltonian(model, s, cfg.schedule, None, cfg.mass)
    if on_step is not None:
        on_step(0, s)
    out: List[Tuple[int, float]] = []
    for n in range(1, cfg.N + 1):
        try:
            s = tht_map(model, s, cfg.schedule, cfg)
        except NonFiniteState as e:
            logger.warning(f"H trace truncated at step {n}: {e}")
            break
        out.append((n, extended_hamiltonian(model, s, cfg.schedule, None, cfg.mass) - h0))
        if on_step is not None:
            on_step(n, s)
    return out


def reach_iteration(log_post: Sequence[float], window: int = 20, slack: float = 5.0) -> Optional[int]:
    """First iteration after which the log posterior stays within ``slack`` of its
    maximum for ``window`` consecutive iterations."""
    lp = np.asarray(log_post, dtype=float)
    if lp.size < window:
        return None
    above = lp >= np.max(lp) - slack
    run = 0
    for i, ok in enumerate(above):
        run = run + 1 if ok else 0
        if run == window:
            return i - window + 1
    return None


def summarize_delta_h(values: Sequence[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        return {"count": 0, "mean": None, "median": None, "max_abs": None}
    return {
        "count": int(arr.size),
        "mean": float(arr.mean()),
        "median": float(np.median(arr)),
        "max_abs": float(np.max(np.abs(arr))),
    }
