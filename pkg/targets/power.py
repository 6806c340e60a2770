import numpy as np

from core.errors import SingularGradient
from core.model import PotentialModel


class PowerPotential(PotentialModel):
    """U(x) = c * (x^T B x)^(gamma / 2).

    B may be None (identity), a 1-D array (diagonal) or a dense SPD matrix.
    """

    def __init__(self, c: float, gamma: float, dim: int = 1, B=None):
        if c <= 0 or gamma <= 0:
            raise ValueError(f"c and gamma must be positive, got c={c}, gamma={gamma}")
        self.c = float(c)
        self.gamma = float(gamma)
        if B is None:
            self.dim = dim
            self._B = None
        else:
            B = np.array(B, dtype=float)
            if B.ndim == 1:
                if np.any(B <= 0):
                    raise ValueError("diagonal B must be positive")
            elif B.ndim != 2 or B.shape[0] != B.shape[1] or not np.allclose(B, B.T):
                raise ValueError("dense B must be a symmetric square matrix")
            else:
                np.linalg.cholesky(B)
            self.dim = B.shape[0]
            B.setflags(write=False)
            self._B = B

    def _apply_B(self, x: np.ndarray) -> np.ndarray:
        if self._B is None:
            return x
        if self._B.ndim == 1:
            return self._B * x
        return self._B @ x

    def potential(self, x: np.ndarray) -> float:
        q = float(x @ self._apply_B(x))
        return self.c * q ** (0.5 * self.gamma)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        bx = self._apply_B(x)
        q = float(x @ bx)
        if q == 0.0:
            if self.gamma < 2:
                raise SingularGradient(f"gradient of |x|^{self.gamma} is undefined at 0")
            return np.zeros_like(x, dtype=float)
        return self.c * self.gamma * q ** (0.5 * self.gamma - 1.0) * bx

    @property
    def optimal_a(self) -> float:
        return 2.0 / (self.gamma + 2.0)


def power_potential(pp: PowerPotential, x) -> tuple[float, np.ndarray]:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return pp.potential(x), pp.gradient(x)
