from enum import Enum

import numpy as np
from scipy import linalg


class MassKind(Enum):
    IDENTITY = "identity"
    DIAGONAL = "diagonal"
    DENSE = "dense"


class MassSpec:
    """Mass matrix M of the kinetic energy 0.5 * v^T M v.

    Build with ``identity``, ``diagonal`` or ``dense``. Instances are treated as
    immutable; stored arrays are flagged read-only.
    """

    def __init__(self, kind: MassKind, dim: int, diag: np.ndarray | None = None,
                 matrix: np.ndarray | None = None):
        if dim < 1:
            raise ValueError(f"mass dimension must be positive, got {dim}")
        self.kind = kind
        self.dim = dim
        self._diag = diag
        self._matrix = matrix
        self._chol = None
        if kind is MassKind.DIAGONAL:
            self._log_det = float(np.sum(np.log(diag)))
        elif kind is MassKind.DENSE:
            # lower Cholesky factor C of M, M = C C^T
            self._chol = linalg.cholesky(matrix, lower=True)
            self._chol.setflags(write=False)
            self._log_det = float(2.0 * np.sum(np.log(np.diag(self._chol))))
        else:
            self._log_det = 0.0

    @classmethod
    def identity(cls, dim: int) -> "MassSpec":
        return cls(MassKind.IDENTITY, dim)

    @classmethod
    def diagonal(cls, m) -> "MassSpec":
        diag = np.array(m, dtype=float).ravel()
        if diag.size == 0 or np.any(~np.isfinite(diag)) or np.any(diag <= 0):
            raise ValueError("diagonal mass entries must be finite and positive")
        diag.setflags(write=False)
        return cls(MassKind.DIAGONAL, diag.size, diag=diag)

    @classmethod
    def dense(cls, matrix) -> "MassSpec":
        mat = np.array(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"dense mass must be square, got shape {mat.shape}")
        if not np.allclose(mat, mat.T, rtol=1e-12, atol=1e-14):
            raise ValueError("dense mass must be symmetric")
        mat.setflags(write=False)
        try:
            return cls(MassKind.DENSE, mat.shape[0], matrix=mat)
        except linalg.LinAlgError as exc:
            raise ValueError("dense mass must be positive definite") from exc

    @property
    def log_det_M(self) -> float:
        return self._log_det

    def apply_M(self, v: np.ndarray) -> np.ndarray:
        if self.kind is MassKind.IDENTITY:
            return v
        if self.kind is MassKind.DIAGONAL:
            return self._diag * v
        return self._matrix @ v

    def apply_Minv(self, p: np.ndarray) -> np.ndarray:
        if self.kind is MassKind.IDENTITY:
            return p
        if self.kind is MassKind.DIAGONAL:
            return p / self._diag
        return linalg.cho_solve((self._chol, True), p)

    def chol_Minv_mul(self, z: np.ndarray) -> np.ndarray:
        """Maps a standard normal vector z to a draw from N(0, M^-1)."""
        if self.kind is MassKind.IDENTITY:
            return z
        if self.kind is MassKind.DIAGONAL:
            return z / np.sqrt(self._diag)
        # C^-T z has covariance C^-T C^-1 = M^-1
        return linalg.solve_triangular(self._chol.T, z, lower=False)

    def quadratic(self, v: np.ndarray) -> float:
        """Returns v^T M v."""
        return float(v @ self.apply_M(v))

    def __repr__(self) -> str:
        return f"MassSpec(kind={self.kind.value}, dim={self.dim})"
