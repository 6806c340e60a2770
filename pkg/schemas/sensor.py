from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class SensorDataset(BaseModel):
    """Pairwise distance measurements among unknown and known sensors.

    Sensors are indexed with the unknowns first (0..n_unknown-1) and the known
    sensors after them. ``obs`` lists the observed pairs (t, u), t < u, and
    ``dist`` holds the measured distance of each observed pair in the same order.
    Pairs between two known sensors are never stored.
    """

    n_unknown: int = Field(default=8, ge=1)
    known: List[Tuple[float, float]]
    obs: List[Tuple[int, int]] = Field(default_factory=list)
    dist: List[float] = Field(default_factory=list)
    R: float = Field(gt=0, description="Range parameter of the detection probability")
    sigma_e: float = Field(gt=0, description="Measurement noise standard deviation")
    truth: Optional[List[Tuple[float, float]]] = None

    @field_validator("known")
    @classmethod
    def known_in_unit_square(cls, v):
        for x, y in v:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError(f"known sensor ({x}, {y}) lies outside the unit square")
        return v

    @model_validator(mode="after")
    def check_pairs(self):
        if len(self.dist) != len(self.obs):
            raise ValueError(f"{len(self.dist)} distances for {len(self.obs)} observed pairs")
        n = self.n_sensors
        seen = set()
        for t, u in self.obs:
            if not (0 <= t < u < n):
                raise ValueError(f"pair ({t}, {u}) must satisfy 0 <= t < u < {n}")
            if t >= self.n_unknown:
                raise ValueError(f"pair ({t}, {u}) joins two known sensors")
            if (t, u) in seen:
                raise ValueError(f"pair ({t}, {u}) listed twice")
            seen.add((t, u))
        if self.truth is not None and len(self.truth) != self.n_unknown:
            raise ValueError(f"truth has {len(self.truth)} positions, expected {self.n_unknown}")
        return self

    @property
    def n_known(self) -> int:
        return len(self.known)

    @property
    def n_sensors(self) -> int:
        return self.n_unknown + self.n_known

    def known_array(self) -> np.ndarray:
        return np.array(self.known, dtype=float).reshape(-1, 2)

    def truth_array(self) -> Optional[np.ndarray]:
        if self.truth is None:
            return None
        return np.array(self.truth, dtype=float).reshape(-1, 2)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, exclude_none=True)

    @classmethod
    def from_json(cls, text: str) -> "SensorDataset":
        return cls.model_validate_json(text)
