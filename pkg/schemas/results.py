from typing import Optional, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict


class StepResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    next_x: np.ndarray
    accepted_move: bool
    delta_H: float  # H at the accepted candidate minus H0, NaN if none accepted
    k0: Optional[int] = None  # THT only
    proposals_used: int
    acceptable_found: int
    # (n, k, H_n - H0, acceptable) per candidate, filled when tracing is on
    h_trace: Optional[List[Tuple[int, int, float, bool]]] = None


class ChainOutput(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    states: np.ndarray  # (iters + 1, dim), initial state first
    step_results: List[StepResult]
    wall_time: float
    chain_index: int = 0

    @property
    def acceptance_rate(self) -> float:
        if not self.step_results:
            return 0.0
        return sum(r.accepted_move for r in self.step_results) / len(self.step_results)

    def delta_h(self) -> np.ndarray:
        return np.array([r.delta_H for r in self.step_results])
