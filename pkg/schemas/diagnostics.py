from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class PilotScore(BaseModel):
    a: float
    score: Optional[float] = Field(None, description="Amplitude drift of v-bar; null if the pilot blew up")


class TuningRecommendation(BaseModel):
    a_hat: float
    gamma_hat: float
    K_min: Optional[int] = None
    eps_max: Optional[float] = None
    rho_min: Optional[float] = None
    rho_max: Optional[float] = None
    eps: float = Field(description="Baseline step used by the pilot and in K_min")
    scores: List[PilotScore] = Field(default_factory=list)


class ArmSummary(BaseModel):
    name: str
    n_chains: int
    iterations: int
    acceptance_rates: List[float]
    hop_counts: List[int]
    delta_h: Dict[str, Optional[float]]
    wall_time: float
    effective_sample_size: Optional[List[float]] = None
    rhat: Optional[Dict[str, Optional[float]]] = None
    rhat_variables: Optional[int] = None
    reach_iterations: Optional[List[Optional[int]]] = None


class DiagnosticsReport(BaseModel):
    kind: str
    seed: int
    iterations: int
    burn_in: int = 0
    arms: List[ArmSummary] = Field(default_factory=list)
    tuning: Optional[TuningRecommendation] = None
    extras: Dict[str, Any] = Field(default_factory=dict)
