from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.mass import MassSpec
from core.schedule import IndexDistribution, MassSchedule


class HmcConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eps: float = Field(gt=0, description="Leapfrog step size")
    n_leapfrog: int = Field(ge=1, description="Leapfrog steps per proposal")
    mass: MassSpec


class EnhancedConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mass: MassSpec
    # alpha = 1 is allowed, it reduces the kernel to plain HMC
    alpha: float = Field(ge=1, description="Mass enhancement ratio")
    eps_tilde: float = Field(gt=0)
    N: int = Field(ge=1, description="Maximum number of proposals")
    L: int = Field(ge=1, description="Number of acceptable states to be found")

    @model_validator(mode="after")
    def check_counts(self):
        if self.L > self.N:
            raise ValueError(f"L ({self.L}) must not exceed N ({self.N})")
        return self


class ThtConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eps: float = Field(gt=0, description="Baseline leapfrog step size")
    a: float = Field(description="Time-scale coefficient, 2 / (gamma + 2) for U ~ |x|^gamma")
    L: int = Field(ge=1)
    N: int = Field(ge=1)
    schedule: MassSchedule
    psi: IndexDistribution
    mass: MassSpec

    @model_validator(mode="after")
    def check_consistency(self):
        if self.L > self.N:
            raise ValueError(f"L ({self.L}) must not exceed N ({self.N})")
        if self.schedule.K != self.psi.K:
            raise ValueError(f"schedule period {self.schedule.K} differs from index period {self.psi.K}")
        return self

    def with_schedule(self, schedule: MassSchedule) -> "ThtConfig":
        return self.model_copy(update={"schedule": schedule})
