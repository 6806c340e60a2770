"""Experiment configuration files.

A config is one JSON object with a ``kind`` and kind-specific fields. Sampler
sections (``tht``, ``hmc``, ...) are optional as a whole; a section that is
given must carry its own required fields.
"""
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from core.mass import MassSpec
from core.schedule import CosineSchedule, IndexDistribution, MassSchedule
from schemas.sampler import HmcConfig, ThtConfig


class ThtSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    eps: float = Field(gt=0, description="Baseline leapfrog step size")
    eta_star: float = Field(ge=0, description="Peak of the cosine log-mass schedule")
    K: int = Field(ge=2, description="Schedule period")
    N: int = Field(ge=1, description="Maximum number of proposals")
    a: float = 0.5
    c_eta: float = 0.0
    window: int = Field(0, ge=0, description="Half-width of the windowed-uniform index distribution")
    L: int = Field(1, ge=1)

    @model_validator(mode="after")
    def check_counts(self):
        if self.L > self.N:
            raise ValueError(f"L ({self.L}) must not exceed N ({self.N})")
        if 2 * self.window >= self.K:
            raise ValueError(f"window {self.window} too wide for period {self.K}")
        return self

    def schedule(self) -> CosineSchedule:
        return CosineSchedule(eta_star=self.eta_star, c_eta=self.c_eta, K=self.K)

    def build(self, dim: int, mass: MassSpec | None = None,
              schedule: MassSchedule | None = None) -> ThtConfig:
        return ThtConfig(
            eps=self.eps, a=self.a, L=self.L, N=self.N,
            schedule=schedule or self.schedule(),
            psi=IndexDistribution.windowed_uniform(self.K, self.window),
            mass=mass or MassSpec.identity(dim),
        )


class HmcSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    eps: float = Field(gt=0)
    n_leapfrog: int = Field(ge=1)

    def build(self, dim: int, mass: MassSpec | None = None) -> HmcConfig:
        return HmcConfig(eps=self.eps, n_leapfrog=self.n_leapfrog, mass=mass or MassSpec.identity(dim))


class ExperimentBase(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: Optional[int] = Field(None, ge=0)
    iterations: int = Field(ge=1)
    chains: int = Field(ge=1)
    burn_in: int = Field(0, ge=0)
    trace: bool = False


def _sensor_tht() -> ThtSection:
    return ThtSection(eps=0.001, eta_star=2.0, K=2000, N=2200, a=0.5, window=30, L=20)


class Mixture1dExperiment(ExperimentBase):
    kind: Literal["mixture1d"]
    iterations: int = Field(500, ge=1)
    chains: int = Field(12, ge=1)
    means: Tuple[float, float] = (-200.0, 200.0)
    sd: float = Field(1.0, gt=0)
    init: float = -200.0
    tht: ThtSection = Field(default_factory=lambda: ThtSection(
        eps=0.1, eta_star=6.0, K=500, N=509, a=0.5, window=4, L=9))
    hmc: Optional[HmcSection] = None


class MixtureHdExperiment(ExperimentBase):
    kind: Literal["mixture_hd"]
    iterations: int = Field(100, ge=1)
    chains: int = Field(1, ge=1)
    dim: int = Field(10000, ge=1)
    separation: float = Field(400.0, gt=0, description="Distance between the two component means")
    sd: float = Field(1.0, gt=0)
    tht: ThtSection = Field(default_factory=lambda: ThtSection(
        eps=0.1, eta_star=6.0, K=1500, N=1509, a=0.5, window=4, L=9))


class PowerPilotExperiment(ExperimentBase):
    kind: Literal["power_pilot"]
    iterations: int = Field(200, ge=1)
    chains: int = Field(4, ge=1)
    trace: bool = True
    gamma: float = Field(2.0, gt=0)
    c: float = Field(1.0, gt=0)
    dim: int = Field(1, ge=1)
    start: float = 1.0
    eta_star: float = Field(1.0, ge=0)
    K_pilot: int = Field(4000, ge=2)
    eps: float = Field(0.05, gt=0)
    a_grid: List[float] = Field(default_factory=lambda: [0.4, 0.5, 0.6], min_length=1)


class SensorExperiment(ExperimentBase):
    kind: Literal["sensor"]
    iterations: int = Field(1000, ge=1)
    chains: int = Field(12, ge=1)
    burn_in: int = Field(30, ge=0)
    dataset: Optional[str] = Field(None, description="SensorDataset JSON file; the built-in dataset if absent")
    arms: List[Literal["tht", "hmc"]] = Field(default_factory=lambda: ["tht", "hmc"], min_length=1)
    tht: ThtSection = Field(default_factory=_sensor_tht)


class SensorGibbsExperiment(ExperimentBase):
    kind: Literal["sensor_gibbs"]
    iterations: int = Field(1000, ge=1)
    chains: int = Field(6, ge=1)
    burn_in: int = Field(30, ge=0)
    dataset: Optional[str] = None
    arms: List[Literal["tht", "hmc"]] = Field(default_factory=lambda: ["tht", "hmc"], min_length=1)
    tht: ThtSection = Field(default_factory=_sensor_tht)
    hmc: HmcSection = Field(default_factory=lambda: HmcSection(eps=0.001, n_leapfrog=30))
    hyper: HmcSection = Field(default_factory=lambda: HmcSection(eps=0.02, n_leapfrog=30))
    # None: match the THT arm's leapfrog-step budget
    hmc_iterations: Optional[int] = Field(None, ge=1)
    init_R: float = Field(0.5, gt=0)
    init_sigma_e: float = Field(0.05, gt=0)


class GapBridgeExperiment(ExperimentBase):
    kind: Literal["gap_bridge"]
    iterations: int = Field(500, ge=1)
    chains: int = Field(32, ge=1)
    init: Optional[float] = Field(None, description="Common start; unset starts chain i from an exact "
                                                    "draw of component i mod the number of components")
    log_nu: float = -25.0
    bridge_sd: float = Field(5.0, gt=0)
    tht: ThtSection = Field(default_factory=lambda: ThtSection(
        eps=0.2, eta_star=2.5, K=100, N=105, a=0.5, window=2, L=5))

    @model_validator(mode="after")
    def check_init(self):
        if self.init is not None and not (-3.0 < self.init < -1.0 or self.init > 1.0):
            raise ValueError(f"init {self.init} lies outside the support of the gapped target")
        return self


ExperimentConfig = Annotated[
    Union[Mixture1dExperiment, MixtureHdExperiment, PowerPilotExperiment,
          SensorExperiment, SensorGibbsExperiment, GapBridgeExperiment],
    Field(discriminator="kind"),
]

experiment_adapter: TypeAdapter[ExperimentConfig] = TypeAdapter(ExperimentConfig)


class ExperimentOutcome(BaseModel):
    exit_code: int
    message: str = ""
    artifacts: List[str] = Field(default_factory=list)
