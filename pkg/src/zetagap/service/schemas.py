"""Pydantic request/response models for the HTTP service.

Infinities never cross the wire: an infeasible search or a disconnected graph
is represented by null on the corresponding optional field. Indicator vectors
travel as bit strings ("0110...") with coordinate 0 first.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class ChainPayload(BaseModel):
    transition: list[list[float]]
    stationary: list[float] | None = None


class ChainAnalyzeRequest(BaseModel):
    chain: ChainPayload
    zeta: float = 0.1
    m: float | None = Field(default=None, description="star-norm exponent; null means sup norm")
    budget: int = 64
    seed: int = 0


class GapReportModel(BaseModel):
    spec_gap: float
    conductance: float
    zeta: float
    zeta_conductance: float | None
    zeta_gap_lower: float
    zeta_gap_upper: float | None
    witness_subset: list[int] | None
    witness_function: list[float] | None


class TvEvolutionRequest(BaseModel):
    chain: ChainPayload
    initial: list[float]
    n_max: int = 100


class TvEvolutionResponse(BaseModel):
    distances: list[float]


class MixtureComponentPayload(BaseModel):
    weight: float
    distribution: list[float]
    kernel: list[list[float]]
    mask: list[int] | None = None


class MixtureAnalyzeRequest(BaseModel):
    components: list[MixtureComponentPayload]
    zeta: float = 0.1
    m: float | None = None
    subset_indices: list[int] | None = None


class BoundModel(BaseModel):
    value: float
    kappa: float
    diameter: float | None
    mass: float = 1.0
    mass_threshold: float = 0.0
    mass_ok: bool = True


class MixtureAnalyzeResponse(BaseModel):
    spectral_gap: float
    zeta_gap_upper: float | None
    madras_randall: BoundModel | None
    zeta_bound: BoundModel
    overlaps: list[list[float]]


class ModelPayload(BaseModel):
    design: list[list[float]]
    response: list[float]
    sigma2: float = 1.0
    q: float = 0.1
    rho: float = 1.0
    gamma: float = 0.01


class ModelMass(BaseModel):
    delta_bits: str
    log_post: float
    post: float


class EnumerateRequest(BaseModel):
    model: ModelPayload


class EnumerateResponse(BaseModel):
    models: list[ModelMass]


class DiagnosticsRequest(BaseModel):
    model: ModelPayload
    coherence_size: int = 2
    support_size: int = 2
    cap: int = 2000


class RestrictedEigenvalueModel(BaseModel):
    value: float
    delta_bits: str
    support: list[int]


class DiagnosticsResponse(BaseModel):
    coherence: float
    restricted_eigenvalue: RestrictedEigenvalueModel
    detectability_threshold: float


class SamplerRunRequest(BaseModel):
    model: ModelPayload
    delta_init: list[int]
    iterations: int = 1000
    seed: int = 0
    strategy: str = "auto"
    delta_star: list[int] | None = None
    top_k: int = 10


class ModelFrequency(BaseModel):
    delta_bits: str
    frequency: float


class SamplerRunResponse(BaseModel):
    lazy_fraction: float
    final_delta_bits: str
    top_models: list[ModelFrequency]
    mixing_time: int | None
    truncated: bool | None
    manifest: dict[str, str]


class VerifyRequest(BaseModel):
    suite: str = "all"
    seed: int = 0
    quick: bool = False


class CheckModel(BaseModel):
    name: str
    passed: bool
    margin: float
    detail: str = ""
    replay: dict | None = None


class SuiteModel(BaseModel):
    suite: str
    passed: bool
    checks: list[CheckModel]


class VerifyResponse(BaseModel):
    passed: bool
    suites: list[SuiteModel]


class ExperimentRequest(BaseModel):
    p: int
    n: int | None = None
    s_star: int = 10
    sigma2: float = 1.0
    u: float = 1.0
    rho: float | None = None
    gamma_scale: float = 0.1
    amplitude: float | None = None
    T: int = 20_000
    R: int = 20
    base_seed: int = 0
    fixed_instance: bool = False
    strategy: str = "auto"
    cells: str = "fp:0"
    workers: int = 1


class ResultRow(BaseModel):
    p: int
    n: int
    s_star: int
    fp: int
    fn: int
    replicate: int
    seed: str
    mixing_time: int
    truncated: int
    wall_s: float


class AggregateRow(BaseModel):
    p: int
    fp: int
    fn: int
    replicates: int
    mean: float
    sd: float
    se: float
    truncated: int
    mean_wall_s: float


class ExperimentResponse(BaseModel):
    rows: list[ResultRow]
    aggregates: list[AggregateRow]
    manifest: dict[str, str]
    table: str


class GenerateInstanceRequest(BaseModel):
    p: int
    n: int | None = None
    s_star: int = 10
    sigma2: float = 1.0
    u: float = 1.0
    rho: float | None = None
    gamma_scale: float = 0.1
    amplitude: float | None = None
    seed: int = 0


class InstanceResponse(BaseModel):
    design: list[list[float]]
    response: list[float]
    theta_star: list[float]
    delta_star_bits: str
    model: ModelPayload
    manifest: dict[str, str]


class HealthResponse(BaseModel):
    status: str
    version: str
