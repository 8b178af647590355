"""Request handlers shared by the FastAPI routes and the CLI's local backend.

Each handler maps a request model to a response model using the core package
and raises package exceptions (ValidationError / CapacityError /
NumericalError); the HTTP layer and the CLI translate those separately.
"""

from __future__ import annotations

import math

import numpy as np

from .. import __version__, chains
from ..errors import ValidationError
from ..experiment import (
    ExperimentConfig,
    aggregate_rows,
    format_report_table,
    generate_instance,
    instance_manifest,
    parse_cells,
    run_study,
)
from ..gibbs import run as run_sampler
from ..mixtures import (
    MixtureComponent,
    MixtureSpec,
    build_mixture_kernel,
    madras_randall_bound,
    mixture_zeta_gap_bound,
    overlap_matrix,
)
from ..spike_slab import (
    SpikeSlabModel,
    coherence,
    detectability_threshold,
    exact_model_posterior,
    restricted_eigenvalue,
)
from ..verify import run_suites
from . import schemas as sm


def _finite_or_none(value: float) -> float | None:
    return None if value is None or math.isinf(value) else float(value)


def _norm(m: float | None) -> chains.NormSpec:
    return chains.NormSpec() if m is None else chains.NormSpec(m)


def _chain(payload: sm.ChainPayload) -> chains.FiniteChain:
    pi = None if payload.stationary is None else np.array(payload.stationary)
    return chains.FiniteChain(np.array(payload.transition), pi)


def _model(payload: sm.ModelPayload) -> SpikeSlabModel:
    return SpikeSlabModel(
        np.array(payload.design),
        np.array(payload.response),
        payload.sigma2,
        payload.q,
        payload.rho,
        payload.gamma,
    )


def _bits(delta) -> str:
    return "".join(str(int(b)) for b in delta)


def analyze_chain(req: sm.ChainAnalyzeRequest) -> sm.GapReportModel:
    chain = _chain(req.chain)
    report = chains.analyze_chain(chain, req.zeta, _norm(req.m), budget=req.budget, seed=req.seed)
    return sm.GapReportModel(
        spec_gap=report.spec_gap,
        conductance=report.conductance,
        zeta=report.zeta,
        zeta_conductance=_finite_or_none(report.zeta_conductance),
        zeta_gap_lower=report.zeta_gap_lower,
        zeta_gap_upper=_finite_or_none(report.zeta_gap_upper),
        witness_subset=(
            None
            if report.witness_subset is None
            else [int(i) for i in np.flatnonzero(report.witness_subset)]
        ),
        witness_function=(
            None if report.witness_function is None else [float(v) for v in report.witness_function]
        ),
    )


def tv_evolution(req: sm.TvEvolutionRequest) -> sm.TvEvolutionResponse:
    chain = _chain(req.chain)
    dists = chains.tv_evolution(chain, np.array(req.initial), req.n_max)
    return sm.TvEvolutionResponse(distances=[float(v) for v in dists])


def analyze_mixture(req: sm.MixtureAnalyzeRequest) -> sm.MixtureAnalyzeResponse:
    comps = tuple(
        MixtureComponent(
            c.weight,
            np.array(c.distribution),
            np.array(c.kernel),
            None if c.mask is None else np.array(c.mask, dtype=bool),
        )
        for c in req.components
    )
    idx = None if req.subset_indices is None else tuple(req.subset_indices)
    spec = MixtureSpec(comps, idx)
    chain = build_mixture_kernel(spec)
    norm = _norm(req.m)
    upper, _ = chains.zeta_gap_upper(chain, req.zeta, norm)
    zb = mixture_zeta_gap_bound(spec, req.zeta, norm)
    mr = None
    if all(c.mask is None for c in spec.components) and len(spec.subset_indices) == len(comps):
        b = madras_randall_bound(spec)
        mr = sm.BoundModel(value=b.value, kappa=b.kappa, diameter=_finite_or_none(b.diameter))
    return sm.MixtureAnalyzeResponse(
        spectral_gap=chains.spectral_gap(chain),
        zeta_gap_upper=_finite_or_none(upper),
        madras_randall=mr,
        zeta_bound=sm.BoundModel(
            value=zb.value,
            kappa=zb.kappa,
            diameter=_finite_or_none(zb.diameter),
            mass=zb.mass,
            mass_threshold=zb.mass_threshold,
            mass_ok=zb.mass_ok,
        ),
        overlaps=[[float(v) for v in row] for row in overlap_matrix(spec)],
    )


def enumerate_models(req: sm.EnumerateRequest) -> sm.EnumerateResponse:
    model = _model(req.model)
    posterior = exact_model_posterior(model)
    rows = [
        sm.ModelMass(
            delta_bits=_bits(key),
            log_post=(math.log(pr) if pr > 0 else -math.inf),
            post=pr,
        )
        for key, pr in posterior.items()
    ]
    return sm.EnumerateResponse(models=rows)


def diagnostics(req: sm.DiagnosticsRequest) -> sm.DiagnosticsResponse:
    model = _model(req.model)
    rest = restricted_eigenvalue(model, req.support_size, cap=req.cap)
    return sm.DiagnosticsResponse(
        coherence=coherence(model, req.coherence_size, cap=req.cap),
        restricted_eigenvalue=sm.RestrictedEigenvalueModel(
            value=rest.value, delta_bits=_bits(rest.delta), support=list(rest.support)
        ),
        detectability_threshold=detectability_threshold(
            model.n, model.p, math.sqrt(model.sigma2)
        ),
    )


def run_sampler_endpoint(req: sm.SamplerRunRequest) -> sm.SamplerRunResponse:
    model = _model(req.model)
    traj = run_sampler(
        model,
        np.array(req.delta_init, dtype=np.uint8),
        req.iterations,
        req.seed,
        strategy=req.strategy,
    )
    counts: dict = {}
    for k in range(1, traj.deltas.shape[0]):
        key = _bits(traj.deltas[k])
        counts[key] = counts.get(key, 0) + 1
    total = max(1, sum(counts.values()))
    top = sorted(counts.items(), key=lambda kv: -kv[1])[: req.top_k]
    mixing_time = truncated = None
    if req.delta_star is not None:
        from ..experiment import first_exact_match

        mixing_time, truncated = first_exact_match(
            traj.deltas, np.array(req.delta_star, dtype=np.uint8), req.iterations
        )
    return sm.SamplerRunResponse(
        lazy_fraction=traj.lazy_fraction,
        final_delta_bits=_bits(traj.deltas[-1]),
        top_models=[sm.ModelFrequency(delta_bits=k, frequency=v / total) for k, v in top],
        mixing_time=mixing_time,
        truncated=truncated,
        manifest={k: str(v) for k, v in traj.manifest().items()},
    )


def verify(req: sm.VerifyRequest) -> sm.VerifyResponse:
    reports = run_suites(req.suite, seed=req.seed, quick=req.quick)
    suites = [
        sm.SuiteModel(
            suite=rep.suite,
            passed=rep.passed,
            checks=[
                sm.CheckModel(
                    name=c.name, passed=c.passed, margin=c.margin, detail=c.detail, replay=c.replay
                )
                for c in rep.checks
            ],
        )
        for rep in reports
    ]
    return sm.VerifyResponse(passed=all(s.passed for s in suites), suites=suites)


def _experiment_configs(req: sm.ExperimentRequest) -> list[ExperimentConfig]:
    base = ExperimentConfig(
        p=req.p,
        n=req.n,
        s_star=req.s_star,
        sigma2=req.sigma2,
        u=req.u,
        rho=req.rho,
        gamma_scale=req.gamma_scale,
        amplitude=req.amplitude,
        T=req.T,
        R=req.R,
        base_seed=req.base_seed,
        fixed_instance=req.fixed_instance,
        strategy=req.strategy,
    )
    return parse_cells(req.cells, base)


def run_experiment(req: sm.ExperimentRequest) -> sm.ExperimentResponse:
    if req.workers < 1:
        raise ValidationError("workers must be >= 1")
    study = run_study(_experiment_configs(req), workers=req.workers)
    rows = study.result_rows()
    return sm.ExperimentResponse(
        rows=[sm.ResultRow(**row) for row in rows],
        aggregates=[sm.AggregateRow(**agg) for agg in aggregate_rows(rows)],
        manifest={k: str(v) for k, v in study.manifest_pairs().items()},
        table=format_report_table(rows),
    )


def generate_instance_endpoint(req: sm.GenerateInstanceRequest) -> sm.InstanceResponse:
    config = ExperimentConfig(
        p=req.p,
        n=req.n,
        s_star=req.s_star,
        sigma2=req.sigma2,
        u=req.u,
        rho=req.rho,
        gamma_scale=req.gamma_scale,
        amplitude=req.amplitude,
    )
    model, truth = generate_instance(config, req.seed)
    manifest = instance_manifest(config, model, req.seed)
    return sm.InstanceResponse(
        design=[[float(v) for v in row] for row in model.X],
        response=[float(v) for v in model.z],
        theta_star=[float(v) for v in truth.theta_star],
        delta_star_bits=_bits(truth.delta_star),
        model=sm.ModelPayload(
            design=[[float(v) for v in row] for row in model.X],
            response=[float(v) for v in model.z],
            sigma2=model.sigma2,
            q=model.q,
            rho=model.rho,
            gamma=model.gamma,
        ),
        manifest={k: str(v) for k, v in manifest.items()},
    )


def health() -> sm.HealthResponse:
    return sm.HealthResponse(status="ok", version=__version__)
