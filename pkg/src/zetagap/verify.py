"""Seeded verification suites behind the `verify` command and the acceptance tests.

Every check pits an implementation against an independent route: explicit
python-loop enumerations, dense eigen/inverse oracles, the p-dimensional
closed-form Gaussian integral, Floyd-Warshall, analytic special cases, or
exact matrix-power total variation. Checks are deterministic given the seed,
and failing checks carry a serializable replay payload.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import chains as ch
from . import mixtures as mx
from .errors import ValidationError
from .gibbs import gibbs_step, init_from_model, run, sample_theta
from .rng import derive_rng
from .spike_slab import (
    SpikeSlabModel,
    bernoulli_probs,
    coherence,
    conditional_gaussian,
    exact_model_posterior,
    indicator_key,
    log_posterior_ratio,
    restricted_eigenvalue,
)

SUITE_NAMES = ("lemmas", "mixtures", "model", "sampler")


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""
    replay: dict | None = None

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.margin = float(self.margin)


@dataclass
class SuiteReport:
    suite: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _chain_replay(chain: ch.FiniteChain, **extra) -> dict:
    payload = {"P": chain.P.tolist(), "pi": chain.pi.tolist()}
    payload.update(extra)
    return payload


# ---------------------------------------------------------------- lemmas

def _brute_conductance(chain: ch.FiniteChain) -> float:
    best = math.inf
    for mask in range(1, 2**chain.d - 1):
        A = [x for x in range(chain.d) if mask >> x & 1]
        Ac = [x for x in range(chain.d) if not mask >> x & 1]
        flow = sum(chain.pi[x] * chain.P[x, y] for x in A for y in Ac)
        m = sum(chain.pi[x] for x in A)
        best = min(best, flow / (m * (1.0 - m)))
    return best


def _brute_zeta_conductance(chain: ch.FiniteChain, zeta: float) -> float:
    best = math.inf
    for mask in range(1, 2**chain.d - 1):
        A = [x for x in range(chain.d) if mask >> x & 1]
        m = sum(chain.pi[x] for x in A)
        if not zeta < m < 0.5:
            continue
        Ac = [x for x in range(chain.d) if not mask >> x & 1]
        flow = sum(chain.pi[x] * chain.P[x, y] for x in A for y in Ac)
        best = min(best, flow / ((m - zeta) * (1.0 - m - zeta)))
    return best


def suite_lemmas(seed: int = 0, quick: bool = False) -> SuiteReport:
    report = SuiteReport("lemmas")
    rng = derive_rng(seed, 101)

    # Cheeger sandwich on 200 random lazy reversible chains.
    worst, replay = math.inf, None
    n_chains = 40 if quick else 200
    for _ in range(n_chains):
        chain = ch.random_lazy_chain(int(rng.integers(2, 11)), rng)
        phi = ch.conductance(chain)
        gap = ch.spectral_gap(chain)
        margin = min(gap - phi**2 / 8.0, phi - gap)
        if margin < worst:
            worst, replay = margin, _chain_replay(chain)
    report.checks.append(
        CheckResult(
            "cheeger-sandwich",
            worst >= -ch.INEQ_SLACK,
            worst,
            f"{n_chains} chains, worst slack {worst:.3e}",
            None if worst >= -ch.INEQ_SLACK else replay,
        )
    )

    # Algebraic identities on random chains and functions.
    worst_id = math.inf
    worst_contract = math.inf
    for _ in range(10 if quick else 50):
        chain = ch.random_lazy_chain(int(rng.integers(2, 11)), rng)
        f = rng.standard_normal(chain.d)
        fbar = f - chain.pi @ f
        cross = float(chain.pi @ (fbar * (chain.P @ fbar)))
        err = abs(ch.dirichlet_form(chain, f) - (ch.variance(chain, f) - cross))
        worst_id = min(worst_id, ch.IDENTITY_TOL - err)
        slack = ch.variance(chain, f) - ch.dirichlet_form(chain, f) - ch.variance(
            chain, chain.P @ f
        )
        worst_contract = min(worst_contract, slack)
    report.checks.append(
        CheckResult(
            "dirichlet-variance-identity",
            worst_id >= 0,
            worst_id,
            "form equals variance minus lag-one cross term",
        )
    )
    report.checks.append(
        CheckResult(
            "one-step-variance-contraction",
            worst_contract >= -ch.IDENTITY_TOL,
            worst_contract,
            "Var(Kf) <= Var(f) - E(f,f) on every instance",
        )
    )

    # TV mixing bound with the plain spectral gap as the certified lower bound.
    worst_margin, replay = math.inf, None
    for _ in range(10 if quick else 50):
        chain = ch.random_lazy_chain(int(rng.integers(2, 11)), rng)
        f0 = ch.random_density(chain, rng)
        zeta = float(rng.uniform(0.02, 0.45))
        m = float(rng.choice([2.5, 3.0, 4.0, math.inf]))
        rep = ch.verify_mixing_bound(
            chain, f0, zeta, ch.NormSpec(m), 200, ch.spectral_gap(chain)
        )
        if rep.worst_margin < worst_margin:
            worst_margin = rep.worst_margin
            replay = _chain_replay(chain, f0=f0.tolist(), zeta=zeta, m=m)
    report.checks.append(
        CheckResult(
            "tv-mixing-bound",
            worst_margin >= -ch.INEQ_SLACK,
            worst_margin,
            "squared TV within the geometric-plus-additive budget for n <= 200",
            None if worst_margin >= -ch.INEQ_SLACK else replay,
        )
    )

    # Monotone TV decay.
    worst_mono = math.inf
    for _ in range(5 if quick else 20):
        chain = ch.random_lazy_chain(int(rng.integers(2, 9)), rng)
        pi0 = np.zeros(chain.d)
        pi0[int(rng.integers(chain.d))] = 1.0
        diffs = np.diff(ch.tv_evolution(chain, pi0, 50))
        worst_mono = min(worst_mono, float(-diffs.max()))
    report.checks.append(
        CheckResult(
            "tv-monotone",
            worst_mono >= -ch.IDENTITY_TOL,
            worst_mono,
            "distance to stationarity never increases",
        )
    )

    # Two-sided zeta-gap bracket and its ordering against the plain gap.
    worst_order, replay = math.inf, None
    norm = ch.NormSpec()
    for _ in range(8 if quick else 30):
        chain = ch.random_lazy_chain(8, rng)
        zeta = float(rng.uniform(0.02, 0.45))
        lo, _ = ch.zeta_gap_lower(chain, zeta, norm)
        up, _ = ch.zeta_gap_upper(chain, zeta, norm)
        margin = min(lo - ch.spectral_gap(chain), up - lo)
        if margin < worst_order:
            worst_order, replay = margin, _chain_replay(chain, zeta=zeta)
    report.checks.append(
        CheckResult(
            "zeta-gap-order",
            worst_order >= -ch.CONSTRUCT_TOL,
            worst_order,
            "spectral gap <= certified lower bound <= searched upper bound",
            None if worst_order >= -ch.CONSTRUCT_TOL else replay,
        )
    )

    # Shared-pool monotonicity of the searched upper bound in zeta.
    chain = ch.random_lazy_chain(6, rng)
    pool = ch._candidate_pool(chain, 32, seed)
    vals = [ch.zeta_gap_upper(chain, z, norm, pool=pool)[0] for z in (0.05, 0.15, 0.3, 0.45)]
    mono = min(b - a for a, b in zip(vals, vals[1:]))
    report.checks.append(
        CheckResult(
            "zeta-upper-monotone",
            mono >= -ch.IDENTITY_TOL,
            mono,
            "shared candidate pool, increasing zeta",
        )
    )

    # Restriction to the full space must reproduce the spectral gap.
    worst_full = math.inf
    for _ in range(5 if quick else 20):
        chain = ch.random_lazy_chain(int(rng.integers(2, 9)), rng)
        err = abs(
            ch.restricted_spectral_gap(chain, np.ones(chain.d, dtype=bool))
            - ch.spectral_gap(chain)
        )
        worst_full = min(worst_full, ch.CONSTRUCT_TOL - err)
    report.checks.append(
        CheckResult("restricted-gap-full-space", worst_full >= 0, worst_full, "1e-10 agreement")
    )

    # Cut enumerations against explicit python-loop oracles.
    worst_cut = math.inf
    for _ in range(3 if quick else 10):
        chain = ch.random_lazy_chain(int(rng.integers(2, 9)), rng)
        err = abs(ch.conductance(chain) - _brute_conductance(chain))
        got = ch.zeta_conductance(chain, 0.05)
        want = _brute_zeta_conductance(chain, 0.05)
        err_z = abs(got - want) if math.isfinite(want) else (0.0 if math.isinf(got) else math.inf)
        worst_cut = min(worst_cut, ch.IDENTITY_TOL - max(err, err_z))
    report.checks.append(
        CheckResult(
            "cut-enumeration-bruteforce",
            worst_cut >= 0,
            worst_cut,
            "conductance and zeta-conductance vs loop oracle",
        )
    )
    return report


# ---------------------------------------------------------------- mixtures

def _floyd_warshall_diameter(adj: np.ndarray) -> float:
    k = adj.shape[0]
    dist = np.where(adj, 1.0, math.inf)
    np.fill_diagonal(dist, 0.0)
    for m in range(k):
        dist = np.minimum(dist, dist[:, m : m + 1] + dist[m : m + 1, :])
    return float(dist.max())


def _worked_example() -> mx.MixtureSpec:
    pi1 = np.array([0.5, 0.5, 0.0])
    pi2 = np.array([0.0, 0.5, 0.5])
    k1 = 0.5 * np.eye(3) + 0.5 * np.tile(pi1, (3, 1))
    k2 = 0.5 * np.eye(3) + 0.5 * np.tile(pi2, (3, 1))
    return mx.MixtureSpec((mx.MixtureComponent(0.5, pi1, k1), mx.MixtureComponent(0.5, pi2, k2)))


def suite_mixtures(seed: int = 0, quick: bool = False) -> SuiteReport:
    report = SuiteReport("mixtures")
    rng = derive_rng(seed, 102)

    spec = _worked_example()
    chain = mx.build_mixture_kernel(spec)
    gap = ch.spectral_gap(chain)
    bound = mx.madras_randall_bound(spec)
    errs = [
        abs(gap - 0.25),
        abs(bound.value - 0.0625),
        abs(mx.overlap(spec, 0, 1) - 0.5),
        float(np.abs(chain.pi - np.array([0.25, 0.5, 0.25])).max()),
    ]
    worst = ch.CONSTRUCT_TOL - max(errs)
    report.checks.append(
        CheckResult(
            "two-component-worked-example",
            worst >= 0,
            worst,
            "exact gap 0.25, bound 0.0625, overlap 0.5",
        )
    )

    n_inst = 20 if quick else 100
    worst_mr, worst_zeta, replay = math.inf, math.inf, None
    norm = ch.NormSpec()
    for _ in range(n_inst):
        n_comp = int(rng.integers(2, 5))
        d = int(rng.integers(3, 9))
        flat = mx.random_mixture(rng, n_comp, d)
        chain = mx.build_mixture_kernel(flat)
        slack_mr = ch.spectral_gap(chain) - mx.madras_randall_bound(flat).value

        masked = mx.random_mixture(rng, n_comp, d, with_masks=True)
        zeta = float(rng.uniform(0.05, 0.45))
        mchain = mx.build_mixture_kernel(masked)
        up, _ = ch.zeta_gap_upper(mchain, zeta, norm)
        slack_zeta = up - mx.mixture_zeta_gap_bound(masked, zeta, norm).value
        if min(slack_mr, slack_zeta) < min(worst_mr, worst_zeta):
            replay = {"seed_note": "regenerate via suite seed", "zeta": zeta, "d": d}
        worst_mr = min(worst_mr, slack_mr)
        worst_zeta = min(worst_zeta, slack_zeta)
    report.checks.append(
        CheckResult(
            "madras-randall-vs-gap",
            worst_mr >= -ch.CONSTRUCT_TOL,
            worst_mr,
            f"bound below exact gap on {n_inst} random mixtures",
            None if worst_mr >= -ch.CONSTRUCT_TOL else replay,
        )
    )
    report.checks.append(
        CheckResult(
            "zeta-bound-vs-upper",
            worst_zeta >= -ch.CONSTRUCT_TOL,
            worst_zeta,
            f"masked-mixture bound below searched upper bound on {n_inst} instances",
            None if worst_zeta >= -ch.CONSTRUCT_TOL else replay,
        )
    )

    worst_diam = math.inf
    for _ in range(5 if quick else 20):
        k = int(rng.integers(2, 7))
        adj = rng.random((k, k)) < 0.45
        adj = (adj | adj.T) & ~np.eye(k, dtype=bool)
        got = mx.bfs_diameter(adj)
        want = _floyd_warshall_diameter(adj)
        same = (got == want) or (math.isinf(got) and math.isinf(want))
        worst_diam = min(worst_diam, 0.0 if same else -abs(got - want))
    report.checks.append(
        CheckResult("diameter-floyd-warshall", worst_diam >= 0, worst_diam, "BFS vs FW oracle")
    )

    base = ch.random_lazy_chain(5, rng)
    single = mx.MixtureSpec((mx.MixtureComponent(1.0, base.pi, base.P),))
    err = abs(mx.madras_randall_bound(single).value - ch.spectral_gap(base))
    report.checks.append(
        CheckResult(
            "single-component-degenerate",
            err <= ch.CONSTRUCT_TOL,
            ch.CONSTRUCT_TOL - err,
            "one-node graph wins no graph factor",
        )
    )
    return report


# ---------------------------------------------------------------- model

def _closed_form_log_joint(model: SpikeSlabModel, delta: np.ndarray) -> float:
    """p-dimensional Gaussian-integral route, independent of the n x n path."""
    D = np.where(delta == 1, 1.0 / model.rho, model.gamma)
    A = model.X.T @ model.X / model.sigma2 + np.diag(1.0 / D)
    b = model.X.T @ model.z / model.sigma2
    k = int(delta.sum())
    log_omega = k * math.log(model.q) + (model.p - k) * math.log(1.0 - model.q)
    _, logdet_a = np.linalg.slogdet(A)
    return (
        log_omega
        - 0.5 * float(np.sum(np.log(D)))
        - float(model.z @ model.z) / (2.0 * model.sigma2)
        - 0.5 * logdet_a
        + 0.5 * float(b @ np.linalg.solve(A, b))
    )


def _random_model(rng, n, p, **kwargs) -> SpikeSlabModel:
    X = rng.standard_normal((n, p))
    theta = rng.standard_normal(p) * (rng.random(p) < 0.3)
    z = X @ theta + rng.standard_normal(n)
    params = dict(sigma2=1.0, q=0.2, rho=1.0, gamma=0.05)
    params.update(kwargs)
    return SpikeSlabModel(X, z, **params)


def _whitened(model: SpikeSlabModel, delta) -> np.ndarray:
    D = model.prior_diagonal(delta)
    return np.eye(model.n) + (model.X * D) @ model.X.T / model.sigma2


def suite_model(seed: int = 0, quick: bool = False) -> SuiteReport:
    report = SuiteReport("model")
    rng = derive_rng(seed, 103)

    # Posterior ratio against the closed-form integral.
    worst, replay = math.inf, None
    for _ in range(25 if quick else 100):
        p = int(rng.integers(1, 7))
        model = _random_model(rng, int(rng.integers(3, 9)), p)
        a = (rng.random(p) < 0.5).astype(np.uint8)
        b = (rng.random(p) < 0.5).astype(np.uint8)
        got = log_posterior_ratio(model, a, b)
        want = _closed_form_log_joint(model, a) - _closed_form_log_joint(model, b)
        rel = abs(got - want) / max(1.0, abs(got), abs(want))
        if 1e-8 - rel < worst:
            worst = 1e-8 - rel
            replay = {"X": model.X.tolist(), "z": model.z.tolist(), "a": a.tolist(), "b": b.tolist()}
    report.checks.append(
        CheckResult(
            "posterior-ratio-closed-form",
            worst >= 0,
            worst,
            "100 instances, p <= 6, rel err <= 1e-8",
            None if worst >= 0 else replay,
        )
    )

    # Determinant-update and inverse-update identities on nested indicators.
    worst_det, worst_wood = math.inf, math.inf
    for _ in range(10 if quick else 40):
        p = int(rng.integers(2, 8))
        model = _random_model(rng, int(rng.integers(3, 9)), p)
        delta = (rng.random(p) < 0.4).astype(np.uint8)
        extra = ((rng.random(p) < 0.4) & (delta == 0)).astype(np.uint8)
        if extra.sum() == 0:
            continue
        sup = delta | extra
        cols = model.X[:, extra == 1]
        Ld = _whitened(model, delta)
        inner = np.eye(int(extra.sum())) + model.tau * cols.T @ np.linalg.solve(Ld, cols)
        _, want = np.linalg.slogdet(inner)
        _, got_d = np.linalg.slogdet(_whitened(model, sup))
        _, got_s = np.linalg.slogdet(Ld)
        worst_det = min(worst_det, 1e-9 - abs((got_d - got_s) - want))

        v = rng.standard_normal(model.n)
        lhs = np.linalg.solve(_whitened(model, sup), v)
        Ld_inv_v = np.linalg.solve(Ld, v)
        Ld_inv_cols = np.linalg.solve(Ld, cols)
        rhs = Ld_inv_v - model.tau * Ld_inv_cols @ np.linalg.solve(inner, cols.T @ Ld_inv_v)
        worst_wood = min(worst_wood, 1e-9 - float(np.abs(lhs - rhs).max()))
    report.checks.append(
        CheckResult("determinant-update-identity", worst_det >= 0, worst_det, "1e-9 budget")
    )
    report.checks.append(
        CheckResult("inverse-update-identity", worst_wood >= 0, worst_wood, "1e-9 budget")
    )

    # Enumeration normalization and reference invariance.
    model = _random_model(rng, 8, 6)
    post = exact_model_posterior(model)
    ref = (rng.random(6) < 0.5).astype(np.uint8)
    other = exact_model_posterior(model, reference=ref)
    err_sum = abs(sum(post.values()) - 1.0)
    err_ref = max(abs(other[k] - v) for k, v in post.items())
    worst_enum = 1e-10 - max(err_sum, err_ref)
    report.checks.append(
        CheckResult(
            "enumeration-normalization",
            worst_enum >= 0,
            worst_enum,
            "sums to one; independent of the reference indicator",
        )
    )

    # Bernoulli conditional: prior collapse and monotonicity.
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        collapsed = SpikeSlabModel(np.zeros((3, 4)), np.zeros(3), 1.0, 0.3, 2.0, 0.5)
    err_collapse = float(
        np.abs(bernoulli_probs(collapsed, np.array([0.0, 1.0, -3.0, 8.0])) - 0.3).max()
    )
    model = _random_model(rng, 8, 5)
    probs = [bernoulli_probs(model, np.full(5, t))[0] for t in np.linspace(0, 4, 30)]
    mono_ok = all(b >= a for a, b in zip(probs, probs[1:]))
    passed = err_collapse <= 1e-12 and mono_ok
    report.checks.append(
        CheckResult(
            "bernoulli-conditional",
            passed,
            1e-12 - err_collapse if mono_ok else -1.0,
            "collapses to q at rho = 1/gamma; monotone in |theta_j|",
        )
    )

    # Conditional covariance equals the inverse-precision form.
    worst_cov = math.inf
    for _ in range(5 if quick else 15):
        model = _random_model(rng, 8, 5)
        delta = (rng.random(5) < 0.5).astype(np.uint8)
        cg = conditional_gaussian(model, delta)
        D = model.prior_diagonal(delta)
        want = np.linalg.inv(model.X.T @ model.X / model.sigma2 + np.diag(1.0 / D))
        rel = float(np.abs(cg.covariance - want).max() / np.abs(want).max())
        worst_cov = min(worst_cov, 1e-8 - rel)
    report.checks.append(
        CheckResult("conditional-covariance-identity", worst_cov >= 0, worst_cov, "1e-8 relative")
    )

    # Orthogonal-design analytic values.
    n, p = 12, 6
    Xo = np.zeros((n, p))
    Xo[:p, :p] = math.sqrt(n) * np.eye(p)
    omodel = SpikeSlabModel(Xo, np.arange(n, dtype=float) / n, 1.0, 0.2, 1.0, 0.05)
    err_coh = abs(coherence(omodel, 2))
    want_rho = 1.0 / (1.0 + omodel.gamma * n / omodel.sigma2)
    err_rho = abs(restricted_eigenvalue(omodel, 2).value - want_rho)
    worst_orth = 1e-10 - max(err_coh, err_rho)
    report.checks.append(
        CheckResult(
            "orthogonal-design-analytics",
            worst_orth >= 0,
            worst_orth,
            "coherence 0 and restricted eigenvalue 1/(1 + gamma n / sigma^2)",
        )
    )

    # Enumerated diagnostics against brute force on a p <= 20 instance.
    p = 10 if quick else 20
    model = _random_model(rng, 12, p)
    got_c = coherence(model, 2)
    want_c = 0.0
    got_r = restricted_eigenvalue(model, 2)
    want_r = math.inf
    for k in range(3):
        for sup in combinations(range(p), k):
            delta = np.zeros(p, dtype=np.uint8)
            delta[list(sup)] = 1
            G = model.X.T @ np.linalg.inv(_whitened(model, delta)) @ model.X
            off = np.abs(G - np.diag(np.diag(G)))
            want_c = max(want_c, float(off.max()))
            free = np.flatnonzero(delta == 0)
            Gn = G[np.ix_(free, free)] / model.n
            for ssz in (1, 2):
                for S in combinations(range(free.size), ssz):
                    want_r = min(want_r, float(np.linalg.eigvalsh(Gn[np.ix_(S, S)])[0]))
    err = max(abs(got_c - want_c) / max(1.0, want_c), abs(got_r.value - want_r))
    report.checks.append(
        CheckResult(
            "diagnostics-bruteforce",
            err <= 1e-9,
            1e-9 - err,
            f"coherence and restricted eigenvalue at p = {p}, s = 2",
        )
    )
    return report


# ---------------------------------------------------------------- sampler

def _stationarity_instance():
    rng = derive_rng(600)
    n, p = 20, 8
    X = rng.standard_normal((n, p))
    theta = np.zeros(p)
    theta[:2] = 0.6
    z = X @ theta + rng.standard_normal(n)
    lam = np.linalg.eigvalsh(X.T @ X).max()
    return SpikeSlabModel(X, z, 1.0, 8.0 / (1.0 + p**2), 1.0 / math.sqrt(n), 0.1 / lam)


def suite_sampler(seed: int = 0, quick: bool = False) -> SuiteReport:
    report = SuiteReport("sampler")
    rng = derive_rng(seed, 104)

    # Determinism.
    model = _random_model(rng, 10, 6)
    init = np.zeros(6, dtype=np.uint8)
    a = run(model, init, 200, seed=(seed, 1))
    b = run(model, init, 200, seed=(seed, 1))
    same = np.array_equal(a.deltas, b.deltas) and np.array_equal(a.lazy, b.lazy)
    report.checks.append(
        CheckResult("trajectory-determinism", same, 0.0 if same else -1.0, "bit-identical reruns")
    )

    # Laziness frequency inside the binomial band.
    n_iters = 2000 if quick else 10_000
    traj = run(model, init, n_iters, seed=(seed, 2))
    dev = abs(traj.lazy_fraction - 0.5)
    band = 4.0 * math.sqrt(0.25 / n_iters)
    report.checks.append(
        CheckResult(
            "lazy-fraction",
            dev <= band,
            band - dev,
            f"|freq - 1/2| = {dev:.4f} within 4-sigma band {band:.4f}",
        )
    )

    # Exact Gaussian draws: empirical moments vs analytic, both strategies.
    n_draws = 20_000 if quick else 100_000
    for strategy, (n_, p_) in (("direct", (10, 8)), ("woodbury", (10, 15))):
        model_s = _random_model(rng, n_, p_)
        delta = (rng.random(p_) < 0.4).astype(np.uint8)
        cg = conditional_gaussian(model_s, delta)
        draws = sample_theta(model_s, delta, derive_rng(seed, 105), strategy, size=n_draws)
        mean_se = np.sqrt(np.diag(cg.covariance) / n_draws)
        mean_dev = float((np.abs(draws.mean(axis=0) - cg.mean) / mean_se).max())
        C = cg.covariance
        cov_se = np.sqrt((np.outer(np.diag(C), np.diag(C)) + C**2) / n_draws)
        cov_dev = float((np.abs(np.cov(draws.T, bias=True) - C) / cov_se).max())
        dev = max(mean_dev, cov_dev)
        report.checks.append(
            CheckResult(
                f"theta-moments-{strategy}",
                dev <= 4.0,
                4.0 - dev,
                f"worst moment z-score {dev:.2f} over {n_draws} draws",
            )
        )

    # Warm-start initializer moments (single-draw path).
    n_inits = 4000 if quick else 20_000
    model_i = _random_model(rng, 10, 6)
    delta_i = np.array([1, 1, 0, 0, 0, 0], dtype=np.uint8)
    cg = conditional_gaussian(model_i, delta_i)
    draws = np.stack(
        [init_from_model(model_i, delta_i, (seed, 106, i)).theta for i in range(n_inits)]
    )
    mean_se = np.sqrt(np.diag(cg.covariance) / n_inits)
    dev = float((np.abs(draws.mean(axis=0) - cg.mean) / mean_se).max())
    report.checks.append(
        CheckResult(
            "init-moments",
            dev <= 4.5,
            4.5 - dev,
            f"worst initializer mean z-score {dev:.2f} over {n_inits} draws",
        )
    )

    # Stationary indicator marginal vs exact enumeration.
    model_t = _stationarity_instance()
    post = exact_model_posterior(model_t)
    n_total = 40_000 if quick else 200_000
    burn = 1000
    state = init_from_model(
        model_t, np.array([1, 1, 0, 0, 0, 0, 0, 0], dtype=np.uint8), (seed, 107), "direct"
    )
    counts: dict = {}
    for k in range(n_total + burn):
        state, _ = gibbs_step(model_t, state, "direct")
        if k >= burn:
            key = indicator_key(state.last_delta)
            counts[key] = counts.get(key, 0) + 1
    freq = [counts.get(key, 0) / n_total for key in post]
    tv = ch.total_variation(freq, list(post.values()))
    budget = 0.08 if quick else 0.05
    report.checks.append(
        CheckResult(
            "stationary-indicator-marginal",
            tv <= budget,
            budget - tv,
            f"TV {tv:.4f} between {n_total}-iteration frequencies and enumeration",
        )
    )
    return report


SUITES = {
    "lemmas": suite_lemmas,
    "mixtures": suite_mixtures,
    "model": suite_model,
    "sampler": suite_sampler,
}


def run_suites(names, seed: int = 0, quick: bool = False) -> list[SuiteReport]:
    if isinstance(names, str):
        names = SUITE_NAMES if names == "all" else (names,)
    reports = []
    for name in names:
        if name not in SUITES:
            raise ValidationError(f"unknown suite {name!r}; choose from {SUITE_NAMES + ('all',)}")
        reports.append(SUITES[name](seed=seed, quick=quick))
    return reports
