"""Spike-and-slab linear regression: posterior conditionals and diagnostics.

The model puts independent Bernoulli(q) indicators delta_j on p coefficients;
theta_j is N(0, 1/rho) when selected and N(0, gamma) otherwise, and the
response is z ~ N(X theta, sigma^2 I). All posterior arithmetic runs in log
space through the n x n matrices

    L_delta = I_n + X D_delta X' / sigma^2,

never forming p x p objects on the hot path (the target regime has n << p).
Exact model-posterior enumeration, design coherence, and the restricted
eigenvalue of the whitened Gram matrix are provided for small instances as
verification oracles and diagnostics.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg
from scipy.special import expit, logsumexp

from .errors import CapacityError, NumericalError, ValidationError

MAX_ENUM_COEFFS = 15
DEFAULT_MODEL_CAP = 2000


def as_indicator(delta, p: int) -> np.ndarray:
    delta = np.asarray(delta)
    if delta.shape != (p,) or not np.isin(delta, (0, 1)).all():
        raise ValidationError(f"indicator must be a 0/1 vector of length {p}")
    return delta.astype(np.uint8)


def indicator_key(delta) -> tuple[int, ...]:
    return tuple(int(b) for b in delta)


@dataclass(frozen=True)
class SpikeSlabModel:
    """Design X (n x p), response z, noise variance, and prior hyperparameters.

    q is the prior inclusion probability, 1/rho the slab variance, gamma the
    spike variance. gamma >= 1/(2 rho) draws a warning (the slab should be
    markedly wider than the spike) but stays runnable.
    """

    X: np.ndarray
    z: np.ndarray
    sigma2: float
    q: float
    rho: float
    gamma: float

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if X.ndim != 2:
            raise ValidationError("design matrix must be 2-d")
        if z.shape != (X.shape[0],):
            raise ValidationError(
                f"response length {z.shape} does not match {X.shape[0]} design rows"
            )
        if self.sigma2 <= 0 or self.rho <= 0 or self.gamma <= 0:
            raise ValidationError("sigma2, rho and gamma must be positive")
        if not 0 < self.q < 1:
            raise ValidationError(f"prior inclusion probability must be in (0,1), got {self.q}")
        if not self.gamma < 1.0 / (2.0 * self.rho):
            warnings.warn(
                f"spike variance gamma={self.gamma} is not below 1/(2 rho)={1/(2*self.rho)}; "
                "the slab/spike separation assumption is violated",
                stacklevel=2,
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def tau(self) -> float:
        """(1/sigma^2)(1/rho - gamma), the rank-one update weight when a
        coordinate moves from spike to slab."""
        return (1.0 / self.rho - self.gamma) / self.sigma2

    @property
    def log_prior_odds(self) -> float:
        return math.log(self.q / (1.0 - self.q))

    def prior_diagonal(self, delta) -> np.ndarray:
        delta = as_indicator(delta, self.p)
        return np.where(delta == 1, 1.0 / self.rho, self.gamma)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.X.tobytes())
        h.update(self.z.tobytes())
        h.update(np.array([self.sigma2, self.q, self.rho, self.gamma]).tobytes())
        return h.hexdigest()[:16]


def bernoulli_probs(model: SpikeSlabModel, theta) -> np.ndarray:
    """Posterior inclusion probabilities q_j given the current coefficients.

    Computed in log-odds space: logit(q_j) = logit(q) + (1/2) log(gamma rho)
    - (1/2)(rho - 1/gamma) theta_j^2, which saturates cleanly instead of
    overflowing.
    """
    theta = np.asarray(theta, dtype=float)
    log_odds = (
        model.log_prior_odds
        + 0.5 * math.log(model.gamma * model.rho)
        - 0.5 * (model.rho - 1.0 / model.gamma) * theta**2
    )
    return expit(log_odds)


@dataclass(frozen=True)
class ConditionalGaussian:
    """N(mean, cov) with cov carried as a factor M satisfying M M' = cov."""

    mean: np.ndarray
    cov_factor: np.ndarray

    @property
    def covariance(self) -> np.ndarray:
        return self.cov_factor @ self.cov_factor.T

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        if size is None:
            return self.mean + self.cov_factor @ rng.standard_normal(self.mean.shape[0])
        noise = rng.standard_normal((size, self.mean.shape[0]))
        return self.mean + noise @ self.cov_factor.T


def conditional_gaussian(model: SpikeSlabModel, delta) -> ConditionalGaussian:
    """Gaussian law of theta given delta: mean Sigma X'z, covariance sigma^2 Sigma
    with Sigma = (X'X + sigma^2 D_delta^{-1})^{-1}. Builds the p x p factor, so
    intended for moderate p; the sampler's n x n route avoids it."""
    D = model.prior_diagonal(delta)
    A = model.X.T @ model.X + model.sigma2 * np.diag(1.0 / D)
    try:
        low, lower = scipy.linalg.cho_factor(A, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(
            f"conditional covariance factorization failed (cond ~ {np.linalg.cond(A):.2e})"
        ) from exc
    mean = scipy.linalg.cho_solve((low, lower), model.X.T @ model.z)
    inv_low = scipy.linalg.solve_triangular(np.tril(low), np.eye(model.p), lower=True)
    cov_factor = math.sqrt(model.sigma2) * inv_low.T
    return ConditionalGaussian(mean=mean, cov_factor=cov_factor)


def _whitened_factor(model: SpikeSlabModel, delta):
    D = model.prior_diagonal(delta)
    L = np.eye(model.n) + (model.X * D) @ model.X.T / model.sigma2
    try:
        return scipy.linalg.cho_factor(L, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError("whitened-residual matrix is not positive definite") from exc


def log_L_delta_quadratics(model: SpikeSlabModel, delta) -> tuple[float, float]:
    """(log det L_delta, z' L_delta^{-1} z) through one symmetric factorization."""
    factor = _whitened_factor(model, delta)
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    quad = float(model.z @ scipy.linalg.cho_solve(factor, model.z))
    return logdet, quad


def log_posterior_ratio(model: SpikeSlabModel, delta, delta0) -> float:
    """log Pi(delta|z) - log Pi(delta0|z) via the n x n whitened matrices."""
    delta = as_indicator(delta, model.p)
    delta0 = as_indicator(delta0, model.p)
    ld1, q1 = log_L_delta_quadratics(model, delta)
    ld0, q0 = log_L_delta_quadratics(model, delta0)
    size_term = (int(delta.sum()) - int(delta0.sum())) * model.log_prior_odds
    return size_term + 0.5 * (ld0 - ld1) + (q0 - q1) / (2.0 * model.sigma2**2)


def _all_indicators(p: int) -> np.ndarray:
    masks = np.arange(1 << p, dtype=np.int64)
    return ((masks[:, None] >> np.arange(p)) & 1).astype(np.uint8)


def exact_model_posterior(model: SpikeSlabModel, reference=None) -> dict[tuple[int, ...], float]:
    """Exact posterior over all 2^p indicator vectors by log-sum-exp.

    Capped at p <= MAX_ENUM_COEFFS; the result is invariant (to roundoff) under
    the choice of reference indicator.
    """
    if model.p > MAX_ENUM_COEFFS:
        raise CapacityError(
            f"exact enumeration covers 2^p models; p = {model.p} exceeds {MAX_ENUM_COEFFS}"
        )
    reference = np.zeros(model.p, dtype=np.uint8) if reference is None else reference
    deltas = _all_indicators(model.p)
    logw = np.array([log_posterior_ratio(model, d, reference) for d in deltas])
    logw -= logsumexp(logw)
    probs = np.exp(logw)
    return {indicator_key(d): float(pr) for d, pr in zip(deltas, probs)}


def write_enumeration_csv(posterior: dict[tuple[int, ...], float], path) -> None:
    """Persist an enumeration as CSV with columns delta_bits, log_post, post."""
    lines = ["delta_bits,log_post,post"]
    for key, pr in posterior.items():
        bits = "".join(str(b) for b in key)
        lines.append(f"{bits},{math.log(pr) if pr > 0 else -math.inf},{pr!r}")
    from .fileio import atomic_write_text

    atomic_write_text(path, "\n".join(lines) + "\n")


def _capped_sparse_indicators(p: int, s: int, cap: int):
    count = sum(math.comb(p, k) for k in range(s + 1))
    if count > cap:
        raise CapacityError(
            f"enumerating {count} indicator vectors with up to {s} active coordinates "
            f"exceeds the cap {cap}"
        )
    for k in range(s + 1):
        for support in combinations(range(p), k):
            delta = np.zeros(p, dtype=np.uint8)
            delta[list(support)] = 1
            yield delta


def coherence(model: SpikeSlabModel, s: int, cap: int = DEFAULT_MODEL_CAP) -> float:
    """max over ||delta||_0 <= s and j != l of |X_j' L_delta^{-1} X_l|."""
    best = 0.0
    off = ~np.eye(model.p, dtype=bool)
    for delta in _capped_sparse_indicators(model.p, s, cap):
        G = model.X.T @ scipy.linalg.cho_solve(_whitened_factor(model, delta), model.X)
        best = max(best, float(np.abs(G[off]).max()))
    return best


@dataclass(frozen=True)
class RestrictedEigenvalue:
    """Smallest normalized sparse eigenvalue of X_{delta^c}' L_delta^{-1} X_{delta^c}."""

    value: float
    delta: tuple[int, ...]
    support: tuple[int, ...]


def restricted_eigenvalue(
    model: SpikeSlabModel, s0: int, cap: int = DEFAULT_MODEL_CAP
) -> RestrictedEigenvalue:
    """min over ||delta||_0 <= s0 and supports S of size <= s0 inside delta^c of
    lambda_min(X_S' L_delta^{-1} X_S) / n.

    Only maximal supports are enumerated: shrinking a support can only raise
    the smallest eigenvalue (eigenvalue interlacing), so the minimum over
    sizes <= s0 is attained at size min(s0, |delta^c|).
    """
    if s0 < 1:
        raise ValidationError("support size bound must be >= 1")
    best = RestrictedEigenvalue(math.inf, (), ())
    for delta in _capped_sparse_indicators(model.p, s0, cap):
        free = np.flatnonzero(delta == 0)
        t = min(s0, free.size)
        if t == 0:
            continue
        Gfull = model.X.T @ scipy.linalg.cho_solve(_whitened_factor(model, delta), model.X)
        G = Gfull[np.ix_(free, free)] / model.n
        if t == 1:
            k = int(np.argmin(np.diag(G)))
            val, sup = float(G[k, k]), (int(free[k]),)
        elif t == 2:
            a, b = np.triu_indices(free.size, k=1)
            mid = 0.5 * (G[a, a] + G[b, b])
            rad = np.sqrt((0.5 * (G[a, a] - G[b, b])) ** 2 + G[a, b] ** 2)
            lam = mid - rad
            k = int(np.argmin(lam))
            val, sup = float(lam[k]), (int(free[a[k]]), int(free[b[k]]))
        else:
            val, sup = math.inf, ()
            for S in combinations(range(free.size), t):
                lam = float(np.linalg.eigvalsh(G[np.ix_(S, S)])[0])
                if lam < val:
                    val, sup = lam, tuple(int(free[i]) for i in S)
        if val < best.value:
            best = RestrictedEigenvalue(val, indicator_key(delta), sup)
    return best


def detectability_threshold(n: int, p: float, sigma: float) -> float:
    """sigma sqrt(log(p)/n), the smallest reliably detectable coefficient size."""
    return float(sigma * math.sqrt(math.log(p) / n))


def detectable_support(theta_star, eps: float) -> np.ndarray:
    """Indicator of coefficients strictly larger than eps in absolute value."""
    return (np.abs(np.asarray(theta_star, dtype=float)) > eps).astype(np.uint8)


@dataclass(frozen=True)
class GroundTruth:
    """True coefficients with their full and detectable supports."""

    theta_star: np.ndarray
    delta_star: np.ndarray
    delta_tilde_star: np.ndarray
    eps: float
    amplitude: float | None = None

    @classmethod
    def from_theta(cls, theta_star, n: int, p: float, sigma: float, amplitude=None):
        theta_star = np.asarray(theta_star, dtype=float)
        eps = detectability_threshold(n, p, sigma)
        return cls(
            theta_star=theta_star,
            delta_star=(np.abs(theta_star) > 0).astype(np.uint8),
            delta_tilde_star=detectable_support(theta_star, eps),
            eps=eps,
            amplitude=amplitude,
        )

    @property
    def s_star(self) -> int:
        return int(self.delta_star.sum())

    @property
    def s_tilde_star(self) -> int:
        return int(self.delta_tilde_star.sum())

    @property
    def detectable_l1(self) -> float:
        return float(np.abs(self.theta_star[self.delta_tilde_star == 1]).sum())


def u_from_q(q: float, p: int) -> float:
    """Invert the prior-odds rule q/(1-q) = p^-(u+1)."""
    return -math.log(q / (1.0 - q)) / math.log(p) - 1.0


def sparse_gram_minimum(X, s: int, cap: int = DEFAULT_MODEL_CAP) -> RestrictedEigenvalue:
    """min over supports |S| <= s of lambda_min(X_S' X_S) / n.

    The sparse lower singular bound of the raw design (no whitening); 1 for
    orthogonal columns normalized to ||X_j||^2 = n.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if s < 1:
        raise ValidationError("support size bound must be >= 1")
    count = math.comb(p, min(s, p))
    if count > cap:
        raise CapacityError(f"enumerating {count} supports exceeds the cap {cap}")
    G = X.T @ X / n
    best = RestrictedEigenvalue(math.inf, (), ())
    for S in combinations(range(p), min(s, p)):
        lam = float(np.linalg.eigvalsh(G[np.ix_(S, S)])[0])
        if lam < best.value:
            best = RestrictedEigenvalue(lam, (), tuple(S))
    return best


@dataclass(frozen=True)
class DesignEventReport:
    """Design-regularity diagnostics for a Gaussian-ensemble-style matrix.

    Reports the four regularity statistics (sparse Gram minimum, extreme
    column norms, worst cross inner product) against the reference
    thresholds kappa_0 = 1/64 and c_0 = 8. These hold with high probability
    for iid normal designs; membership is reported, never guaranteed.
    """

    sparse_gram_min: float
    sparse_gram_ok: bool
    max_column_norm: float
    max_column_ok: bool
    min_column_norm: float
    min_column_ok: bool
    max_cross_inner: float
    max_cross_ok: bool

    @property
    def all_ok(self) -> bool:
        return (
            self.sparse_gram_ok and self.max_column_ok and self.min_column_ok and self.max_cross_ok
        )


def design_event_check(X, s: int, cap: int = DEFAULT_MODEL_CAP) -> DesignEventReport:
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    norms = np.linalg.norm(X, axis=0)
    gram = X.T @ X
    off = np.abs(gram[~np.eye(p, dtype=bool)])
    v = sparse_gram_minimum(X, s, cap=cap).value
    return DesignEventReport(
        sparse_gram_min=v,
        sparse_gram_ok=v >= 1.0 / 64.0,
        max_column_norm=float(norms.max()),
        max_column_ok=bool(norms.max() <= 2.0 * math.sqrt(n)),
        min_column_norm=float(norms.min()),
        min_column_ok=bool(norms.min() >= math.sqrt(n / 2.0)),
        max_cross_inner=float(off.max()) if off.size else 0.0,
        max_cross_ok=bool((float(off.max()) if off.size else 0.0) <= 8.0 * math.sqrt(n * math.log(p))),
    )


def _superset_family(delta_tilde: np.ndarray, k: int):
    """Indicators containing delta_tilde with at most k extra active coordinates."""
    base = delta_tilde.astype(np.uint8)
    free = np.flatnonzero(base == 0)
    for extra in range(k + 1):
        for combo in combinations(free, extra):
            delta = base.copy()
            delta[list(combo)] = 1
            yield delta


@dataclass(frozen=True)
class ContractionReport:
    """Posterior-concentration event: three conditions with their raw values."""

    detectable_mass: float
    detectable_mass_ok: bool
    superset_mass: float
    superset_threshold: float
    superset_mass_ok: bool
    deviation: float
    deviation_threshold: float
    deviation_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.detectable_mass_ok and self.superset_mass_ok and self.deviation_ok


def contraction_event_check(
    model: SpikeSlabModel,
    truth: GroundTruth,
    k: int,
    u: float | None = None,
) -> ContractionReport:
    """Evaluate the three posterior-contraction conditions at false-positive budget k.

    (1) the detectable support holds at least half the posterior mass;
    (2) its supersets with at most k extras hold mass >= 1 - 4 p^{-u(k+1)/2};
    (3) the worst whitened correlation between any column and the true residual,
        over that superset family, is at most 2 sqrt((k+1) n log p).
    Posterior masses come from exact enumeration, so p is capacity-capped.
    """
    if u is None:
        u = u_from_q(model.q, model.p)
    posterior = exact_model_posterior(model)
    tilde_key = indicator_key(truth.delta_tilde_star)
    detectable_mass = posterior.get(tilde_key, 0.0)
    superset_mass = sum(
        posterior[indicator_key(d)] for d in _superset_family(truth.delta_tilde_star, k)
    )
    superset_threshold = 1.0 - 4.0 / model.p ** (u * (k + 1) / 2.0)
    residual = model.z - model.X @ truth.theta_star
    sigma = math.sqrt(model.sigma2)
    deviation = 0.0
    for delta in _superset_family(truth.delta_tilde_star, k):
        w = scipy.linalg.cho_solve(_whitened_factor(model, delta), residual)
        deviation = max(deviation, float(np.abs(model.X.T @ w).max()) / sigma)
    deviation_threshold = 2.0 * math.sqrt((k + 1) * model.n * math.log(model.p))
    return ContractionReport(
        detectable_mass=detectable_mass,
        detectable_mass_ok=detectable_mass >= 0.5,
        superset_mass=superset_mass,
        superset_threshold=superset_threshold,
        superset_mass_ok=superset_mass >= superset_threshold,
        deviation=deviation,
        deviation_threshold=deviation_threshold,
        deviation_ok=deviation <= deviation_threshold,
    )


@dataclass(frozen=True)
class WarmStartReport:
    """Warm-start requirement and iteration-count factors, in log10.

    The iteration bound is (A / (gamma rho)) log(1/zeta0) f1 f2 f3 with an
    unspecified absolute constant A reported symbolically as 1.
    """

    u: float
    fp: int
    k: int
    warm_start_lhs: float
    warm_start_rhs: float
    warm_start_ok: bool
    factor1_log10: float
    factor2_log10: float
    factor3_log10: float
    prefactor_log10: float
    total_log10: float
    constant_symbol: str = "A=1"


def warm_start_diagnostics(
    model: SpikeSlabModel,
    truth: GroundTruth,
    k: int,
    fp: int,
    zeta0: float,
    u: float | None = None,
    rho_hat: float | None = None,
    coh: float | None = None,
    cap: int = DEFAULT_MODEL_CAP,
) -> WarmStartReport:
    """Evaluate the warm-start inequality and the mixing-time exponent breakdown.

    ``rho_hat`` (restricted eigenvalue) and ``coh`` (design coherence at
    s_tilde + k) are computed by enumeration when not supplied, subject to the
    usual capacity cap; at realistic scale pass estimates explicitly.
    """
    if not 0 < zeta0 < 1:
        raise ValidationError("zeta0 must lie in (0, 1)")
    n, p = model.n, model.p
    if u is None:
        u = u_from_q(model.q, p)
    if rho_hat is None:
        rho_hat = restricted_eigenvalue(model, max(1, k), cap=cap).value
    if coh is None:
        coh = coherence(model, truth.s_tilde_star + k, cap=cap)
    logp = math.log(p)
    rhs = (
        4.0 * (1.0 + 1.0 / u) * fp
        + (2.0 * fp / u) * math.log1p(n * fp / (model.sigma2 * model.rho)) / logp
        + (2.0 / u) * math.log(320.0 / zeta0**2) / logp
    )
    base = truth.s_star + 2.0 * math.sqrt(1.0 + k) + truth.detectable_l1 * coh / (
        math.sqrt(model.sigma2) * math.sqrt(n * logp)
    )
    factor1 = (base**2 / (2.0 * rho_hat)) * math.log10(p)
    factor2 = k * (u + 1.0) * math.log10(p)
    factor3 = 0.5 * k * math.log10(1.0 + n * k / (model.sigma2 * model.rho))
    prefactor = math.log10(1.0 / (model.gamma * model.rho)) + math.log10(math.log(1.0 / zeta0))
    return WarmStartReport(
        u=u,
        fp=fp,
        k=k,
        warm_start_lhs=float(k + 1),
        warm_start_rhs=rhs,
        warm_start_ok=(k + 1) >= rhs,
        factor1_log10=factor1,
        factor2_log10=factor2,
        factor3_log10=factor3,
        prefactor_log10=prefactor,
        total_log10=prefactor + factor1 + factor2 + factor3,
    )
