"""Exact spectral analysis of finite reversible lazy Markov chains.

Everything here works on dense transition matrices and is exact up to
floating point: spectral gap via the symmetrized kernel, conductance and
zeta-conductance by exhaustive cut enumeration, subset-restricted spectral
gaps as generalized eigenvalues, and certified two-sided brackets for the
zeta-spectral gap

    inf { E(f,f) / (Var(f) - zeta/2) : Var(f) > zeta, ||f||_star = 1 },

the variant of the spectral gap that ignores functions whose variance is
below zeta after star-norm normalization. Total variation follows the
factor-2 convention (equal to the L1 distance between densities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from .errors import CapacityError, ValidationError
from .rng import derive_rng

# Centralized tolerances (construction / identity / inequality slack).
CONSTRUCT_TOL = 1e-10
SUM_TOL = 1e-12
IDENTITY_TOL = 1e-12
INEQ_SLACK = 1e-9

# Exhaustive-enumeration capacity caps.
MAX_CUT_STATES = 25
MAX_SUBSET_SEARCH_STATES = 20

#: Distinguished marker for an infimum over an empty feasible set
#: (vacuous zeta-conductance, infeasible zeta-gap upper search).
INFEASIBLE = math.inf


@dataclass(frozen=True)
class FiniteChain:
    """A reversible lazy Markov chain on d >= 2 states.

    P is row-stochastic, pi is the (strictly positive) stationary law,
    detailed balance pi[x]P[x,y] = pi[y]P[y,x] holds within CONSTRUCT_TOL,
    and every holding probability P[x,x] is at least 1/2. A missing pi is
    computed from P and then validated like a supplied one.
    """

    P: np.ndarray
    pi: np.ndarray | None = None

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValidationError(f"transition matrix must be square, got shape {P.shape}")
        d = P.shape[0]
        if d < 2:
            raise ValidationError("chain needs at least 2 states")
        if np.min(P) < -SUM_TOL:
            x, y = np.unravel_index(np.argmin(P), P.shape)
            raise ValidationError(f"negative transition probability P[{x},{y}] = {P[x, y]}")
        rowerr = np.abs(P.sum(axis=1) - 1.0)
        if rowerr.max() > SUM_TOL:
            x = int(np.argmax(rowerr))
            raise ValidationError(f"row {x} of P sums to {P[x].sum()}, not 1")

        pi = self.pi
        if pi is None:
            pi = stationary_distribution(P)
        pi = np.asarray(pi, dtype=float)
        if pi.shape != (d,):
            raise ValidationError(f"stationary vector has shape {pi.shape}, expected ({d},)")
        if np.min(pi) <= 0.0:
            x = int(np.argmin(pi))
            raise ValidationError(f"stationary probability pi[{x}] = {pi[x]} is not strictly positive")
        if abs(pi.sum() - 1.0) > SUM_TOL:
            raise ValidationError(f"stationary vector sums to {pi.sum()}, not 1")

        F = pi[:, None] * P
        gap = np.abs(F - F.T)
        if gap.max() > CONSTRUCT_TOL:
            x, y = np.unravel_index(np.argmax(gap), gap.shape)
            raise ValidationError(
                f"detailed balance fails for pair ({x},{y}): "
                f"pi[{x}]P[{x},{y}] = {F[x, y]:.12g} vs pi[{y}]P[{y},{x}] = {F[y, x]:.12g}"
            )
        diag = np.diag(P)
        if diag.min() < 0.5 - SUM_TOL:
            x = int(np.argmin(diag))
            raise ValidationError(f"chain is not lazy: P[{x},{x}] = {diag[x]} < 1/2")

        object.__setattr__(self, "P", P)
        object.__setattr__(self, "pi", pi)

    @property
    def d(self) -> int:
        return self.P.shape[0]


@dataclass(frozen=True)
class NormSpec:
    """Star-norm ||.||_{m,pi} with exponent m in (2, inf]; math.inf = sup norm."""

    m: float = math.inf

    def __post_init__(self):
        if not self.m > 2:
            raise ValidationError(f"star-norm exponent must satisfy m > 2, got {self.m}")

    @property
    def tail_exponent(self) -> float:
        """Exponent 1 + 2/(m-2) in the subset mass threshold; 1 at m = inf."""
        if math.isinf(self.m):
            return 1.0
        return 1.0 + 2.0 / (self.m - 2.0)


@dataclass(frozen=True)
class GapReport:
    """Bundle of gap quantities for one chain at one zeta."""

    spec_gap: float
    conductance: float
    zeta: float
    zeta_conductance: float
    zeta_gap_lower: float
    zeta_gap_upper: float
    witness_subset: np.ndarray | None = None
    witness_function: np.ndarray | None = None

    def __post_init__(self):
        if self.zeta_gap_lower > self.zeta_gap_upper + CONSTRUCT_TOL:
            raise ValidationError(
                f"gap bracket inverted: lower {self.zeta_gap_lower} > upper {self.zeta_gap_upper}"
            )
        if self.spec_gap > self.zeta_gap_lower + CONSTRUCT_TOL:
            raise ValidationError(
                f"spectral gap {self.spec_gap} exceeds zeta-gap lower bound {self.zeta_gap_lower}"
            )


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Stationary law of a row-stochastic matrix via the left unit eigenvector."""
    P = np.asarray(P, dtype=float)
    w, v = np.linalg.eig(P.T)
    k = int(np.argmin(np.abs(w - 1.0)))
    if abs(w[k] - 1.0) > 1e-8:
        raise ValidationError("no unit eigenvalue: matrix is not stochastic")
    pi = np.real(v[:, k])
    pi = pi / pi.sum()
    if np.min(pi) <= 0:
        raise ValidationError("stationary law has non-positive entries; chain may be reducible")
    return pi


def _symmetrized(chain: FiniteChain) -> np.ndarray:
    s = np.sqrt(chain.pi)
    S = (s[:, None] * chain.P) / s[None, :]
    return 0.5 * (S + S.T)


def spectral_gap(chain: FiniteChain) -> float:
    """1 minus the second-largest eigenvalue of the pi-symmetrized kernel."""
    w = np.linalg.eigvalsh(_symmetrized(chain))
    return float(min(max(1.0 - w[-2], 0.0), 1.0))


def dirichlet_form(chain: FiniteChain, f) -> float:
    """(1/2) sum_{x,y} pi[x] P[x,y] (f[y] - f[x])^2."""
    f = np.asarray(f, dtype=float)
    diff = f[None, :] - f[:, None]
    return float(0.5 * np.sum(chain.pi[:, None] * chain.P * diff**2))


def variance(chain: FiniteChain, f) -> float:
    """Variance of f under the stationary law."""
    f = np.asarray(f, dtype=float)
    mean = float(chain.pi @ f)
    return float(chain.pi @ (f - mean) ** 2)


def star_norm(chain: FiniteChain, f, norm: NormSpec) -> float:
    """L^m(pi) norm of f; max |f| when m is infinite."""
    f = np.asarray(f, dtype=float)
    if math.isinf(norm.m):
        return float(np.max(np.abs(f)))
    return float(np.sum(chain.pi * np.abs(f) ** norm.m) ** (1.0 / norm.m))


def total_variation(mu, nu) -> float:
    """Factor-2 total variation: the L1 distance between the two laws."""
    return float(np.sum(np.abs(np.asarray(mu, float) - np.asarray(nu, float))))


def _iter_cut_chunks(chain: FiniteChain, chunk: int = 1 << 14):
    """Yield (mass, flow) arrays over cuts, one orientation per complementary pair.

    Enumerates subsets containing state 0 (masks with bit 0 set); flow and the
    unordered pair {pi(A), pi(A^c)} are invariant under complementation, which
    is all the cut functionals below need.
    """
    d = chain.d
    Q = chain.pi[:, None] * chain.P
    shifts = np.arange(d, dtype=np.int64)
    total = 1 << d
    full = total - 1
    for start in range(1, total, 2 * chunk):
        masks = np.arange(start, min(start + 2 * chunk, total), 2, dtype=np.int64)
        masks = masks[masks != full]  # proper subsets only
        if masks.size == 0:
            continue
        S = ((masks[:, None] >> shifts) & 1).astype(float)
        mass = S @ chain.pi
        F = S @ Q
        flow = F.sum(axis=1) - np.einsum("ij,ij->i", F, S)
        yield masks, mass, flow


def conductance(chain: FiniteChain) -> float:
    """Exact worst cut: min over proper nonempty A of flow(A) / (pi(A) pi(A^c))."""
    if chain.d > MAX_CUT_STATES:
        raise CapacityError(
            f"conductance enumerates 2^d cuts; d = {chain.d} exceeds the cap {MAX_CUT_STATES}"
        )
    best = math.inf
    for _, mass, flow in _iter_cut_chunks(chain):
        ratio = flow / (mass * (1.0 - mass))
        best = min(best, float(ratio.min()))
    return best


def zeta_conductance(chain: FiniteChain, zeta: float) -> float:
    """Worst cut among sets with zeta < pi(A) < 1/2, flow over (pi(A)-zeta)(pi(A^c)-zeta).

    Returns INFEASIBLE (math.inf) when no cut qualifies.
    """
    if not (0.0 <= zeta < 0.5):
        raise ValidationError(f"zeta must lie in [0, 1/2), got {zeta}")
    if chain.d > MAX_CUT_STATES:
        raise CapacityError(
            f"zeta-conductance enumerates 2^d cuts; d = {chain.d} exceeds the cap {MAX_CUT_STATES}"
        )
    best = INFEASIBLE
    for _, mass, flow in _iter_cut_chunks(chain):
        small = np.minimum(mass, 1.0 - mass)
        keep = (small > zeta) & (small < 0.5)
        if keep.any():
            denom = (mass[keep] - zeta) * (1.0 - mass[keep] - zeta)
            best = min(best, float((flow[keep] / denom).min()))
    return best


def _restricted_gap(P: np.ndarray, pi: np.ndarray, mask: np.ndarray) -> float:
    """Restricted gap of (P, pi) on the states flagged by ``mask``.

    Zero-mass states inside the mask carry no weight in either quadratic form
    and are dropped; at least two positive-mass states must remain.
    """
    mask = np.asarray(mask, dtype=bool) & (np.asarray(pi, float) > 0.0)
    idx = np.flatnonzero(mask)
    if idx.size < 2:
        raise ValidationError(
            "restricted spectral gap needs at least 2 positive-mass states in the subset"
        )
    p0 = pi[idx]
    A = (pi[:, None] * P)[np.ix_(idx, idx)]
    A = 0.5 * (A + A.T)
    LA = np.diag(A.sum(axis=1)) - A
    LB = p0.sum() * np.diag(p0) - np.outer(p0, p0)
    # Both forms kill constants; solve the pencil on the orthogonal complement.
    H = scipy.linalg.null_space(np.ones((1, idx.size)))
    w = scipy.linalg.eigh(H.T @ LA @ H, H.T @ LB @ H, eigvals_only=True)
    return float(max(w[0], 0.0))


def restricted_spectral_gap(chain: FiniteChain, subset) -> float:
    """Gap with both the Dirichlet form and the variance restricted to ``subset``.

    Equals the smallest generalized eigenvalue of the restricted Laplacian pair
    on the complement of constants; reduces to spectral_gap on the full space.
    """
    subset = _as_mask(subset, chain.d)
    return _restricted_gap(chain.P, chain.pi, subset)


def _as_mask(subset, d: int) -> np.ndarray:
    subset = np.asarray(subset)
    if subset.dtype == bool:
        if subset.shape != (d,):
            raise ValidationError(f"subset mask has shape {subset.shape}, expected ({d},)")
        return subset
    mask = np.zeros(d, dtype=bool)
    mask[subset.astype(int)] = True
    return mask


def _small_mass_complements(pi: np.ndarray, budget: float, cap: int = 20000):
    """Index tuples C with pi(C) <= budget, largest-mass-first pruned DFS."""
    order = np.argsort(pi)
    out = [()]
    def rec(start, remaining, acc):
        if len(out) >= cap:
            return
        for i in range(start, len(order)):
            w = pi[order[i]]
            if w > remaining:
                break
            acc.append(order[i])
            out.append(tuple(acc))
            rec(i + 1, remaining - w, acc)
            acc.pop()
            if len(out) >= cap:
                return
    rec(0, budget, [])
    return out


def zeta_gap_lower(chain: FiniteChain, zeta: float, norm: NormSpec):
    """Certified lower bound on the zeta-spectral gap, with its witness subset.

    Takes the best restricted gap over all subsets X with
    pi(X) >= 1 - (zeta/10)^(1 + 2/(m-2)); any such restricted gap lower-bounds
    the zeta-gap, as does the plain spectral gap, so the max is returned.
    """
    if not (0.0 < zeta < 0.5):
        raise ValidationError(f"zeta must lie in (0, 1/2), got {zeta}")
    if chain.d > MAX_SUBSET_SEARCH_STATES:
        raise CapacityError(
            f"subset search capped at d <= {MAX_SUBSET_SEARCH_STATES}, got d = {chain.d}"
        )
    budget = (zeta / 10.0) ** norm.tail_exponent
    best = -math.inf
    witness = np.ones(chain.d, dtype=bool)
    for comp in _small_mass_complements(chain.pi, budget):
        mask = np.ones(chain.d, dtype=bool)
        mask[list(comp)] = False
        if mask.sum() < 2:
            continue
        g = _restricted_gap(chain.P, chain.pi, mask)
        if g > best:
            best, witness = g, mask
    # The empty complement (full space) is always enumerated, so best >= spec gap.
    return best, witness


def _candidate_pool(chain: FiniteChain, budget: int, seed) -> list[np.ndarray]:
    """Deterministic candidate functions: eigenvectors, signed indicators, noise."""
    rng = derive_rng(seed, 3)
    d = chain.d
    pool: list[np.ndarray] = []
    _, vecs = np.linalg.eigh(_symmetrized(chain))
    inv_sqrt = 1.0 / np.sqrt(chain.pi)
    for k in range(d):
        pool.append(vecs[:, k] * inv_sqrt)
    if d <= 12:
        subsets = [np.array(c) for r in range(1, d) for c in combinations(range(d), r)]
    else:
        subsets = [np.array([i]) for i in range(d)]
        subsets += [np.flatnonzero(rng.random(d) < 0.5) for _ in range(budget)]
    for idx in subsets:
        if 0 < idx.size < d:
            f = -np.ones(d)
            f[idx] = 1.0
            pool.append(f)
    for _ in range(budget):
        pool.append(rng.standard_normal(d))
    return pool


def zeta_gap_upper(
    chain: FiniteChain,
    zeta: float,
    norm: NormSpec,
    budget: int = 64,
    seed: int = 0,
    pool=None,
):
    """Searched upper bound on the zeta-spectral gap, with the best witness f.

    Evaluates E(f,f)/(Var(f) - zeta/2) over a candidate pool, each candidate
    rescaled to unit star-norm and kept only if its variance exceeds zeta.
    Any feasible candidate upper-bounds the infimum, so the minimum found is
    a true upper bound regardless of search quality. Returns
    (INFEASIBLE, None) when no candidate is feasible. A shared ``pool`` makes
    the result monotone in zeta.
    """
    if not (0.0 < zeta < 0.5):
        raise ValidationError(f"zeta must lie in (0, 1/2), got {zeta}")
    if pool is None:
        pool = _candidate_pool(chain, budget, seed)
    best = INFEASIBLE
    witness = None
    refine: list[np.ndarray] = []
    for stage in range(2):
        for f in pool if stage == 0 else refine:
            nf = star_norm(chain, f, norm)
            if nf <= 0:
                continue
            g = f / nf
            v = variance(chain, g)
            if v <= zeta:
                continue
            val = dirichlet_form(chain, g) / (v - 0.5 * zeta)
            if val < best:
                best, witness = val, g
        if stage == 0 and witness is not None:
            rng = derive_rng(seed, 3, 1)
            refine = [witness + 0.1 * rng.standard_normal(chain.d) for _ in range(budget)]
    if witness is None:
        return INFEASIBLE, None
    return float(min(max(best, 0.0), 1.0)), witness


def tv_evolution(chain: FiniteChain, pi0, n_max: int) -> np.ndarray:
    """|| pi0 K^n - pi ||_tv for n = 0..n_max (factor-2 convention)."""
    pi0 = np.asarray(pi0, dtype=float)
    if pi0.shape != (chain.d,) or np.min(pi0) < -SUM_TOL or abs(pi0.sum() - 1.0) > 1e-9:
        raise ValidationError("pi0 must be a probability distribution on the chain's states")
    out = np.empty(n_max + 1)
    v = pi0.copy()
    for n in range(n_max + 1):
        out[n] = total_variation(v, chain.pi)
        if n < n_max:
            v = v @ chain.P
    return out


@dataclass(frozen=True)
class MixingBoundReport:
    """Outcome of checking the zeta-gap TV mixing bound along a trajectory."""

    holds: bool
    worst_margin: float
    worst_n: int


def verify_mixing_bound(
    chain: FiniteChain,
    f0,
    zeta: float,
    norm: NormSpec,
    n_max: int,
    gap_lower_bound: float,
) -> MixingBoundReport:
    """Check ||pi0 K^n - pi||_tv^2 <= max(Var f0, zeta ||f0||*^2) (1-s)^n + zeta ||f0||*^2.

    ``f0`` is the initial density w.r.t. pi; ``gap_lower_bound`` is any certified
    lower bound s on the zeta-spectral gap ((1-s)^n only grows as s shrinks, so
    the right side stays valid). An INFEASIBLE marker means an empty feasible
    set and is treated as gap 1.
    """
    f0 = np.asarray(f0, dtype=float)
    if np.min(f0) < -SUM_TOL or abs(float(chain.pi @ f0) - 1.0) > 1e-9:
        raise ValidationError("f0 must be a nonnegative density integrating to 1 under pi")
    s = 1.0 if math.isinf(gap_lower_bound) else float(gap_lower_bound)
    var0 = variance(chain, f0)
    star2 = star_norm(chain, f0, norm) ** 2
    lead = max(var0, zeta * star2)
    lhs = tv_evolution(chain, f0 * chain.pi, n_max) ** 2
    n = np.arange(n_max + 1)
    rhs = lead * (1.0 - s) ** n + zeta * star2
    margins = rhs - lhs
    worst = int(np.argmin(margins))
    return MixingBoundReport(
        holds=bool(margins[worst] >= -INEQ_SLACK),
        worst_margin=float(margins[worst]),
        worst_n=worst,
    )


def cheeger_verify(chain: FiniteChain) -> bool:
    """Check (1/8) Phi^2 <= SpecGap <= Phi within INEQ_SLACK."""
    phi = conductance(chain)
    gap = spectral_gap(chain)
    return bool(gap >= phi**2 / 8.0 - INEQ_SLACK and gap <= phi + INEQ_SLACK)


def analyze_chain(
    chain: FiniteChain,
    zeta: float,
    norm: NormSpec | None = None,
    budget: int = 64,
    seed: int = 0,
) -> GapReport:
    """Full gap report: spectral gap, both conductances, zeta-gap bracket."""
    norm = norm or NormSpec()
    lower, subset = zeta_gap_lower(chain, zeta, norm)
    upper, func = zeta_gap_upper(chain, zeta, norm, budget=budget, seed=seed)
    return GapReport(
        spec_gap=spectral_gap(chain),
        conductance=conductance(chain),
        zeta=zeta,
        zeta_conductance=zeta_conductance(chain, zeta),
        zeta_gap_lower=lower,
        zeta_gap_upper=upper,
        witness_subset=subset,
        witness_function=func,
    )


def random_lazy_chain(d: int, rng: np.random.Generator, pi=None) -> FiniteChain:
    """Random reversible lazy chain on d states, optionally with a given pi.

    Draws a symmetric flow matrix F and sets P[x,y] = F[x,y]/(c pi[x]) off the
    diagonal with c chosen so every row keeps holding probability >= 1/2;
    detailed balance holds by the symmetry of F.
    """
    if pi is None:
        pi = rng.dirichlet(np.full(d, 2.0))
        pi = np.maximum(pi, 1e-3)
        pi = pi / pi.sum()
    else:
        pi = np.asarray(pi, dtype=float)
        if np.min(pi) <= 0:
            raise ValidationError("random_lazy_chain requires a strictly positive pi")
    W = rng.random((d, d))
    F = 0.5 * (W + W.T)
    np.fill_diagonal(F, 0.0)
    c = 2.0 * (F.sum(axis=1) / pi).max()
    P = F / (c * pi[:, None])
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    return FiniteChain(P, pi)


def random_density(chain: FiniteChain, rng: np.random.Generator) -> np.ndarray:
    """Random nonnegative f0 with integral 1 under the chain's stationary law."""
    f = rng.random(chain.d) + 0.05
    return f / float(chain.pi @ f)
