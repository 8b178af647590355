"""Finite mixtures of reversible kernels and their spectral-gap bounds.

A mixture couples component laws pi_i (weights w_i) with component kernels
K_i into the kernel K(x,y) = sum_i P(i|x) K_i(x,y), reversible w.r.t. the
mixture law. Overlaps between components define a graph whose diameter
enters two computable lower bounds: the Madras-Randall bound on the plain
spectral gap, and its zeta-gap analogue that restricts each component to a
high-mass subset B_i and only requires the retained mass to be large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chains import CONSTRUCT_TOL, SUM_TOL, FiniteChain, NormSpec, _restricted_gap, random_lazy_chain
from .errors import ValidationError


@dataclass(frozen=True)
class MixtureComponent:
    """One mixture component: weight, law on the shared states, lazy kernel.

    The law may put zero mass on some states; the kernel must be reversible
    w.r.t. it and lazy. ``mask`` restricts the component to a subset B_i
    (None means the full space).
    """

    weight: float
    dist: np.ndarray
    kernel: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        dist = np.asarray(self.dist, dtype=float)
        kernel = np.asarray(self.kernel, dtype=float)
        d = dist.shape[0]
        if self.weight <= 0:
            raise ValidationError(f"component weight must be positive, got {self.weight}")
        if np.min(dist) < -SUM_TOL or abs(dist.sum() - 1.0) > SUM_TOL:
            raise ValidationError("component law must be a probability vector")
        if kernel.shape != (d, d):
            raise ValidationError(f"kernel shape {kernel.shape} does not match law length {d}")
        if np.min(kernel) < -SUM_TOL or np.abs(kernel.sum(axis=1) - 1.0).max() > SUM_TOL:
            raise ValidationError("component kernel must be row-stochastic")
        if np.min(np.diag(kernel)) < 0.5 - SUM_TOL:
            raise ValidationError("component kernel must be lazy")
        F = dist[:, None] * kernel
        if np.abs(F - F.T).max() > CONSTRUCT_TOL:
            raise ValidationError("component kernel is not reversible w.r.t. its law")
        mask = self.mask
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (d,):
                raise ValidationError("component mask length mismatch")
            if float(dist[mask].sum()) <= 0.0:
                raise ValidationError("component mask carries zero mass")
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "mask", mask)

    @property
    def effective_mask(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.dist.shape[0], dtype=bool)
        return self.mask

    @property
    def mask_mass(self) -> float:
        return float(self.dist[self.effective_mask].sum())


@dataclass(frozen=True)
class MixtureSpec:
    """Weighted components on a shared state list, plus the analyzed index set
    (all components when not given)."""

    components: tuple[MixtureComponent, ...]
    subset_indices: tuple[int, ...] | None = None

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValidationError("mixture needs at least one component")
        d = comps[0].dist.shape[0]
        if any(c.dist.shape[0] != d for c in comps):
            raise ValidationError("all components must share the same state list")
        total = sum(c.weight for c in comps)
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"component weights sum to {total}, not 1")
        idx = self.subset_indices
        idx = tuple(range(len(comps))) if idx is None else tuple(int(i) for i in idx)
        if not idx or any(i < 0 or i >= len(comps) for i in idx):
            raise ValidationError("subset_indices out of range or empty")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "subset_indices", idx)

    @property
    def d(self) -> int:
        return self.components[0].dist.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    def mixture_law(self) -> np.ndarray:
        return sum(c.weight * c.dist for c in self.components)


def build_mixture_kernel(spec: MixtureSpec) -> FiniteChain:
    """Assemble K(x,y) = sum_i P(i|x) K_i(x,y) with P(i|x) = w_i pi_i(x) / pi(x).

    Requires the mixture law to be positive on every state; zero-mass states
    must be pruned from the state list first.
    """
    pi = spec.mixture_law()
    if np.min(pi) <= 0.0:
        dead = np.flatnonzero(pi <= 0.0)
        raise ValidationError(
            f"mixture law vanishes on states {dead.tolist()}; prune them before building the kernel"
        )
    K = np.zeros((spec.d, spec.d))
    for c in spec.components:
        K += ((c.weight * c.dist) / pi)[:, None] * c.kernel
    return FiniteChain(K, pi)


def overlap(spec: MixtureSpec, i: int, j: int) -> float:
    """sum over B_i ∩ B_j of min(pi_i/pi_i(B_i), pi_j/pi_j(B_j)); symmetric, in [0,1]."""
    ci, cj = spec.components[i], spec.components[j]
    both = ci.effective_mask & cj.effective_mask
    if not both.any():
        return 0.0
    a = ci.dist[both] / ci.mask_mass
    b = cj.dist[both] / cj.mask_mass
    return float(np.minimum(a, b).sum())


def overlap_matrix(spec: MixtureSpec) -> np.ndarray:
    """Pairwise overlaps over the analyzed component indices."""
    idx = spec.subset_indices
    k = len(idx)
    M = np.ones((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            M[a, b] = M[b, a] = overlap(spec, idx[a], idx[b])
    return M


@dataclass(frozen=True)
class OverlapGraph:
    """Threshold graph on the analyzed components: edge iff overlap >= kappa."""

    kappa: float
    overlaps: np.ndarray
    adjacency: np.ndarray
    diameter: float  # math.inf when disconnected; 0 for a single node


def bfs_diameter(adjacency: np.ndarray) -> float:
    """Longest shortest path (edge count) over all node pairs; inf if disconnected."""
    k = adjacency.shape[0]
    worst = 0
    for src in range(k):
        dist = np.full(k, -1)
        dist[src] = 0
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in np.flatnonzero(adjacency[u]):
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if dist.min() < 0:
            return math.inf
        worst = max(worst, int(dist.max()))
    return float(worst)


def build_overlap_graph(spec: MixtureSpec, kappa: float) -> OverlapGraph:
    M = overlap_matrix(spec)
    adj = (M >= kappa) & ~np.eye(M.shape[0], dtype=bool)
    return OverlapGraph(kappa=kappa, overlaps=M, adjacency=adj, diameter=bfs_diameter(adj))


def component_gap(comp: MixtureComponent, restricted: bool = False) -> float:
    """Spectral gap of a component kernel w.r.t. its own law.

    With ``restricted`` the gap is computed on the component's mask B_i;
    zero-mass states never contribute to either quadratic form.
    """
    mask = comp.effective_mask if restricted else np.ones(comp.dist.shape[0], dtype=bool)
    return _restricted_gap(comp.kernel, comp.dist, mask)


@dataclass(frozen=True)
class MixtureBound:
    """A computable spectral-gap lower bound with the graph data behind it."""

    value: float
    kappa: float
    diameter: float
    mass: float = 1.0
    mass_threshold: float = 0.0
    mass_ok: bool = True


def _kappa_candidates(M: np.ndarray, kappa) -> list[float]:
    if kappa is not None:
        return [float(kappa)]
    off = M[~np.eye(M.shape[0], dtype=bool)]
    vals = sorted({float(v) for v in off if v > 0.0})
    return vals or [1.0]


def _graph_factor(spec: MixtureSpec, kappa, gaps_term: float) -> MixtureBound:
    """Best kappa/(2 D) * gaps_term over candidate thresholds (degenerate D=0 -> 1)."""
    M = overlap_matrix(spec)
    best = MixtureBound(0.0, 0.0, math.inf)
    for k in _kappa_candidates(M, kappa):
        adj = (M >= k) & ~np.eye(M.shape[0], dtype=bool)
        D = bfs_diameter(adj)
        if math.isinf(D):
            continue
        factor = 1.0 if D == 0 else k / (2.0 * D)
        value = factor * gaps_term
        if value > best.value:
            best = MixtureBound(value, k, D)
    return best


def madras_randall_bound(spec: MixtureSpec, kappa: float | None = None) -> MixtureBound:
    """kappa/(2 D) min_i { w_i SpecGap(K_i) }, maximized over overlap thresholds.

    Stated for full-space components with every index analyzed; a single
    component degenerates to min_i w_i SpecGap(K_i) (the mixture is the
    component, so no graph factor applies).
    """
    if any(c.mask is not None for c in spec.components):
        raise ValidationError("the plain mixture bound requires full-space components")
    if len(spec.subset_indices) != len(spec.components):
        raise ValidationError("the plain mixture bound analyzes every component")
    gaps_term = min(c.weight * component_gap(c) for c in spec.components)
    return _graph_factor(spec, kappa, gaps_term)


def mixture_zeta_gap_bound(
    spec: MixtureSpec,
    zeta: float,
    norm: NormSpec | None = None,
    kappa: float | None = None,
) -> MixtureBound:
    """Zeta-gap lower bound from restricted component gaps on the masks B_i.

    Valid when the retained joint mass sum_{i in I0} w_i pi_i(B_i) is at least
    1 - (zeta/10)^(1 + 2/(m-2)); otherwise the bound is 0 with mass_ok=False.
    The bound multiplies kappa/(2 D) by min_i pi_i(B_i)^2 and
    min_i w_i SpecGap_{B_i}(K_i) over the analyzed indices.
    """
    if not (0.0 < zeta < 0.5):
        raise ValidationError(f"zeta must lie in (0, 1/2), got {zeta}")
    norm = norm or NormSpec()
    idx = spec.subset_indices
    comps = [spec.components[i] for i in idx]
    mass = float(sum(c.weight * c.mask_mass for c in comps))
    threshold = 1.0 - (zeta / 10.0) ** norm.tail_exponent
    if mass < threshold:
        return MixtureBound(0.0, 0.0, math.inf, mass, threshold, mass_ok=False)
    min_mask_sq = min(c.mask_mass for c in comps) ** 2
    gaps_term = min(c.weight * component_gap(c, restricted=True) for c in comps)
    if len(comps) == 1:
        # Degenerate single-node graph: the mixture restricted to I0 is the
        # component, and the restricted gap certifies directly.
        return MixtureBound(gaps_term, 1.0, 0.0, mass, threshold, True)
    bound = _graph_factor(spec, kappa, min_mask_sq * gaps_term)
    return MixtureBound(bound.value, bound.kappa, bound.diameter, mass, threshold, True)


def random_mixture(
    rng: np.random.Generator,
    n_components: int,
    d: int,
    with_masks: bool = False,
) -> MixtureSpec:
    """Random mixture with overlapping positive component laws.

    Laws are blended toward a shared base so all pairwise overlaps are
    positive. With ``with_masks`` each component may drop its lowest-mass
    state, exercising the restricted-mass machinery.
    """
    weights = rng.dirichlet(np.full(n_components, 3.0))
    base = rng.dirichlet(np.full(d, 3.0))
    comps = []
    for i in range(n_components):
        dist = 0.5 * base + 0.5 * rng.dirichlet(np.full(d, 3.0))
        dist = dist / dist.sum()
        kernel = random_lazy_chain(d, rng, pi=dist).P
        mask = None
        if with_masks and rng.random() < 0.5:
            mask = np.ones(d, dtype=bool)
            mask[int(np.argmin(dist))] = False
        comps.append(MixtureComponent(weights[i], dist, kernel, mask))
    return MixtureSpec(tuple(comps))
