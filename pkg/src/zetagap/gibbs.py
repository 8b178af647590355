"""Lazy two-block Gibbs sampler for the spike-and-slab posterior.

Each iteration flips a fair coin; on heads the state is kept (the kernel is
lazy by construction), on tails the indicator vector is redrawn from its
Bernoulli conditional given theta and theta is redrawn from its Gaussian
conditional given the indicator. Two interchangeable exact Gaussian samplers
are provided: a direct p x p Cholesky draw, and an n x n auxiliary-variable
scheme that never forms p x p objects (the right choice when n << p).

Draw order within an iteration is fixed (coin, indicator uniforms, Gaussian
noise), so a (model, init, seed, strategy) tuple reproduces bit-identical
trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError
from .rng import GENERATOR_NAME, PURPOSE_CHAIN, PURPOSE_INIT, derive_rng, seed_label
from .spike_slab import SpikeSlabModel, as_indicator, bernoulli_probs, conditional_gaussian


def choose_strategy(model: SpikeSlabModel, strategy: str = "auto") -> str:
    if strategy == "auto":
        return "woodbury" if model.n < model.p else "direct"
    if strategy not in ("direct", "woodbury"):
        raise ValidationError(f"unknown theta-sampling strategy {strategy!r}")
    return strategy


def sample_theta(
    model: SpikeSlabModel,
    delta,
    rng: np.random.Generator,
    strategy: str = "auto",
    size: int | None = None,
) -> np.ndarray:
    """Exact draw(s) from N(m_delta, sigma^2 Sigma_delta).

    direct: factor the p x p precision. woodbury: draw u ~ N(0, D),
    e ~ N(0, I_n), set v = X u / sigma + e, solve
    (I_n + X D X'/sigma^2) w = z/sigma - v and return u + D X' w / sigma,
    which has exactly the target law at O(n^2 p + n^3) cost.
    """
    strategy = choose_strategy(model, strategy)
    if strategy == "direct":
        return conditional_gaussian(model, delta).sample(rng, size)

    D = model.prior_diagonal(delta)
    sigma = sqrt(model.sigma2)
    squeeze = size is None
    m = 1 if squeeze else size
    u = rng.standard_normal((m, model.p)) * np.sqrt(D)
    e = rng.standard_normal((m, model.n))
    v = u @ model.X.T / sigma + e
    M = np.eye(model.n) + (model.X * D) @ model.X.T / model.sigma2
    try:
        factor = scipy.linalg.cho_factor(M, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError("auxiliary-variable solve matrix is not positive definite") from exc
    w = scipy.linalg.cho_solve(factor, (model.z / sigma - v).T).T
    theta = u + (w @ model.X) * D / sigma
    return theta[0] if squeeze else theta


@dataclass
class GibbsState:
    """Current coefficients, the indicator of the latest non-lazy draw, and
    the chain's random stream."""

    theta: np.ndarray
    last_delta: np.ndarray
    rng: np.random.Generator


def init_from_model(
    model: SpikeSlabModel,
    delta_init,
    seed,
    strategy: str = "auto",
) -> GibbsState:
    """Warm start: theta_0 drawn from the Gaussian conditional at delta_init."""
    delta_init = as_indicator(delta_init, model.p)
    init_rng = derive_rng(seed, PURPOSE_INIT)
    theta0 = sample_theta(model, delta_init, init_rng, strategy)
    return GibbsState(theta=theta0, last_delta=delta_init.copy(), rng=derive_rng(seed, PURPOSE_CHAIN))


def gibbs_step(
    model: SpikeSlabModel, state: GibbsState, strategy: str = "auto"
) -> tuple[GibbsState, bool]:
    """One lazy Gibbs iteration; returns the new state and the lazy flag.

    Lazy iterations leave theta and last_delta untouched (the indicator is
    carried forward for monitoring purposes).
    """
    if state.rng.random() < 0.5:
        return state, True
    probs = bernoulli_probs(model, state.theta)
    delta = (state.rng.random(model.p) < probs).astype(np.uint8)
    theta = sample_theta(model, delta, state.rng, strategy)
    return GibbsState(theta=theta, last_delta=delta, rng=state.rng), False


def delta_hex(delta) -> str:
    """Indicator packed to hex, first coordinate in the high bit of byte 0."""
    return np.packbits(np.asarray(delta, dtype=np.uint8)).tobytes().hex()


@dataclass
class Trajectory:
    """Recorded run: indicator snapshots (row 0 = initial), lazy flags, and
    optional coefficient snapshots."""

    deltas: np.ndarray
    lazy: np.ndarray
    seed: str
    strategy: str
    model_fingerprint: str
    thetas: np.ndarray | None = None

    @property
    def n_iters(self) -> int:
        return self.lazy.shape[0]

    def delta_at(self, k: int) -> np.ndarray:
        return self.deltas[k]

    @property
    def lazy_fraction(self) -> float:
        return float(self.lazy.mean()) if self.n_iters else 0.0

    def manifest(self) -> dict:
        return {
            "seed": self.seed,
            "generator": GENERATOR_NAME,
            "strategy": self.strategy,
            "iterations": self.n_iters,
            "model_fingerprint": self.model_fingerprint,
        }

    def to_csv_text(self, include_theta: bool = False) -> str:
        cols = ["iteration", "lazy", "delta_hex"]
        p = self.deltas.shape[1]
        if include_theta and self.thetas is not None:
            cols += [f"theta_{j}" for j in range(p)]
        lines = [",".join(cols)]
        for k in range(self.deltas.shape[0]):
            row = [str(k), "1" if k > 0 and self.lazy[k - 1] else "0", delta_hex(self.deltas[k])]
            if include_theta and self.thetas is not None:
                row += [repr(float(v)) for v in self.thetas[k]]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def save_csv(self, path, include_theta: bool = False) -> None:
        from .fileio import atomic_write_text

        atomic_write_text(path, self.to_csv_text(include_theta))


def run(
    model: SpikeSlabModel,
    delta_init,
    n_iters: int,
    seed,
    strategy: str = "auto",
    record_theta: bool = False,
) -> Trajectory:
    """Run the sampler for n_iters iterations; deterministic in (inputs, seed)."""
    if n_iters < 0:
        raise ValidationError("iteration count must be nonnegative")
    strategy = choose_strategy(model, strategy)
    state = init_from_model(model, delta_init, seed, strategy)
    deltas = np.empty((n_iters + 1, model.p), dtype=np.uint8)
    lazy = np.empty(n_iters, dtype=bool)
    thetas = np.empty((n_iters + 1, model.p)) if record_theta else None
    deltas[0] = state.last_delta
    if thetas is not None:
        thetas[0] = state.theta
    for k in range(n_iters):
        state, was_lazy = gibbs_step(model, state, strategy)
        lazy[k] = was_lazy
        deltas[k + 1] = state.last_delta
        if thetas is not None:
            thetas[k + 1] = state.theta
    return Trajectory(
        deltas=deltas,
        lazy=lazy,
        seed=seed_label(seed),
        strategy=strategy,
        model_fingerprint=model.fingerprint(),
        thetas=thetas,
    )
