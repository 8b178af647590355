"""Mixing-time simulation study for the lazy spike-and-slab Gibbs sampler.

Each replicate draws a fresh Gaussian design, a planted sparse coefficient
vector with detectable magnitudes, and a noisy response; the sampler starts
from the true support perturbed by a configured number of false positives or
false negatives, and the empirical mixing time is the first iteration at
which the sampled support matches the truth exactly (sensitivity and
precision both 1), truncated at T.

Replicates are deterministic and order-independent: every random stream is
keyed by (base_seed, fp, fn, replicate, purpose).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .fileio import atomic_write_text
from .gibbs import choose_strategy, gibbs_step, init_from_model
from .rng import (
    PURPOSE_INSTANCE,
    PURPOSE_POSITIONS,
    derive_rng,
    seed_label,
)
from .spike_slab import GroundTruth, SpikeSlabModel

RESULT_COLUMNS = ["p", "n", "s_star", "fp", "fn", "replicate", "seed", "mixing_time", "truncated", "wall_s"]


@dataclass(frozen=True)
class ExperimentConfig:
    """One study cell: problem size, prior rules, initialization perturbation.

    Defaults follow the reference protocol: n = p/10, 10 true coefficients
    with magnitudes uniform in (a, a+1) for a = 4 sqrt(log(p)/n), unit noise,
    prior odds q/(1-q) = p^-(u+1) with u = 1, rho = 1/sqrt(n), and
    gamma = 0.1 sigma^2 / lambda_max(X'X).
    """

    p: int
    n: int | None = None
    s_star: int = 10
    sigma2: float = 1.0
    u: float = 1.0
    rho: float | None = None
    gamma_scale: float = 0.1
    amplitude: float | None = None
    fp_count: int | None = None
    fp_fraction: float | None = None
    fn_count: int = 0
    T: int = 20_000
    R: int = 20
    base_seed: int = 0
    fixed_instance: bool = False
    record_traces: bool = False
    strategy: str = "auto"

    def __post_init__(self):
        if self.n is None:
            object.__setattr__(self, "n", max(1, self.p // 10))
        if self.p < 2 or self.s_star < 1 or self.s_star > self.p:
            raise ValidationError("need p >= 2 and 1 <= s_star <= p")
        if self.T < 1 or self.R < 1:
            raise ValidationError("need T >= 1 and R >= 1")
        if self.fp_count is not None and self.fp_fraction is not None:
            raise ValidationError("give fp_count or fp_fraction, not both")
        fp = self.resolved_fp
        if not 0 <= fp <= self.p - self.s_star:
            raise ValidationError(f"false-positive count {fp} outside [0, p - s_star]")
        if not 0 <= self.fn_count <= self.s_star:
            raise ValidationError(f"false-negative count {self.fn_count} outside [0, s_star]")

    @property
    def resolved_fp(self) -> int:
        if self.fp_count is not None:
            return int(self.fp_count)
        if self.fp_fraction is not None:
            return int(round(self.p * self.fp_fraction))
        return 0

    @property
    def resolved_rho(self) -> float:
        return self.rho if self.rho is not None else 1.0 / math.sqrt(self.n)

    @property
    def resolved_amplitude(self) -> float:
        if self.amplitude is not None:
            return self.amplitude
        return 4.0 * math.sqrt(math.log(self.p) / self.n)

    @property
    def q(self) -> float:
        """Prior inclusion probability from the odds rule q/(1-q) = p^-(u+1)."""
        odds = self.p ** -(self.u + 1.0)
        return odds / (1.0 + odds)

    @property
    def cell(self) -> tuple[int, int]:
        return (self.resolved_fp, self.fn_count)


def largest_gram_eigenvalue(X: np.ndarray, rng: np.random.Generator, tol: float = 1e-12) -> float:
    """lambda_max(X'X) by power iteration on v -> X'(Xv); never forms X'X."""
    v = rng.standard_normal(X.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(1000):
        w = X.T @ (X @ v)
        new = float(np.linalg.norm(w))
        v = w / new
        if abs(new - lam) <= tol * new:
            return new
        lam = new
    return lam


def generate_instance(config: ExperimentConfig, seed) -> tuple[SpikeSlabModel, GroundTruth]:
    """Fresh design, planted coefficients, response, and derived priors.

    The true support is the first s_star coordinates; nonzero magnitudes are
    uniform on (a, a+1) with a fair random sign.
    """
    rng = derive_rng(seed)
    n, p = config.n, config.p
    a = config.resolved_amplitude
    X = rng.standard_normal((n, p))
    magnitudes = rng.uniform(a, a + 1.0, config.s_star)
    signs = np.where(rng.random(config.s_star) < 0.5, -1.0, 1.0)
    theta = np.zeros(p)
    theta[: config.s_star] = signs * magnitudes
    z = X @ theta + math.sqrt(config.sigma2) * rng.standard_normal(n)
    lam_max = largest_gram_eigenvalue(X, rng)
    gamma = config.gamma_scale * config.sigma2 / lam_max
    model = SpikeSlabModel(X, z, config.sigma2, config.q, config.resolved_rho, gamma)
    truth = GroundTruth.from_theta(theta, n=n, p=p, sigma=math.sqrt(config.sigma2), amplitude=a)
    return model, truth


def build_initial_indicator(truth: GroundTruth, fp_count: int, fn_count: int, seed) -> np.ndarray:
    """True support plus fp_count random extras, minus fn_count random true coordinates."""
    delta = truth.delta_star.astype(np.uint8).copy()
    zeros = np.flatnonzero(delta == 0)
    ones = np.flatnonzero(delta == 1)
    if not 0 <= fp_count <= zeros.size:
        raise ValidationError(f"false-positive count {fp_count} outside [0, {zeros.size}]")
    if not 0 <= fn_count <= ones.size:
        raise ValidationError(f"false-negative count {fn_count} outside [0, {ones.size}]")
    rng = derive_rng(seed)
    if fp_count:
        delta[rng.choice(zeros, size=fp_count, replace=False)] = 1
    if fn_count:
        delta[rng.choice(ones, size=fn_count, replace=False)] = 0
    return delta


def sen_prec(delta_k, delta_star) -> tuple[float, float]:
    """Sensitivity |d & d*|/s_star and precision |d & d*|/|d| (0 on the empty model)."""
    delta_k = np.asarray(delta_k).astype(np.uint8)
    delta_star = np.asarray(delta_star).astype(np.uint8)
    s_star = int(delta_star.sum())
    if s_star < 1:
        raise ValidationError("true support must be nonempty")
    hits = int((delta_k & delta_star).sum())
    size = int(delta_k.sum())
    return hits / s_star, (hits / size if size else 0.0)


@dataclass
class MixingRecord:
    replicate: int
    seed: str
    mixing_time: int
    truncated: bool
    wall_s: float
    lambda_max: float
    gamma: float
    sen_trace: list[float] | None = None
    prec_trace: list[float] | None = None


def first_exact_match(deltas: np.ndarray, delta_star: np.ndarray, T: int) -> tuple[int, bool]:
    """First index k with delta_k = delta_star; (T, True) when never reached."""
    hits = np.flatnonzero(np.all(deltas == delta_star, axis=1))
    if hits.size and hits[0] <= T:
        return int(hits[0]), False
    return T, True


def empirical_mixing_time(trajectory, truth: GroundTruth, T: int) -> tuple[int, bool]:
    """Mixing time of a recorded trajectory: first k with SEN = PREC = 1."""
    return first_exact_match(trajectory.deltas, truth.delta_star, T)


def run_replicate(config: ExperimentConfig, replicate: int) -> MixingRecord:
    fp, fn = config.cell
    instance_rep = 0 if config.fixed_instance else replicate
    instance_seed = (config.base_seed, fp, fn, instance_rep, PURPOSE_INSTANCE)
    positions_seed = (config.base_seed, fp, fn, replicate, PURPOSE_POSITIONS)
    sampler_seed = (config.base_seed, fp, fn, replicate)

    start = time.perf_counter()
    model, truth = generate_instance(config, instance_seed)
    delta_init = build_initial_indicator(truth, fp, fn, positions_seed)
    strategy = choose_strategy(model, config.strategy)
    state = init_from_model(model, delta_init, sampler_seed, strategy)

    target = truth.delta_star
    traces = ([], []) if config.record_traces else None
    mixing, truncated = (0, False) if np.array_equal(delta_init, target) else (config.T, True)
    if traces is not None:
        s, pr = sen_prec(delta_init, target)
        traces[0].append(s)
        traces[1].append(pr)
    k = 0
    while k < config.T and (truncated or traces is not None):
        state, _ = gibbs_step(model, state, strategy)
        k += 1
        if traces is not None:
            s, pr = sen_prec(state.last_delta, target)
            traces[0].append(s)
            traces[1].append(pr)
        if truncated and np.array_equal(state.last_delta, target):
            mixing, truncated = k, False
            if traces is None:
                break
    return MixingRecord(
        replicate=replicate,
        seed=seed_label(sampler_seed),
        mixing_time=mixing,
        truncated=truncated,
        wall_s=time.perf_counter() - start,
        lambda_max=config.gamma_scale * config.sigma2 / model.gamma,
        gamma=model.gamma,
        sen_trace=None if traces is None else traces[0],
        prec_trace=None if traces is None else traces[1],
    )


def run_cell(config: ExperimentConfig, workers: int = 1) -> list[MixingRecord]:
    """All replicates of one cell; identical output for any worker count."""
    if workers <= 1:
        return [run_replicate(config, r) for r in range(config.R)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: run_replicate(config, r), range(config.R)))


@dataclass
class StudyResult:
    cells: list[tuple[ExperimentConfig, list[MixingRecord]]] = field(default_factory=list)

    def result_rows(self) -> list[dict]:
        rows = []
        for config, records in self.cells:
            fp, fn = config.cell
            for rec in records:
                rows.append(
                    {
                        "p": config.p,
                        "n": config.n,
                        "s_star": config.s_star,
                        "fp": fp,
                        "fn": fn,
                        "replicate": rec.replicate,
                        "seed": rec.seed,
                        "mixing_time": rec.mixing_time,
                        "truncated": int(rec.truncated),
                        "wall_s": round(rec.wall_s, 4),
                    }
                )
        return rows

    def manifest_pairs(self) -> dict:
        pairs: dict = {}
        for i, (config, records) in enumerate(self.cells):
            fp, fn = config.cell
            prefix = f"cell.{i}"
            pairs[f"{prefix}.p"] = config.p
            pairs[f"{prefix}.n"] = config.n
            pairs[f"{prefix}.s_star"] = config.s_star
            pairs[f"{prefix}.fp"] = fp
            pairs[f"{prefix}.fn"] = fn
            pairs[f"{prefix}.T"] = config.T
            pairs[f"{prefix}.R"] = config.R
            pairs[f"{prefix}.u"] = config.u
            pairs[f"{prefix}.sigma2"] = config.sigma2
            pairs[f"{prefix}.base_seed"] = config.base_seed
            pairs[f"{prefix}.fixed_instance"] = int(config.fixed_instance)
            pairs[f"{prefix}.q"] = repr(config.q)
            pairs[f"{prefix}.rho"] = repr(config.resolved_rho)
            pairs[f"{prefix}.amplitude"] = repr(config.resolved_amplitude)
            for rec in records:
                pairs[f"{prefix}.replicate.{rec.replicate}.lambda_max"] = repr(rec.lambda_max)
                pairs[f"{prefix}.replicate.{rec.replicate}.gamma"] = repr(rec.gamma)
        return pairs


def run_study(configs, workers: int = 1, progress=None) -> StudyResult:
    result = StudyResult()
    for config in configs:
        records = run_cell(config, workers=workers)
        result.cells.append((config, records))
        if progress is not None:
            progress(config, records)
    return result


def format_results_csv(rows: list[dict]) -> str:
    lines = [",".join(RESULT_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in RESULT_COLUMNS))
    return "\n".join(lines) + "\n"


def write_results_csv(rows: list[dict], path) -> None:
    atomic_write_text(path, format_results_csv(rows))


def read_results_csv(path) -> list[dict]:
    text = Path(path).read_text().strip()
    lines = text.split("\n")
    if not lines or lines[0].split(",") != RESULT_COLUMNS:
        raise ParseError(f"line 1: results header must be {','.join(RESULT_COLUMNS)}")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        vals = line.split(",")
        if len(vals) != len(RESULT_COLUMNS):
            raise ParseError(f"line {i}: expected {len(RESULT_COLUMNS)} columns")
        row = dict(zip(RESULT_COLUMNS, vals))
        for key in ("p", "n", "s_star", "fp", "fn", "replicate", "mixing_time", "truncated"):
            row[key] = int(row[key])
        row["wall_s"] = float(row["wall_s"])
        rows.append(row)
    return rows


def aggregate_rows(rows: list[dict]) -> list[dict]:
    """Per-cell summary: mean, sd, se, truncation count, mean wall time.

    A pure function of the per-replicate CSV rows, so reports can always be
    recomputed from persisted results.
    """
    cells: dict = {}
    for row in rows:
        cells.setdefault((row["p"], row["fp"], row["fn"]), []).append(row)
    out = []
    for (p, fp, fn), group in sorted(cells.items()):
        times = np.array([g["mixing_time"] for g in group], dtype=float)
        sd = float(times.std(ddof=1)) if len(times) > 1 else 0.0
        out.append(
            {
                "p": p,
                "fp": fp,
                "fn": fn,
                "replicates": len(group),
                "mean": float(times.mean()),
                "sd": sd,
                "se": sd / math.sqrt(len(times)),
                "truncated": sum(g["truncated"] for g in group),
                "mean_wall_s": float(np.mean([g["wall_s"] for g in group])),
            }
        )
    return out


def _cell_label(fp: int, fn: int, p: int) -> str:
    if fn:
        return f"FP=0, FN={fn}"
    pct = 100.0 * fp / p
    if pct and abs(pct - round(pct)) < 1e-9:
        return f"FP={round(pct)}%"
    return f"FP={fp}"


def format_report_table(rows: list[dict]) -> str:
    """Mixing-time table: one row per perturbation cell, one column per p.

    Entries read "mean (sd)", prefixed with ">" when any replicate was
    truncated at the iteration cap.
    """
    aggregates = aggregate_rows(rows)
    ps = sorted({a["p"] for a in aggregates})
    labels = []
    for a in aggregates:
        lab = _cell_label(a["fp"], a["fn"], a["p"])
        if lab not in labels:
            labels.append(lab)
    header = ["cell"] + [f"p={p}" for p in ps]
    table = [header]
    for lab in labels:
        row = [lab]
        for p in ps:
            match = [
                a
                for a in aggregates
                if a["p"] == p and _cell_label(a["fp"], a["fn"], a["p"]) == lab
            ]
            if not match:
                row.append("-")
                continue
            a = match[0]
            prefix = ">" if a["truncated"] else ""
            row.append(f"{prefix}{a['mean']:.1f} ({a['sd']:.1f})")
        table.append(row)
    widths = [max(len(r[c]) for r in table) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in table]
    return "\n".join(lines) + "\n"


def write_report(rows: list[dict], out_dir) -> list[Path]:
    """Emit the summary table plus one plot-data file of raw mixing times per cell."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    table_path = out_dir / "mixing_table.txt"
    atomic_write_text(table_path, format_report_table(rows))
    written.append(table_path)
    cells: dict = {}
    for row in rows:
        cells.setdefault((row["p"], row["fp"], row["fn"]), []).append(row["mixing_time"])
    for (p, fp, fn), times in sorted(cells.items()):
        path = out_dir / f"cell_p{p}_fp{fp}_fn{fn}_samples.txt"
        atomic_write_text(path, "\n".join(str(t) for t in times) + "\n")
        written.append(path)
    return written


def parse_cells(spec: str, config: ExperimentConfig) -> list[ExperimentConfig]:
    """Expand a cell list like "fp:1%,fp:5%,fp:25,fn:2" into per-cell configs."""
    out = []
    for raw in spec.split(","):
        token = raw.strip()
        if not token:
            continue
        kind, _, value = token.partition(":")
        kind = kind.strip().lower()
        value = value.strip()
        try:
            if kind == "fp" and value.endswith("%"):
                cell = replace(
                    config, fp_count=None, fp_fraction=float(value[:-1]) / 100.0, fn_count=0
                )
            elif kind == "fp":
                cell = replace(config, fp_count=int(value), fp_fraction=None, fn_count=0)
            elif kind == "fn":
                cell = replace(config, fp_count=0, fp_fraction=None, fn_count=int(value))
            else:
                raise ValueError(f"unknown cell kind {kind!r}")
        except ValueError as exc:
            raise ParseError(f"bad cell spec {token!r}: {exc}") from None
        out.append(cell)
    if not out:
        raise ParseError("cell list is empty")
    return out


def instance_manifest(config: ExperimentConfig, model: SpikeSlabModel, seed) -> dict:
    return {
        "p": config.p,
        "n": config.n,
        "s_star": config.s_star,
        "sigma2": config.sigma2,
        "u": config.u,
        "seed": seed_label(seed),
        "q": repr(model.q),
        "rho": repr(model.rho),
        "gamma": repr(model.gamma),
        "lambda_max": repr(config.gamma_scale * config.sigma2 / model.gamma),
        "amplitude": repr(config.resolved_amplitude),
    }
