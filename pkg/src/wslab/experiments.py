"""Monte Carlo risk estimation, phase-diagram sweeps, and the oracle demo.

Conventions
-----------
* A sweep cell's ``n`` is the number of raw samples in each simulated
  dataset. The exhaustive test forms ``n // 2`` difference pairs and its
  default thresholds are evaluated at that pair count; the query-based test
  runs its oracle over all ``n`` samples.
* Every random draw comes from a substream derived from the grid seed and a
  structural key ``(purpose, cell, trial, arm)``, so results are identical
  for any worker count and any execution order.
* Risk at a grid point is evaluated at a representative model pair (a null
  with a configurable mean and one seeded sparse alternative whose
  separation equals ``gamma`` exactly; for identity covariance its
  per-coordinate signal is ``sqrt(gamma / s)``), not as a supremum over
  parameter spaces.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .exhaustive import Thresholds, default_thresholds, run_exhaustive_test
from .model import AltSpec, Dataset, ModelParams, make_restricted_alternative, sample_dataset
from .oracle import AdversarialPairOracle, EmpiricalOracle, GapRecord, OracleConfig
from .seeding import spawn_rng
from .tractable import (
    TractableConfig,
    build_queries,
    decisions_from_responses,
    default_oracle_config,
    run_tractable_test,
)

__all__ = [
    "RiskEstimate",
    "SweepGrid",
    "SweepRow",
    "OracleDemoReport",
    "estimate_risk",
    "exhaustive_procedure",
    "tractable_procedure",
    "sweep_phase_diagram",
    "sweep_rows_to_csv",
    "oracle_demo",
    "demo_records_to_csv",
    "SWEEP_TESTS",
]

TestProcedure = Callable[[Dataset], bool]

SWEEP_TESTS = ("exhaustive", "tractable_honest", "tractable_adversarial")


@dataclass(frozen=True)
class RiskEstimate:
    """Monte Carlo type-I/type-II estimates with a conservative 95% half-width.

    ``half_width`` is the worst-case binomial half-width ``1.96 * 0.5 /
    sqrt(trials)``, which depends on the trial count only and upper-bounds
    the half-width of each error estimate.
    """

    type1: float
    type2: float
    trials: int

    @property
    def risk(self) -> float:
        return self.type1 + self.type2

    @property
    def half_width(self) -> float:
        return 1.96 * 0.5 / math.sqrt(self.trials)

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValidationError(f"need trials >= 1, got {self.trials}")
        if not (0.0 <= self.type1 <= 1.0 and 0.0 <= self.type2 <= 1.0):
            raise ValidationError("error rates must lie in [0, 1]")


def estimate_risk(
    test: TestProcedure,
    theta0: ModelParams,
    theta1: ModelParams,
    n: int,
    trials: int,
    rng: np.random.Generator,
) -> RiskEstimate:
    """Estimate type-I and type-II errors of ``test`` on a fixed model pair.

    Runs ``trials`` independent datasets of size ``n`` under each model; each
    trial owns a child stream of ``rng``, so estimates do not depend on
    evaluation order.
    """
    if trials < 1:
        raise ValidationError(f"need trials >= 1, got {trials}")
    gens = rng.spawn(2 * trials)
    rejects_null = sum(bool(test(sample_dataset(theta0, n, gens[i]))) for i in range(trials))
    accepts_alt = sum(
        not bool(test(sample_dataset(theta1, n, gens[trials + i]))) for i in range(trials)
    )
    return RiskEstimate(type1=rejects_null / trials, type2=accepts_alt / trials, trials=trials)


def exhaustive_procedure(
    sigma: np.ndarray,
    s: int,
    thresholds: Thresholds,
    support_budget: int = 1_000_000,
) -> TestProcedure:
    """Dataset-to-decision wrapper around the exhaustive test."""

    def test(data: Dataset) -> bool:
        return run_exhaustive_test(data, sigma, s, thresholds, support_budget=support_budget).reject

    return test


def tractable_procedure(cfg: TractableConfig, sigma: np.ndarray) -> TestProcedure:
    """Dataset-to-decision wrapper: honest empirical oracle over the dataset."""

    def test(data: Dataset) -> bool:
        oracle = EmpiricalOracle(data, default_oracle_config(cfg))
        return run_tractable_test(oracle, cfg, sigma).reject

    return test


@dataclass(frozen=True)
class SweepGrid:
    """A rectangular (alpha, gamma) grid with fixed problem sizes."""

    alpha_values: tuple[float, ...]
    gamma_values: tuple[float, ...]
    d: int
    s: int
    n: int
    trials: int
    seed: int

    def __post_init__(self) -> None:
        alphas = tuple(float(a) for a in self.alpha_values)
        gammas = tuple(float(g) for g in self.gamma_values)
        object.__setattr__(self, "alpha_values", alphas)
        object.__setattr__(self, "gamma_values", gammas)
        if not alphas:
            raise ValidationError("empty alpha grid")
        if not gammas:
            raise ValidationError("empty gamma grid")
        if list(alphas) != sorted(alphas) or list(gammas) != sorted(gammas):
            raise ValidationError("grid values must be sorted ascending")
        if not all(np.isfinite(alphas)) or not all(np.isfinite(gammas)):
            raise ValidationError("grid values must be finite")
        if any(g < 0 for g in gammas):
            raise ValidationError("gamma values must be nonnegative")
        if self.trials < 1:
            raise ValidationError(f"need trials >= 1, got {self.trials}")


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    gamma: float
    beta: float
    test: str
    d: int
    s: int
    n: int
    trials: int
    type1: float
    type2: float
    risk: float
    half_width: float
    seed: int


_SUPPORT_KEY = 101
_TRIALS_KEY = 202


def _cell_models(
    grid: SweepGrid, ia: int, ig: int, null_mu_scale: float, sigma: np.ndarray
) -> tuple[ModelParams, ModelParams, float]:
    alpha = grid.alpha_values[ia]
    gamma = grid.gamma_values[ig]
    mu = np.full(grid.d, null_mu_scale)
    theta0 = ModelParams(mu0=mu, mu1=mu, sigma=sigma, alpha=alpha)
    if gamma == 0.0:
        return theta0, ModelParams(mu0=mu, mu1=mu, sigma=sigma, alpha=alpha), 0.0
    rng = spawn_rng(grid.seed, _SUPPORT_KEY, ia, ig)
    support = sorted(int(j) for j in rng.choice(grid.d, size=grid.s, replace=False))
    indicator = np.zeros(grid.d)
    indicator[support] = 1.0
    # per-coordinate signal chosen so the separation hits gamma exactly;
    # for identity covariance this is sqrt(gamma / s)
    beta = math.sqrt(gamma / float(indicator @ np.linalg.solve(sigma, indicator)))
    v = beta * indicator
    theta1 = ModelParams(mu0=-v / 2.0, mu1=v / 2.0, sigma=sigma, alpha=alpha)
    return theta0, theta1, beta


def _adversarial_cell_estimate(
    theta0: ModelParams, theta1: ModelParams, cfg: TractableConfig, trials: int
) -> RiskEstimate:
    # The pair oracle responds deterministically from analytic expectations,
    # so one evaluation per arm settles every trial.
    sigma = np.asarray(theta0.sigma)
    adv = AdversarialPairOracle(theta0, theta1, default_oracle_config(cfg))
    reject_null = run_tractable_test(adv.policy(0), cfg, sigma).reject
    reject_alt = run_tractable_test(adv.policy(1), cfg, sigma).reject
    return RiskEstimate(
        type1=1.0 if reject_null else 0.0,
        type2=0.0 if reject_alt else 1.0,
        trials=trials,
    )


def sweep_phase_diagram(
    grid: SweepGrid,
    tests: Sequence[str] = SWEEP_TESTS,
    threads: int = 1,
    null_mu_scale: float = 0.0,
    sigma: np.ndarray | None = None,
    R: float = 4.0,
    C: float = 8.0,
    xi: float | None = None,
    support_budget: int = 1_000_000,
) -> list[SweepRow]:
    """Monte Carlo risk over the grid, one row per (cell, test).

    ``null_mu_scale`` sets the shared null mean to that multiple of the
    all-ones vector (zero by default; a positive value stresses truncation
    bias in the query family). ``sigma`` is the known covariance (identity
    by default); its condition number enters the exhaustive thresholds.
    Rows come back in (alpha, gamma, test) order and are identical for every
    ``threads`` setting; the worker pool is capped at the host core count,
    since oversubscribing threads only adds contention.
    """
    for name in tests:
        if name not in SWEEP_TESTS:
            raise ValidationError(f"unknown test {name!r}; choose from {SWEEP_TESTS}")
    if threads < 1:
        raise ValidationError(f"threads must be positive, got {threads}")
    workers = min(threads, os.cpu_count() or 1)
    sigma = np.eye(grid.d) if sigma is None else np.asarray(sigma, dtype=float)
    pair_count = grid.n // 2
    thresholds = default_thresholds(grid.d, grid.s, max(pair_count, 1), sigma)
    tcfg = TractableConfig(d=grid.d, n=grid.n, R=R, C=C, xi=xi)

    cells = [(ia, ig) for ia in range(len(grid.alpha_values)) for ig in range(len(grid.gamma_values))]

    def run_cell(cell_index: int) -> list[SweepRow]:
        ia, ig = cells[cell_index]
        theta0, theta1, beta = _cell_models(grid, ia, ig, null_mu_scale, sigma)
        rows: list[SweepRow] = []
        for test_index, name in enumerate(tests):
            if name == "exhaustive":
                proc = exhaustive_procedure(sigma, grid.s, thresholds, support_budget)
                est = estimate_risk(
                    proc,
                    theta0,
                    theta1,
                    grid.n,
                    grid.trials,
                    spawn_rng(grid.seed, _TRIALS_KEY, ia, ig, test_index),
                )
            elif name == "tractable_honest":
                proc = tractable_procedure(tcfg, sigma)
                est = estimate_risk(
                    proc,
                    theta0,
                    theta1,
                    grid.n,
                    grid.trials,
                    spawn_rng(grid.seed, _TRIALS_KEY, ia, ig, test_index),
                )
            else:  # tractable_adversarial
                est = _adversarial_cell_estimate(theta0, theta1, tcfg, grid.trials)
            rows.append(
                SweepRow(
                    alpha=grid.alpha_values[ia],
                    gamma=grid.gamma_values[ig],
                    beta=beta,
                    test=name,
                    d=grid.d,
                    s=grid.s,
                    n=grid.n,
                    trials=grid.trials,
                    type1=est.type1,
                    type2=est.type2,
                    risk=est.risk,
                    half_width=est.half_width,
                    seed=grid.seed,
                )
            )
        return rows

    if workers <= 1:
        per_cell = [run_cell(i) for i in range(len(cells))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_cell = list(pool.map(run_cell, range(len(cells))))
    return [row for rows in per_cell for row in rows]


_SWEEP_COLUMNS = (
    "alpha,gamma,beta,test,d,s,n,trials,type1,type2,risk,half_width,seed"
)


def sweep_rows_to_csv(rows: Sequence[SweepRow], header_lines: Sequence[str] = ()) -> str:
    """Serialize rows with shortest-roundtrip float formatting.

    ``header_lines`` are emitted first, one ``#``-prefixed comment per line,
    so the artifact carries its own provenance.
    """
    out = [f"# {line}" for line in header_lines]
    out.append(_SWEEP_COLUMNS)
    for r in rows:
        out.append(
            f"{r.alpha!r},{r.gamma!r},{r.beta!r},{r.test},{r.d},{r.s},{r.n},{r.trials},"
            f"{r.type1!r},{r.type2!r},{r.risk!r},{r.half_width!r},{r.seed}"
        )
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class OracleDemoReport:
    """Outcome of the pair-indistinguishability demonstration."""

    d: int
    s: int
    n: int
    alpha: float
    beta: float
    records: tuple[GapRecord, ...]
    transcripts_identical: bool
    reject_null: bool
    reject_alt: bool

    @property
    def flagged(self) -> int:
        return sum(r.flagged for r in self.records)

    @property
    def verdict(self) -> str:
        return "indistinguishable" if self.flagged == 0 else "distinguishable"


def oracle_demo(
    d: int,
    s: int,
    n: int,
    alpha: float,
    beta: float,
    R: float = 4.0,
    C: float = 8.0,
    xi: float | None = None,
) -> OracleDemoReport:
    """Run the adversarial pair oracle against the full query family.

    Null model: standard Gaussian, fair labels. Alternative: component means
    split by ``beta`` on the first ``s`` coordinates (by symmetry the gap
    pattern does not depend on which support is used). If no query is
    flagged, oracle transcripts under the two models are identical and any
    deterministic test over them has summed error exactly one on this pair.
    """
    cfg = TractableConfig(d=d, n=n, R=R, C=C, xi=xi)
    eye = np.eye(d)
    zero = np.zeros(d)
    theta0 = ModelParams(mu0=zero, mu1=zero, sigma=eye, alpha=alpha)
    if beta == 0.0:
        theta1 = ModelParams(mu0=zero, mu1=zero, sigma=eye, alpha=alpha)
    else:
        theta1 = make_restricted_alternative(
            AltSpec(support=tuple(range(s)), beta=beta, d=d), alpha
        )
    ocfg = default_oracle_config(cfg)
    adv = AdversarialPairOracle(theta0, theta1, ocfg)
    queries = build_queries(cfg, eye)
    for q in queries:
        adv.assess(q)
    transcript0 = [adv.policy(0).query(q) for q in queries]
    transcript1 = [adv.policy(1).query(q) for q in queries]
    identical = all(a.value == b.value for a, b in zip(transcript0, transcript1))
    return OracleDemoReport(
        d=d,
        s=s,
        n=n,
        alpha=alpha,
        beta=beta,
        records=tuple(adv.report),
        transcripts_identical=identical,
        reject_null=decisions_from_responses(transcript0, cfg).reject,
        reject_alt=decisions_from_responses(transcript1, cfg).reject,
    )


def demo_records_to_csv(report: OracleDemoReport, header_lines: Sequence[str] = ()) -> str:
    out = [f"# {line}" for line in header_lines]
    out.append("query_id,gap,tolerance,flagged")
    for r in report.records:
        out.append(f"{r.query_id},{r.gap!r},{r.tolerance!r},{int(r.flagged)}")
    return "\n".join(out) + "\n"
