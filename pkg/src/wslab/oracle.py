"""Simulated statistical-query oracle.

An algorithm under the statistical-query discipline never touches raw data:
it submits bounded query functions ``q(y, x) in [-M, M]`` and receives any
response within a tolerance ``tau_q`` of the true expectation. The tolerance
combines a range term and a variance term, mirroring a Bernstein bound with
a capacity charge ``eta`` for the whole query family:

    tau_q = max( (eta + log(1/xi)) * M / n,
                 sqrt( 2 (eta + log(1/xi)) (M^2 - E[q]^2) / n ) ).

Three response policies are provided:

* ``EmpiricalOracle`` answers with the sample average (the canonical honest
  oracle; deterministic given the dataset);
* ``WorstCaseOracle`` answers ``E[q] + sign * tau_q``, the most hostile value
  a conforming oracle may return, to stress-test decision rules;
* ``AdversarialPairOracle`` holds two models and answers with the first
  model's expectation whenever that is simultaneously legal under both,
  which makes any test built on those responses blind to the pair.

Closed-form expectations are available for the coordinate query family used
by the tractable tests; they reduce to first and second moments of truncated
univariate Gaussian mixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import (
    BudgetExceededError,
    ExpectationOutOfRangeError,
    NoAnalyticExpectationError,
    UnsupportedQueryKindError,
    ValidationError,
)
from .model import Dataset, ModelParams

__all__ = [
    "QueryKind",
    "TruncatedQuerySpec",
    "BoundedQuery",
    "OracleConfig",
    "OracleResponse",
    "GapRecord",
    "tolerance",
    "truncated_moments",
    "analytic_expectation",
    "analytic_query_expectation",
    "OraclePolicy",
    "EmpiricalOracle",
    "WorstCaseOracle",
    "AdversarialPairOracle",
]

QueryKind = Literal["coordinate_mean", "coordinate_second_moment", "signed_label_mean"]
_KINDS = ("coordinate_mean", "coordinate_second_moment", "signed_label_mean")

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class TruncatedQuerySpec:
    """Analytic description of one coordinate query.

    ``kind`` selects the family, ``j`` the coordinate, ``sign`` the direction
    for signed-label queries, ``trunc`` the symmetric truncation level applied
    to the standardized coordinate, and ``sigma_jj`` the variance used for
    standardization when the query was built.
    """

    kind: QueryKind
    j: int
    trunc: float
    sigma_jj: float
    sign: int = 1

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise UnsupportedQueryKindError(f"unknown query kind {self.kind!r}")
        if self.sign not in (-1, 1):
            raise ValidationError(f"sign must be +1 or -1, got {self.sign}")
        if not self.trunc > 0:
            raise ValidationError("truncation level must be positive")
        if not self.sigma_jj > 0:
            raise ValidationError("sigma_jj must be positive")


@dataclass(frozen=True)
class BoundedQuery:
    """A bounded query function with its declared range.

    ``evaluate`` is vectorized: it maps labels of shape ``(m,)`` and
    covariates of shape ``(m, d)`` to responses of shape ``(m,)`` with every
    value in ``[-bound_M, bound_M]``. ``analytic`` is present for queries
    whose expectation has a closed form.
    """

    id: str
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bound_M: float
    analytic: TruncatedQuerySpec | None = None

    def __post_init__(self) -> None:
        if not self.bound_M > 0:
            raise ValidationError("bound_M must be positive")


@dataclass(frozen=True)
class OracleConfig:
    """Oracle parameters: effective sample size, tail probability, capacity, budget."""

    n: int
    xi: float
    eta: float
    budget_T: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"need n >= 1, got {self.n}")
        if not (0.0 < self.xi < 1.0):
            raise ValidationError(f"xi must lie in (0, 1), got {self.xi}")
        if self.eta < 0.0:
            raise ValidationError(f"eta must be nonnegative, got {self.eta}")
        if self.budget_T < 0:
            raise ValidationError(f"budget_T must be nonnegative, got {self.budget_T}")

    @property
    def capacity_term(self) -> float:
        return self.eta + math.log(1.0 / self.xi)


@dataclass(frozen=True)
class OracleResponse:
    value: float
    tolerance_used: float
    query_id: str


@dataclass(frozen=True)
class GapRecord:
    """Distinguishability of one query across a model pair."""

    query_id: str
    gap: float
    tolerance: float
    flagged: bool


def tolerance(q: BoundedQuery, expectation: float, cfg: OracleConfig) -> float:
    """Allowed response deviation for ``q`` when its true expectation is known.

    Maximum of the range branch ``(eta + log(1/xi)) M / n`` and the variance
    branch ``sqrt(2 (eta + log(1/xi)) (M^2 - E^2) / n)``.
    """
    m = q.bound_M
    if abs(expectation) > m * (1.0 + 1e-12):
        raise ExpectationOutOfRangeError(
            f"|E[q]| = {abs(expectation):.6g} exceeds the declared bound {m:.6g} for query {q.id!r}"
        )
    cap = cfg.capacity_term
    range_branch = cap * m / cfg.n
    var_bound = max(m * m - expectation * expectation, 0.0)
    variance_branch = math.sqrt(2.0 * cap * var_bound / cfg.n)
    return max(range_branch, variance_branch)


# ---------------------------------------------------------------------------
# Truncated Gaussian mixture moments
# ---------------------------------------------------------------------------


def _phi(x: float) -> float:
    if math.isinf(x):
        return 0.0
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _Phi(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / _SQRT2))


def _xphi(x: float) -> float:
    # x * pdf(x) with the correct limit 0 at +-inf
    if math.isinf(x):
        return 0.0
    return x * _phi(x)


def truncated_moments(mean: float, lo: float, hi: float) -> tuple[float, float, float]:
    """(mass, first, second) partial moments of N(mean, 1) on ``[lo, hi]``.

    ``first = E[X 1{lo <= X <= hi}]`` and similarly for ``second``; the
    moments are not normalized by the mass. Infinite endpoints are allowed.
    """
    a = lo - mean
    b = hi - mean
    p = _Phi(b) - _Phi(a)
    dphi = _phi(a) - _phi(b)
    m1 = mean * p + dphi
    m2 = (1.0 + mean * mean) * p + 2.0 * mean * dphi + _xphi(a) - _xphi(b)
    return p, m1, m2


def _standardized_components(spec: TruncatedQuerySpec, theta: ModelParams) -> list[tuple[float, float]]:
    """(weight, mean) pairs of the relevant univariate standardized mixture."""
    j = spec.j
    sigma_jj = float(theta.sigma[j, j])
    if not math.isclose(sigma_jj, spec.sigma_jj, rel_tol=1e-9, abs_tol=0.0):
        raise NoAnalyticExpectationError(
            f"query {spec.kind}[{j}] was standardized with variance {spec.sigma_jj:.6g} "
            f"but the model has {sigma_jj:.6g}"
        )
    scale = math.sqrt(spec.sigma_jj)
    a0 = float(theta.mu0[j]) / scale
    a1 = float(theta.mu1[j]) / scale
    if spec.kind in ("coordinate_mean", "coordinate_second_moment"):
        return [(0.5, a0), (0.5, a1)]
    # signed_label_mean: distribution of (2Y - 1) * sign * X_j / sqrt(sigma_jj)
    alpha = theta.alpha
    s = float(spec.sign)
    return [
        ((1.0 + alpha) / 4.0, s * a1),
        ((1.0 - alpha) / 4.0, s * a0),
        ((1.0 + alpha) / 4.0, -s * a0),
        ((1.0 - alpha) / 4.0, -s * a1),
    ]


def analytic_query_expectation(spec: TruncatedQuerySpec, theta: ModelParams) -> float:
    """Exact expectation of the truncated coordinate query under ``theta``."""
    t = spec.trunc
    components = _standardized_components(spec, theta)
    if spec.kind == "coordinate_second_moment":
        total = 0.0
        for weight, mean in components:
            p, _, m2 = truncated_moments(mean, -t, t)
            total += weight * (m2 - p)
        return total
    total = 0.0
    for weight, mean in components:
        _, m1, _ = truncated_moments(mean, -t, t)
        total += weight * m1
    return total


def analytic_expectation(q: BoundedQuery, theta: ModelParams) -> float:
    """Closed-form ``E_theta[q]`` for queries carrying an analytic description."""
    if q.analytic is None:
        raise NoAnalyticExpectationError(f"query {q.id!r} has no analytic description")
    return analytic_query_expectation(q.analytic, theta)


# ---------------------------------------------------------------------------
# Oracle policies
# ---------------------------------------------------------------------------


class OraclePolicy:
    """Base policy: budget accounting plus a response rule.

    A policy instance holds mutable budget state and is meant to be driven by
    one test run at a time; create separate instances for concurrent runs.
    """

    def __init__(self, cfg: OracleConfig) -> None:
        self.cfg = cfg
        self._issued = 0

    @property
    def queries_issued(self) -> int:
        return self._issued

    def query(self, q: BoundedQuery) -> OracleResponse:
        if self._issued >= self.cfg.budget_T:
            raise BudgetExceededError(
                f"query budget of {self.cfg.budget_T} exhausted; refusing query {q.id!r}"
            )
        self._issued += 1
        return self._respond(q)

    def _respond(self, q: BoundedQuery) -> OracleResponse:  # pragma: no cover - abstract
        raise NotImplementedError


class EmpiricalOracle(OraclePolicy):
    """Honest oracle: responds with the sample average of the query.

    Responses are deterministic given the dataset and invariant to sample
    order. ``tolerance_used`` is the plug-in tolerance evaluated at the
    empirical mean (clipped to the query's range); conformance against the
    exact tolerance is a statement about the data distribution and is checked
    in tests, not here.
    """

    def __init__(self, data: Dataset, cfg: OracleConfig) -> None:
        super().__init__(cfg)
        self.data = data
        # column-major copy: coordinate queries slice single columns, which
        # would otherwise stride across the whole row-major matrix
        self._covariates = np.asfortranarray(data.covariates)
        self._labels = data.labels

    def _respond(self, q: BoundedQuery) -> OracleResponse:
        values = np.asarray(q.evaluate(self._labels, self._covariates), dtype=float)
        if values.shape != (self.data.n,):
            raise ValidationError(
                f"query {q.id!r} returned shape {values.shape}, expected ({self.data.n},)"
            )
        value = float(values.mean())
        plug_in = min(max(value, -q.bound_M), q.bound_M)
        return OracleResponse(value=value, tolerance_used=tolerance(q, plug_in, self.cfg), query_id=q.id)


class WorstCaseOracle(OraclePolicy):
    """Maximally biased conforming oracle: ``E[q] + sign * tau_q``.

    ``sign_policy`` is ``"+"``, ``"-"``, or ``"alternating"`` (sign flips per
    issued query). Requires analytic expectations for every query.
    """

    def __init__(self, theta: ModelParams, cfg: OracleConfig, sign_policy: str = "+") -> None:
        super().__init__(cfg)
        if sign_policy not in ("+", "-", "alternating"):
            raise ValidationError(f"sign_policy must be '+', '-', or 'alternating', got {sign_policy!r}")
        self.theta = theta
        self.sign_policy = sign_policy

    def _sign(self) -> float:
        if self.sign_policy == "+":
            return 1.0
        if self.sign_policy == "-":
            return -1.0
        return 1.0 if (self._issued % 2) == 1 else -1.0  # _issued already incremented

    def _respond(self, q: BoundedQuery) -> OracleResponse:
        expectation = analytic_expectation(q, self.theta)
        tau = tolerance(q, expectation, self.cfg)
        return OracleResponse(value=expectation + self._sign() * tau, tolerance_used=tau, query_id=q.id)


class AdversarialPairOracle:
    """Oracle that answers so as to hide which of two models generated the data.

    For each query the gap ``|E_1[q] - E_0[q]|`` is compared with the
    tolerance evaluated under the second model. When the gap is within
    tolerance the oracle returns ``E_0[q]`` regardless of the true model (a
    legal response under both); otherwise it answers honestly and flags the
    query as distinguishing. If no query in a transcript is flagged, the
    transcripts under the two models are identical, so any deterministic
    decision built on them has summed error exactly one on this pair.
    """

    def __init__(self, theta0: ModelParams, theta1: ModelParams, cfg: OracleConfig) -> None:
        self.theta0 = theta0
        self.theta1 = theta1
        self.cfg = cfg
        self._records: dict[str, GapRecord] = {}
        self._null_values: dict[str, float] = {}

    def assess(self, q: BoundedQuery) -> GapRecord:
        record = self._records.get(q.id)
        if record is not None:
            return record
        e0 = analytic_expectation(q, self.theta0)
        e1 = analytic_expectation(q, self.theta1)
        tau = tolerance(q, e1, self.cfg)
        gap = abs(e1 - e0)
        record = GapRecord(query_id=q.id, gap=gap, tolerance=tau, flagged=gap > tau)
        self._records[q.id] = record
        self._null_values[q.id] = e0
        return record

    @property
    def report(self) -> list[GapRecord]:
        """Every assessed query's (gap, tolerance, flagged), in assessment order."""
        return list(self._records.values())

    def policy(self, true_model: int) -> "AdversarialPairOracle._View":
        if true_model not in (0, 1):
            raise ValidationError("true_model must be 0 or 1")
        return AdversarialPairOracle._View(self, true_model)

    class _View(OraclePolicy):
        def __init__(self, parent: "AdversarialPairOracle", true_model: int) -> None:
            super().__init__(parent.cfg)
            self.parent = parent
            self.true_model = true_model

        def _respond(self, q: BoundedQuery) -> OracleResponse:
            record = self.parent.assess(q)
            if record.flagged:
                theta = self.parent.theta1 if self.true_model == 1 else self.parent.theta0
                value = analytic_expectation(q, theta)
            else:
                value = self.parent._null_values[q.id]
            return OracleResponse(value=value, tolerance_used=record.tolerance, query_id=q.id)
