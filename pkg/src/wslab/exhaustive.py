"""Exhaustive (exponential-time) detection tests.

Two statistics drive the information-theoretically optimal test:

* a sparse variance search over every size-``s`` support, scanning for a
  sparse direction whose whitened pair differences carry inflated variance;
* the largest standardized coordinate of the mean between-class difference.

The combined test rejects when either exceeds its threshold. The variance
search enumerates all ``C(d, s)`` supports exactly, so it is only usable at
desk scale; a hard combinatorial budget guards against accidental blowups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from .errors import CombinatorialBudgetError, NonPositiveDiagonalError, ValidationError
from .model import Dataset
from .pairing import between_class_differences, sym_inverse_sqrt, whitened_pair_differences

__all__ = [
    "TestResult",
    "ExhaustiveResult",
    "Thresholds",
    "default_thresholds",
    "sparse_variance_statistic",
    "peak_coordinate_statistic",
    "run_exhaustive_test",
]

DEFAULT_SUPPORT_BUDGET = 1_000_000


@dataclass(frozen=True)
class TestResult:
    """One decision: reject iff ``statistic >= threshold`` (inclusive)."""

    statistic: float
    threshold: float
    reject: bool
    detail: object = None

    def __post_init__(self) -> None:
        if self.reject != (self.statistic >= self.threshold):
            raise ValidationError("inconsistent TestResult: reject must equal statistic >= threshold")

    @classmethod
    def decide(cls, statistic: float, threshold: float, detail: object = None) -> "TestResult":
        statistic = float(statistic)
        threshold = float(threshold)
        return cls(statistic, threshold, statistic >= threshold, detail)


@dataclass(frozen=True)
class Thresholds:
    """Rejection thresholds for the two exhaustive statistics.

    Defaults follow ``tau1 = kappa * sqrt(s log(e d / s) / n)`` and
    ``tau2 = sqrt(8 log d / n)`` with ``kappa`` the condition number of the
    covariance; ``n`` counts difference samples (pairs), not raw draws.
    """

    tau1: float
    tau2: float
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if not (self.tau1 > 0 and self.tau2 > 0):
            raise ValidationError("thresholds must be positive")


def default_thresholds(d: int, s: int, n: int, sigma: np.ndarray) -> Thresholds:
    if d < 2:
        raise ValidationError(f"need d >= 2 for a meaningful coordinate scan, got {d}")
    if not (1 <= s <= d):
        raise ValidationError(f"need 1 <= s <= d, got s={s}, d={d}")
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    eigvals = np.linalg.eigvalsh(np.asarray(sigma, dtype=float))
    kappa = float(eigvals[-1] / eigvals[0])
    tau1 = kappa * math.sqrt(s * math.log(math.e * d / s) / n)
    tau2 = math.sqrt(8.0 * math.log(d) / n)
    return Thresholds(tau1=tau1, tau2=tau2, kappa=kappa)


def _check_support_budget(d: int, s: int, budget: int) -> None:
    count = math.comb(d, s)
    if count > budget:
        raise CombinatorialBudgetError(
            f"enumerating C({d},{s}) = {count} supports exceeds the budget of {budget}; "
            f"raise support_budget to at least {count} or reduce s"
        )


def sparse_variance_statistic(
    w: np.ndarray,
    sigma: np.ndarray,
    s: int,
    support_budget: int = DEFAULT_SUPPORT_BUDGET,
) -> tuple[float, tuple[int, ...]]:
    """Supremum of the normalized sparse variance quotient, with its support.

    For whitened difference samples ``w`` this evaluates, exactly,

        sup over s-sparse unit v of  mean_i (v' S^{-1/2} w_i)^2 / (2 v' S^{-1} v)

    by solving, per support ``S``, the largest generalized eigenvalue of the
    pencil ``(G_S, B_S)`` with ``G`` the empirical second-moment matrix of
    ``S^{-1/2} w`` and ``B = 2 S^{-1}``: the quotient is scale-invariant in
    ``v``, so its restriction to a support is a Rayleigh quotient. Under the
    null the quotient has mean one in every direction. Enumeration is
    lexicographic with first-found tie-breaking, so results are deterministic.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] < 1:
        raise ValidationError("w must be a non-empty 2-d array of difference samples")
    d = w.shape[1]
    if not (1 <= s <= d):
        raise ValidationError(f"need 1 <= s <= d, got s={s}, d={d}")
    _check_support_budget(d, s, support_budget)

    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape == (d, d) and bool((sigma == np.eye(d)).all()):
        g = (w.T @ w) / w.shape[0]
        b = 2.0 * np.eye(d)
    else:
        root = sym_inverse_sqrt(sigma)
        y = w @ root
        g = (y.T @ y) / w.shape[0]
        b = 2.0 * (root @ root)  # 2 sigma^{-1}

    if s == 1:
        ratios = np.diag(g) / np.diag(b)
        j = int(np.argmax(ratios))
        return float(ratios[j]), (j,)

    if s == 2:
        jj, kk = np.triu_indices(d, k=1)
        g00, g11, g01 = np.diag(g)[jj], np.diag(g)[kk], g[jj, kk]
        b00, b11, b01 = np.diag(b)[jj], np.diag(b)[kk], b[jj, kk]
        det_b = b00 * b11 - b01 * b01
        tr = (b11 * g00 + b00 * g11 - 2.0 * b01 * g01) / det_b
        det = (g00 * g11 - g01 * g01) / det_b
        disc = np.maximum(tr * tr - 4.0 * det, 0.0)
        lam = 0.5 * (tr + np.sqrt(disc))
        idx = int(np.argmax(lam))
        return float(lam[idx]), (int(jj[idx]), int(kk[idx]))

    best = -math.inf
    best_support: tuple[int, ...] = ()
    for support in combinations(range(d), s):
        idx = list(support)
        lam = scipy.linalg.eigh(g[np.ix_(idx, idx)], b[np.ix_(idx, idx)], eigvals_only=True)[-1]
        if lam > best:
            best = float(lam)
            best_support = support
    return best, best_support


def peak_coordinate_statistic(u: np.ndarray, sigma: np.ndarray) -> tuple[float, int, int]:
    """Largest standardized coordinate of the mean class difference.

    Returns ``(value, coordinate, sign)`` where ``value = max_j |mean(u)_j| /
    sqrt(sigma_jj)``; the signed coordinate test over all +-e_j directions
    attains its supremum at this coordinate and sign.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] < 1:
        raise ValidationError("u must be a non-empty 2-d array of class differences")
    diag = np.diag(np.asarray(sigma, dtype=float))
    if np.any(diag <= 0):
        raise NonPositiveDiagonalError("covariance diagonal must be strictly positive")
    ubar = u.mean(axis=0)
    standardized = np.abs(ubar) / np.sqrt(diag)
    j = int(np.argmax(standardized))
    sign = 1 if ubar[j] >= 0 else -1
    return float(standardized[j]), j, sign


@dataclass(frozen=True)
class ExhaustiveResult:
    """Outcome of the combined exhaustive test (variance search OR peak coordinate)."""

    variance_search: TestResult
    peak_coordinate: TestResult

    @property
    def reject(self) -> bool:
        return self.variance_search.reject or self.peak_coordinate.reject

    @property
    def combined(self) -> TestResult:
        """Single-result view: rejection margin of the better sub-test vs 0."""
        margin = max(
            self.variance_search.statistic - self.variance_search.threshold,
            self.peak_coordinate.statistic - self.peak_coordinate.threshold,
        )
        fired = (
            "variance_search"
            if self.variance_search.statistic - self.variance_search.threshold
            >= self.peak_coordinate.statistic - self.peak_coordinate.threshold
            else "peak_coordinate"
        )
        return TestResult.decide(margin, 0.0, detail=fired)


def run_exhaustive_test(
    data: Dataset,
    sigma: np.ndarray,
    s: int,
    thresholds: Thresholds | None = None,
    support_budget: int = DEFAULT_SUPPORT_BUDGET,
) -> ExhaustiveResult:
    """Run both exhaustive statistics on one dataset and combine by disjunction.

    ``thresholds`` defaults to :func:`default_thresholds` evaluated at the
    realized pair count ``n // 2``; pass them explicitly to pin another
    convention.
    """
    w = whitened_pair_differences(data, sigma)
    u = between_class_differences(data)
    if thresholds is None:
        thresholds = default_thresholds(data.d, s, w.shape[0], sigma)
    stat1, support = sparse_variance_statistic(w, sigma, s, support_budget=support_budget)
    stat2, coord, sign = peak_coordinate_statistic(u, sigma)
    return ExhaustiveResult(
        variance_search=TestResult.decide(stat1, 1.0 + thresholds.tau1, detail={"support": support}),
        peak_coordinate=TestResult.decide(
            stat2, thresholds.tau2, detail={"coordinate": coord, "sign": sign}
        ),
    )
