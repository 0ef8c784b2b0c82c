import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wslab import errors, model, oracle
from wslab.seeding import spawn_rng
from wslab.tractable import TractableConfig, build_queries, default_oracle_config

from conftest import stream


def _const_query(c: float, m: float = 1.0) -> oracle.BoundedQuery:
    return oracle.BoundedQuery(id=f"const_{c}", evaluate=lambda y, x: np.full(len(y), c), bound_M=m)


def test_tolerance_variance_branch_golden():
    cfg = oracle.OracleConfig(n=100, xi=math.exp(-1.0), eta=0.0, budget_T=1)
    got = oracle.tolerance(_const_query(0.0), 0.0, cfg)
    assert got == pytest.approx(math.sqrt(2.0 / 100.0), rel=1e-12)


def test_tolerance_range_branch_when_expectation_full():
    cfg = oracle.OracleConfig(n=50, xi=0.1, eta=2.0, budget_T=1)
    got = oracle.tolerance(_const_query(1.0), 1.0, cfg)
    assert got == pytest.approx((2.0 + math.log(10.0)) / 50.0, rel=1e-12)


def test_tolerance_expectation_out_of_range():
    cfg = oracle.OracleConfig(n=50, xi=0.1, eta=0.0, budget_T=1)
    with pytest.raises(errors.ExpectationOutOfRangeError):
        oracle.tolerance(_const_query(0.0, m=1.0), 1.5, cfg)


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=10_000),
    m=st.floats(min_value=0.01, max_value=100.0),
    e_frac=st.floats(min_value=-1.0, max_value=1.0),
    cap=st.floats(min_value=0.01, max_value=50.0),
)
def test_tolerance_halves_when_n_doubles(n, m, e_frac, cap):
    q = _const_query(0.0, m=m)
    cfg1 = oracle.OracleConfig(n=n, xi=math.exp(-cap), eta=0.0, budget_T=1)
    cfg2 = oracle.OracleConfig(n=2 * n, xi=math.exp(-cap), eta=0.0, budget_T=1)
    t1 = oracle.tolerance(q, e_frac * m, cfg1)
    t2 = oracle.tolerance(q, e_frac * m, cfg2)
    assert t2 < t1 or (t1 == 0.0 and t2 == 0.0)


def test_tolerance_branch_crossover_identity():
    for m in (0.5, 1.0, 3.0):
        for e_frac in (0.0, 0.5, 0.9, 1.0):
            for n in (10, 1000):
                for cap in (0.5, 5.0, 50.0):
                    cfg = oracle.OracleConfig(n=n, xi=math.exp(-cap), eta=0.0, budget_T=1)
                    e = e_frac * m
                    b1 = cap * m / n
                    b2 = math.sqrt(2.0 * cap * (m * m - e * e) / n)
                    assert oracle.tolerance(_const_query(0.0, m=m), e, cfg) == max(b1, b2)
                    assert (b1 >= b2) == (cap * m * m >= 2 * n * (m * m - e * e))


# ---------------------------------------------------------------------------
# truncated moments and analytic expectations
# ---------------------------------------------------------------------------


def test_truncated_moments_untruncated_limits():
    p, m1, m2 = oracle.truncated_moments(0.7, -math.inf, math.inf)
    assert p == pytest.approx(1.0, abs=1e-15)
    assert m1 == pytest.approx(0.7, rel=1e-12)
    assert m2 == pytest.approx(1.0 + 0.49, rel=1e-12)


def test_truncated_moments_symmetric_interval_zero_mean():
    p, m1, m2 = oracle.truncated_moments(0.0, -1.0, 1.0)
    assert m1 == 0.0
    assert p == pytest.approx(2 * 0.341344746, abs=1e-6)
    assert 0.0 < m2 < p  # mass pulled toward the center


def test_analytic_expectation_null_symmetry():
    theta = model.ModelParams(np.zeros(3), np.zeros(3), np.eye(3), 0.5)
    spec_mean = oracle.TruncatedQuerySpec("coordinate_mean", 0, 2.5, 1.0)
    spec_signed = oracle.TruncatedQuerySpec("signed_label_mean", 1, 2.5, 1.0, sign=-1)
    assert oracle.analytic_query_expectation(spec_mean, theta) == pytest.approx(0.0, abs=1e-15)
    assert oracle.analytic_query_expectation(spec_signed, theta) == pytest.approx(0.0, abs=1e-15)


def test_analytic_second_moment_untruncated_null():
    theta = model.ModelParams(np.zeros(2), np.zeros(2), np.eye(2), 0.0)
    spec = oracle.TruncatedQuerySpec("coordinate_second_moment", 0, math.inf, 1.0)
    assert oracle.analytic_query_expectation(spec, theta) == pytest.approx(0.0, abs=1e-12)


def test_analytic_expectation_matches_monte_carlo():
    # all three kinds, random models, 1e6 draws each, 4 standard errors
    rng = stream(40)
    checks = 0
    for trial in range(20):
        d = 3
        mu0 = rng.uniform(-1, 1, d)
        mu1 = rng.uniform(-1, 1, d)
        diag = rng.uniform(0.5, 2.0, d)
        alpha = float(rng.uniform(0, 1))
        theta = model.ModelParams(mu0, mu1, np.diag(diag), alpha)
        j = int(rng.integers(0, d))
        sign = int(rng.choice([-1, 1]))
        trunc = float(rng.uniform(1.0, 3.0))
        m = 1_000_000
        z = rng.integers(0, 2, m)
        x = np.where(z == 1, mu1[j], mu0[j]) + math.sqrt(diag[j]) * rng.standard_normal(m)
        y = np.where(rng.random(m) < (1 + alpha) / 2, z, 1 - z)
        std = x / math.sqrt(diag[j])
        mask = np.abs(std) <= trunc
        kind = ("coordinate_mean", "coordinate_second_moment", "signed_label_mean")[trial % 3]
        if kind == "coordinate_mean":
            vals = std * mask
        elif kind == "coordinate_second_moment":
            vals = (std * std - 1.0) * mask
        else:
            flipped = sign * std
            vals = (2 * y - 1) * flipped * (np.abs(flipped) <= trunc)
        spec = oracle.TruncatedQuerySpec(kind, j, trunc, float(diag[j]), sign=sign)
        exact = oracle.analytic_query_expectation(spec, theta)
        se = vals.std(ddof=1) / math.sqrt(m)
        assert abs(vals.mean() - exact) <= 4 * se, (kind, trial)
        checks += 1
    assert checks == 20


def test_unsupported_kind_rejected():
    with pytest.raises(errors.UnsupportedQueryKindError):
        oracle.TruncatedQuerySpec("median", 0, 1.0, 1.0)


def test_analytic_expectation_requires_description():
    theta = model.ModelParams(np.zeros(2), np.zeros(2), np.eye(2), 0.5)
    with pytest.raises(errors.NoAnalyticExpectationError):
        oracle.analytic_expectation(_const_query(0.3), theta)


def test_analytic_expectation_rejects_mismatched_standardization():
    theta = model.ModelParams(np.zeros(2), np.zeros(2), np.diag([2.0, 1.0]), 0.5)
    spec = oracle.TruncatedQuerySpec("coordinate_mean", 0, 2.0, 1.0)  # built for unit variance
    with pytest.raises(errors.NoAnalyticExpectationError):
        oracle.analytic_query_expectation(spec, theta)


# ---------------------------------------------------------------------------
# oracle policies
# ---------------------------------------------------------------------------


def _null_dataset(n: int, d: int, seed: int, alpha: float = 0.5) -> model.Dataset:
    theta = model.ModelParams(np.zeros(d), np.zeros(d), np.eye(d), alpha)
    return model.sample_dataset(theta, n, spawn_rng(41, seed))


def _ocfg(n: int, budget: int = 100) -> oracle.OracleConfig:
    return oracle.OracleConfig(n=n, xi=0.05, eta=math.log(8), budget_T=budget)


def test_empirical_oracle_constant_query_exact():
    data = _null_dataset(100, 2, 0)
    pol = oracle.EmpiricalOracle(data, _ocfg(100))
    assert pol.query(_const_query(0.25)).value == pytest.approx(0.25, rel=1e-15)


def test_empirical_oracle_symmetric_labels():
    data = _null_dataset(100_000, 2, 1, alpha=0.0)
    q = oracle.BoundedQuery(id="sgn", evaluate=lambda y, x: 2.0 * y - 1.0, bound_M=1.0)
    value = oracle.EmpiricalOracle(data, _ocfg(100_000)).query(q).value
    assert abs(value) <= 3.0 / math.sqrt(100_000)


def test_empirical_oracle_order_invariant():
    data = _null_dataset(500, 3, 2)
    rng = stream(42)
    perm = rng.permutation(data.n)
    shuffled = model.Dataset(labels=data.labels[perm], covariates=data.covariates[perm])
    q = oracle.BoundedQuery(id="x0", evaluate=lambda y, x: np.clip(x[:, 0], -5, 5), bound_M=5.0)
    a = oracle.EmpiricalOracle(data, _ocfg(500)).query(q).value
    b = oracle.EmpiricalOracle(shuffled, _ocfg(500)).query(q).value
    assert a == pytest.approx(b, rel=1e-12)


def test_budget_exhausts_deterministically():
    data = _null_dataset(10, 2, 3)
    pol = oracle.EmpiricalOracle(data, _ocfg(10, budget=3))
    q = _const_query(0.0)
    for _ in range(3):
        pol.query(q)
    with pytest.raises(errors.BudgetExceededError):
        pol.query(q)


def test_empirical_oracle_conformance_to_exact_tolerance():
    # honest responses stay within the exact tolerance in >= 95% of trials
    d, n = 20, 10_000
    cfg = TractableConfig(d=d, n=n)
    ocfg = default_oracle_config(cfg)
    theta = model.ModelParams(np.zeros(d), np.zeros(d), np.eye(d), 0.5)
    queries = build_queries(cfg, np.eye(d))[:d]  # the coordinate-mean family
    hits = trials = 0
    for i in range(100):
        data = model.sample_dataset(theta, n, spawn_rng(43, i))
        pol = oracle.EmpiricalOracle(data, ocfg)
        q = queries[i % d]
        exact = oracle.analytic_expectation(q, theta)
        tau = oracle.tolerance(q, exact, ocfg)
        hits += abs(pol.query(q).value - exact) <= tau
        trials += 1
    assert hits / trials >= 0.95


def test_worst_case_oracle_sign_policies():
    theta = model.ModelParams(np.zeros(2), np.zeros(2), np.eye(2), 0.5)
    spec = oracle.TruncatedQuerySpec("coordinate_mean", 0, 2.0, 1.0)
    q = oracle.BoundedQuery(id="m0", evaluate=lambda y, x: x[:, 0], bound_M=2.0, analytic=spec)
    cfg = _ocfg(400)
    tau = oracle.tolerance(q, 0.0, cfg)
    plus = oracle.WorstCaseOracle(theta, cfg, "+").query(q)
    minus = oracle.WorstCaseOracle(theta, cfg, "-").query(q)
    assert plus.value == pytest.approx(tau, rel=1e-12)
    assert minus.value == pytest.approx(-tau, rel=1e-12)
    alt = oracle.WorstCaseOracle(theta, cfg, "alternating")
    first, second = alt.query(q), alt.query(q)
    assert first.value == pytest.approx(-second.value, rel=1e-12)


def test_worst_case_oracle_requires_analytic_query():
    theta = model.ModelParams(np.zeros(2), np.zeros(2), np.eye(2), 0.5)
    pol = oracle.WorstCaseOracle(theta, _ocfg(100), "+")
    with pytest.raises(errors.NoAnalyticExpectationError):
        pol.query(_const_query(0.0))


def _pair(alpha: float, beta: float, d: int = 4):
    zero = np.zeros(d)
    theta0 = model.ModelParams(zero, zero, np.eye(d), alpha)
    v = np.zeros(d)
    v[0] = beta
    theta1 = model.ModelParams(-v / 2, v / 2, np.eye(d), alpha)
    return theta0, theta1


def test_adversarial_oracle_hides_small_gaps():
    theta0, theta1 = _pair(alpha=0.2, beta=0.01)
    cfg = TractableConfig(d=4, n=50)
    queries = build_queries(cfg, np.eye(4))
    adv = oracle.AdversarialPairOracle(theta0, theta1, default_oracle_config(cfg))
    t0 = [adv.policy(0).query(q) for q in queries]
    t1 = [adv.policy(1).query(q) for q in queries]
    assert all(not r.flagged for r in adv.report)
    assert [r.value for r in t0] == [r.value for r in t1]
    # within-tolerance queries answer the first model's expectation exactly
    assert t0[0].value == pytest.approx(oracle.analytic_expectation(queries[0], theta0), rel=1e-12)


def test_adversarial_oracle_flags_large_gaps_and_answers_honestly():
    theta0, theta1 = _pair(alpha=1.0, beta=4.0)
    cfg = TractableConfig(d=4, n=1_000_000)
    queries = build_queries(cfg, np.eye(4))
    adv = oracle.AdversarialPairOracle(theta0, theta1, default_oracle_config(cfg))
    records = {q.id: adv.assess(q) for q in queries}
    flagged = [qid for qid, r in records.items() if r.flagged]
    assert flagged  # the signal coordinate distinguishes at this sample size
    q0 = next(q for q in queries if q.id in flagged)
    v1 = adv.policy(1).query(q0).value
    assert v1 == pytest.approx(oracle.analytic_expectation(q0, theta1), rel=1e-12)
    v0 = adv.policy(0).query(q0).value
    assert v0 == pytest.approx(oracle.analytic_expectation(q0, theta0), rel=1e-12)


def test_adversarial_report_gap_vs_tolerance_fields():
    theta0, theta1 = _pair(alpha=0.5, beta=0.3)
    cfg = TractableConfig(d=4, n=200)
    queries = build_queries(cfg, np.eye(4))
    adv = oracle.AdversarialPairOracle(theta0, theta1, default_oracle_config(cfg))
    for q in queries:
        rec = adv.assess(q)
        e0 = oracle.analytic_expectation(q, theta0)
        e1 = oracle.analytic_expectation(q, theta1)
        assert rec.gap == pytest.approx(abs(e1 - e0), abs=1e-15)
        assert rec.tolerance == pytest.approx(
            oracle.tolerance(q, e1, default_oracle_config(cfg)), rel=1e-12
        )
        assert rec.flagged == (rec.gap > rec.tolerance)
