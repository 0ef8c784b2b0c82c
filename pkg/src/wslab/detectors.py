"""Estimator-style wrappers so the tests compose with scikit-learn tooling.

Both detectors follow the fit/attributes contract: constructor arguments are
hyperparameters stored verbatim, ``fit(X, y)`` runs the decision procedure
and exposes trailing-underscore attributes, and ``get_params``/``set_params``
make instances clonable by ``sklearn.base.clone`` without importing sklearn
here.
"""

from __future__ import annotations

import inspect

import numpy as np

from .errors import ValidationError
from .exhaustive import Thresholds, default_thresholds, run_exhaustive_test
from .model import Dataset
from .oracle import EmpiricalOracle
from .tractable import TractableConfig, default_oracle_config, run_tractable_test

__all__ = ["ExhaustiveShiftDetector", "QueryShiftDetector", "check_X_y"]


def check_X_y(X, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate and convert inputs: finite 2-d X, binary 1-d y of equal length."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ValidationError(f"X must be 2-d, got shape {X.shape}")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValidationError("y must be 1-d with one label per row of X")
    if not np.all(np.isfinite(X)):
        raise ValidationError("X contains non-finite values")
    return X, y


class _ParamsMixin:
    """Minimal scikit-learn parameter protocol derived from ``__init__``."""

    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValidationError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


class ExhaustiveShiftDetector(_ParamsMixin):
    """Mean-shift detector running the exhaustive sparse search.

    Parameters
    ----------
    s : support size for the sparse variance search.
    sigma : known covariance; ``None`` means identity.
    thresholds : explicit :class:`Thresholds`; ``None`` derives the defaults
        at the realized pair count.
    support_budget : cap on enumerated supports.
    """

    def __init__(self, s: int = 1, sigma=None, thresholds: Thresholds | None = None,
                 support_budget: int = 1_000_000):
        self.s = s
        self.sigma = sigma
        self.thresholds = thresholds
        self.support_budget = support_budget

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        sigma = np.eye(X.shape[1]) if self.sigma is None else np.asarray(self.sigma, dtype=float)
        data = Dataset(labels=y, covariates=X)
        result = run_exhaustive_test(
            data, sigma, self.s, self.thresholds, support_budget=self.support_budget
        )
        self.n_features_in_ = X.shape[1]
        self.result_ = result
        self.variance_statistic_ = result.variance_search.statistic
        self.peak_statistic_ = result.peak_coordinate.statistic
        self.support_ = result.variance_search.detail["support"]
        self.coordinate_ = result.peak_coordinate.detail["coordinate"]
        self.reject_ = result.reject
        return self

    def decision(self) -> bool:
        if not hasattr(self, "reject_"):
            raise ValidationError("detector is not fitted; call fit(X, y) first")
        return self.reject_


class QueryShiftDetector(_ParamsMixin):
    """Mean-shift detector running the bounded-query test over an honest oracle.

    The oracle averages each of the ``4d`` coordinate queries over the fitted
    data; thresholds follow the ``R``/``C``/``xi`` constants.
    """

    def __init__(self, R: float = 4.0, C: float = 8.0, xi: float | None = None, sigma=None):
        self.R = R
        self.C = C
        self.xi = xi
        self.sigma = sigma

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        d = X.shape[1]
        sigma = np.eye(d) if self.sigma is None else np.asarray(self.sigma, dtype=float)
        cfg = TractableConfig(d=d, n=X.shape[0], R=self.R, C=self.C, xi=self.xi)
        data = Dataset(labels=y, covariates=X)
        oracle = EmpiricalOracle(data, default_oracle_config(cfg))
        result = run_tractable_test(oracle, cfg, sigma)
        self.n_features_in_ = d
        self.result_ = result
        self.diagonal_statistic_ = result.diagonal.statistic
        self.signed_statistic_ = result.signed.statistic
        self.reject_ = result.reject
        return self

    def decision(self) -> bool:
        if not hasattr(self, "reject_"):
            raise ValidationError("detector is not fitted; call fit(X, y) first")
        return self.reject_
