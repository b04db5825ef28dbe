"""Estimator-style facade over the functional API.

Thin wrappers with the familiar fit/attributes pattern so the index can sit
in scripted pipelines next to other estimators; all computation is delegated
to :mod:`search` and :mod:`categorical`.
"""
from __future__ import annotations

import math
from typing import Optional, Union

import numpy as np
from sklearn.base import BaseEstimator

from .categorical import ContingencyTable, find_nstar_categorical, fit_independence, nstar_asy, nstar_asy2
from .distributions import DistributionFamily, SeedSpec
from .goftests import ESTIMATED_NORMAL, KS_ONE_SAMPLE, TestSpec
from .resampling import BOOTSTRAP, SUBSAMPLE, estimate_power
from .search import SearchConfig, nstar_beta, reliability

__all__ = ["CredibilityIndex", "TableCredibilityIndex"]


class CredibilityIndex(BaseEstimator):
    """Credibility index of a distributional model for a univariate sample.

    ``fit`` searches the resampling power curve of the configured test for
    the size at which power reaches ``target_beta``.

    Parameters
    ----------
    test : str
        Test identifier (see :mod:`modelcred.goftests` constants).
    alpha : float
        Test size, in (0, 0.5).
    null : DistributionFamily, "estimated-normal", or None
        Null specification for one-sample tests.
    cells : int, optional
        Cell count for the Pearson test.
    scheme : str
        "subsample" or "bootstrap".
    target_beta : float
        Power level defining the index (0.5 gives the standard N*).
    master_seed : int
        Seed of the deterministic stream tree.
    m_cap, start_hint, replicates_coarse, replicates_fine, jobs
        Search configuration, passed through to the search engine.

    Attributes
    ----------
    n_star_ : float
        Estimated index (math.inf when the cap is reached).
    sqrt_n_star_ : float
        Root-index, the more interpretable scale.
    bracket_ : tuple or None
        Final (m_low, m_high) bracket.
    phi_inv_ : float or None
        n / n_star_, the EISS lower bound.
    curve_ : PowerCurve
        All power evaluations used by the search.
    estimate_ : CredibilityEstimate
        Full result record.
    """

    def __init__(
        self,
        test: str = KS_ONE_SAMPLE,
        alpha: float = 0.05,
        null: Union[DistributionFamily, str, None] = ESTIMATED_NORMAL,
        cells: Optional[int] = None,
        scheme: str = SUBSAMPLE,
        target_beta: float = 0.5,
        master_seed: int = 0,
        m_cap: Optional[int] = None,
        start_hint: Optional[int] = None,
        replicates_coarse: int = 400,
        replicates_fine: int = 1000,
        jobs: int = 1,
    ):
        self.test = test
        self.alpha = alpha
        self.null = null
        self.cells = cells
        self.scheme = scheme
        self.target_beta = target_beta
        self.master_seed = master_seed
        self.m_cap = m_cap
        self.start_hint = start_hint
        self.replicates_coarse = replicates_coarse
        self.replicates_fine = replicates_fine
        self.jobs = jobs

    def _spec(self) -> TestSpec:
        return TestSpec(
            test=self.test, alpha=self.alpha, null=self.null, cells=self.cells
        )

    def _config(self) -> SearchConfig:
        return SearchConfig(
            replicates_coarse=self.replicates_coarse,
            replicates_fine=self.replicates_fine,
            m_cap=self.m_cap,
        )

    def fit(self, X, y=None):
        """Estimate the index from a univariate sample X."""
        data = np.asarray(X, dtype=float).ravel()
        est = nstar_beta(
            data,
            self._spec(),
            scheme=self.scheme,
            seed=SeedSpec(self.master_seed),
            config=self._config(),
            target_beta=self.target_beta,
            start_hint=self.start_hint,
            jobs=self.jobs,
        )
        self.n_ = data.size
        self.estimate_ = est
        self.n_star_ = est.n_star
        self.sqrt_n_star_ = est.sqrt_n_star
        self.bracket_ = est.bracket
        self.phi_inv_ = est.phi_inv
        self.curve_ = est.curve
        self.reliability_ = reliability(self.n_, est) if est.finite else None
        self._data = data
        return self

    def power_at(self, m: int, replicates: int = 1000):
        """Power estimate at one resample size, on the fitted data."""
        if not hasattr(self, "estimate_"):
            raise RuntimeError("call fit first")
        return estimate_power(
            self._data, self._spec(), m, replicates,
            scheme=self.scheme, seed=SeedSpec(self.master_seed), jobs=self.jobs,
        )


class TableCredibilityIndex(BaseEstimator):
    """Credibility index of the independence model for a contingency table.

    ``fit`` takes the R x C count grid, computes the exact fit statistics and
    both closed-form approximations, and runs the resampling search.

    Attributes
    ----------
    g2_, x2_, df_ : float, float, int
        Deviance, Pearson statistic, and degrees of freedom of the fit.
    nstar_asy_, nstar_asy2_ : float
        Closed-form index approximations.
    n_star_ : float
        Resampling index estimate.
    phi_inv_ : float or None
        n / n_star_ reliability diagnostic.
    """

    def __init__(
        self,
        alpha: float = 0.05,
        scheme: str = BOOTSTRAP,
        master_seed: int = 0,
        target_beta: float = 0.5,
        replicates_coarse: int = 400,
        replicates_fine: int = 1000,
        m_cap: Optional[int] = None,
    ):
        self.alpha = alpha
        self.scheme = scheme
        self.master_seed = master_seed
        self.target_beta = target_beta
        self.replicates_coarse = replicates_coarse
        self.replicates_fine = replicates_fine
        self.m_cap = m_cap

    def fit(self, X, y=None):
        table = X if isinstance(X, ContingencyTable) else ContingencyTable(np.asarray(X))
        fit = fit_independence(table)
        config = SearchConfig(
            replicates_coarse=self.replicates_coarse,
            replicates_fine=self.replicates_fine,
            m_cap=self.m_cap,
        )
        est = find_nstar_categorical(
            table,
            alpha=self.alpha,
            scheme=self.scheme,
            seed=SeedSpec(self.master_seed),
            config=config,
            target_beta=self.target_beta,
        )
        self.n_ = table.n
        self.g2_ = fit.g2
        self.x2_ = fit.x2
        self.df_ = fit.df
        self.kl_rate_ = fit.kl_rate
        self.nstar_asy_ = nstar_asy(table, fit, self.alpha)
        self.nstar_asy2_ = nstar_asy2(table, fit, self.alpha)
        self.estimate_ = est
        self.n_star_ = est.n_star
        self.sqrt_n_star_ = est.sqrt_n_star if est.finite else math.inf
        self.bracket_ = est.bracket
        self.phi_inv_ = est.phi_inv
        self.curve_ = est.curve
        return self
