"""Conditional-independence backends: graph oracle, exact table, G-squared.

Every backend answers query(a, b, s) -> True iff a and b are judged
independent given s, deterministically, with verdicts memoized per
(pair, set).  Indices refer to the backend's own variable list.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc

from .dsep import d_separated
from .errors import InputError, QueryOnHidden
from .graphs import TrueDag, Variable

log = logging.getLogger("rkcia.indep")


def chi2_sf(x: float, df: int) -> float:
    """Upper tail probability of the chi-square distribution.

    Regularized upper incomplete gamma; no quantile tables involved.
    """
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if x < 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


@dataclass
class ExactDistribution:
    """Joint distribution over visible variables as a flat table.

    probabilities is row-major over the variables in index order, so the
    last variable varies fastest.
    """

    variables: list[Variable]
    probabilities: np.ndarray

    def __post_init__(self):
        for pos, v in enumerate(self.variables):
            if v.index != pos:
                raise InputError(f"variable {v.name!r} at position {pos} has index {v.index}")
            if v.hidden:
                raise InputError(f"distribution over hidden variable {v.name!r}")
        self.probabilities = np.asarray(self.probabilities, dtype=float).ravel()
        want = int(np.prod([v.arity for v in self.variables])) if self.variables else 1
        if self.probabilities.size != want:
            raise InputError(
                f"probability table has {self.probabilities.size} entries, expected {want}"
            )
        if np.any(self.probabilities < 0):
            bad = int(np.argmin(self.probabilities))
            raise InputError(f"probability entry {bad} is negative")
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-12:
            raise InputError(f"probabilities sum to {self.probabilities.sum()!r}, not 1")

    def table(self) -> np.ndarray:
        return self.probabilities.reshape([v.arity for v in self.variables])


@dataclass
class DiscreteDataset:
    """Complete-case discrete samples; column j holds states of variable j."""

    variables: list[Variable]
    data: np.ndarray

    def __post_init__(self):
        for pos, v in enumerate(self.variables):
            if v.index != pos:
                raise InputError(f"variable {v.name!r} at position {pos} has index {v.index}")
            if v.hidden:
                raise InputError(f"dataset column for hidden variable {v.name!r}")
        self.data = np.asarray(self.data)
        if self.data.ndim != 2 or self.data.shape[1] != len(self.variables):
            raise InputError(
                f"data shape {self.data.shape} does not match {len(self.variables)} variables"
            )
        if self.data.size and not np.issubdtype(self.data.dtype, np.integer):
            raise InputError("dataset cells must be integers")
        for j, v in enumerate(self.variables):
            if self.data.shape[0] == 0:
                continue
            lo = int(self.data[:, j].min())
            hi = int(self.data[:, j].max())
            if lo < 0 or hi >= v.arity:
                raise InputError(
                    f"column {v.name!r} holds state {lo if lo < 0 else hi}, outside 0..{v.arity - 1}"
                )

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[0])


class IndependenceBackend:
    """Shared memoization and query normalization."""

    descriptor = "abstract"

    def __init__(self, variables: list[Variable]):
        self.variables = list(variables)
        self._cache: dict[tuple[int, int, frozenset[int]], bool] = {}
        self._lock = threading.Lock()

    def query(self, a: int, b: int, s=()) -> bool:
        if a == b:
            raise ValueError("query endpoints must be distinct")
        key = (a, b, frozenset(s)) if a < b else (b, a, frozenset(s))
        if key[0] in key[2] or key[1] in key[2]:
            raise ValueError("conditioning set must not contain the endpoints")
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        verdict = self._decide(*key)
        with self._lock:
            self._cache[key] = verdict
        return verdict

    def _decide(self, a: int, b: int, s: frozenset[int]) -> bool:
        raise NotImplementedError


class OracleBackend(IndependenceBackend):
    """Perfect verdicts from separation in a known ground-truth DAG."""

    def __init__(self, g: TrueDag):
        super().__init__(g.visible_variables())
        self.graph = g
        self._n_visible = g.n_visible
        self.descriptor = f"oracle(n_visible={self._n_visible})"

    def _decide(self, a, b, s):
        touched = [v for v in (a, b, *sorted(s)) if v >= self._n_visible]
        if touched:
            raise QueryOnHidden(f"query touches hidden variables {touched}")
        return d_separated(self.graph, a, b, s)


class ExactCmiBackend(IndependenceBackend):
    """Thresholded conditional mutual information on an explicit joint table."""

    def __init__(self, dist: ExactDistribution, epsilon: float = 1e-9):
        if epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {epsilon}")
        super().__init__(dist.variables)
        self.distribution = dist
        self.epsilon = float(epsilon)
        self._table = dist.table()
        self.descriptor = f"exact-cmi(epsilon={self.epsilon:g})"

    def cmi(self, a: int, b: int, s=()) -> float:
        """I(a; b | s) in nats; zero-probability strata contribute nothing."""
        s = sorted(set(s))
        keep = sorted({a, b, *s})
        drop = tuple(i for i in range(self._table.ndim) if i not in keep)
        joint = self._table.sum(axis=drop) if drop else self._table
        pos = {v: i for i, v in enumerate(keep)}
        q = np.moveaxis(joint, (pos[a], pos[b]), (0, 1))
        ra, rb = q.shape[0], q.shape[1]
        q = q.reshape(ra, rb, -1)
        p_s = q.sum(axis=(0, 1))
        p_as = q.sum(axis=1)
        p_bs = q.sum(axis=0)
        mask = q > 0
        ratio = np.ones_like(q)
        num = q * p_s[None, None, :]
        den = p_as[:, None, :] * p_bs[None, :, :]
        np.divide(num, den, out=ratio, where=mask)
        terms = q * np.log(ratio, where=mask, out=np.zeros_like(ratio))
        return float(terms.sum())

    def _decide(self, a, b, s):
        return self.cmi(a, b, s) <= self.epsilon


class GsqBackend(IndependenceBackend):
    """Likelihood-ratio independence test on discrete samples.

    The statistic is 2 * sum(observed * ln(observed * stratum_total /
    (row_total * column_total))) over nonzero cells, referred to a
    chi-square with (r_a - 1)(r_b - 1) * prod(conditioning arities)
    degrees of freedom.  When fewer than 10 samples per degree of freedom
    are available the test abstains and reports independence.
    """

    def __init__(self, data: DiscreteDataset, alpha: float = 0.05):
        if not (0.0 < alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {alpha}")
        super().__init__(data.variables)
        self.dataset = data
        self.alpha = float(alpha)
        self.descriptor = f"gsq(alpha={self.alpha:g}, n={data.n_samples})"

    def degrees_of_freedom(self, a: int, b: int, s=()) -> int:
        arities = [v.arity for v in self.variables]
        df = (arities[a] - 1) * (arities[b] - 1)
        for v in s:
            df *= arities[v]
        return df

    def g2_statistic(self, a: int, b: int, s=()) -> float:
        s = sorted(set(s))
        arities = [v.arity for v in self.variables]
        ra, rb = arities[a], arities[b]
        data = self.dataset.data
        if s:
            dims = [arities[v] for v in s]
            strata = np.ravel_multi_index([data[:, v] for v in s], dims)
            n_strata = int(np.prod(dims))
        else:
            strata = np.zeros(data.shape[0], dtype=np.intp)
            n_strata = 1
        cell = (strata * ra + data[:, a]) * rb + data[:, b]
        counts = np.bincount(cell, minlength=n_strata * ra * rb).reshape(n_strata, ra, rb)
        totals = counts.sum(axis=(1, 2), keepdims=True)
        rows = counts.sum(axis=2, keepdims=True)
        cols = counts.sum(axis=1, keepdims=True)
        mask = counts > 0
        ratio = np.ones(counts.shape, dtype=float)
        np.divide(
            counts.astype(float) * totals,
            rows.astype(float) * cols,
            out=ratio,
            where=mask,
        )
        return float(2.0 * (counts * np.log(ratio, where=mask, out=np.zeros_like(ratio))).sum())

    def _decide(self, a, b, s):
        df = self.degrees_of_freedom(a, b, s)
        n = self.dataset.n_samples
        if n < 10 * df:
            log.debug(
                "abstaining on (%d, %d | %s): %d samples < 10 * %d df", a, b, sorted(s), n, df
            )
            return True
        g2 = self.g2_statistic(a, b, s)
        return chi2_sf(g2, df) >= self.alpha


def oracle_backend(g: TrueDag) -> OracleBackend:
    return OracleBackend(g)


def exact_backend(dist: ExactDistribution, epsilon: float = 1e-9) -> ExactCmiBackend:
    return ExactCmiBackend(dist, epsilon)


def gsq_backend(data: DiscreteDataset, alpha: float = 0.05) -> GsqBackend:
    return GsqBackend(data, alpha)
