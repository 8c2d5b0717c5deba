"""Transition kernel of the infinite-server queue and its semigroup action.

The time-t law started from k is the convolution of a thinned binomial with a
Poisson innovation: B(k, p) * Poisson(rho * (1 - p)) with p = exp(-mu * t).
Everything here is a pure function of its inputs; rows for different (k, t)
can be computed in parallel with no coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .distributions import (
    LOG_ZERO,
    BinomialLaw,
    CertifiedPmf,
    PoissonLaw,
    binomial_log_pmf,
    convolution_log_matrix,
    convolve,
    logsumexp,
    poisson_log_pmf,
    poisson_window,
)

DEFAULT_DEFICIT = 1e-12


@dataclass(frozen=True)
class QueueParams:
    """Arrival rate lam, per-customer service rate mu; both strictly positive."""

    lam: float
    mu: float

    def __post_init__(self):
        if self.lam <= 0 or self.mu <= 0:
            raise ValueError(f"rates must be positive, got lam={self.lam}, mu={self.mu}")

    @property
    def rho(self) -> float:
        return self.lam / self.mu

    def p(self, t: float) -> float:
        """Survival probability of an initial customer over horizon t."""
        if t < 0:
            raise ValueError(f"time must be non-negative, got {t}")
        return math.exp(-self.mu * t)

    def q(self, t: float) -> float:
        """1 - p(t), computed without cancellation for small t."""
        if t < 0:
            raise ValueError(f"time must be non-negative, got {t}")
        return -math.expm1(-self.mu * t)

    def t_for_p(self, p: float) -> float:
        """Horizon at which the survival probability equals p."""
        if not 0.0 < p <= 1.0:
            raise ValueError(f"p must lie in (0,1], got {p}")
        return -math.log(p) / self.mu


@dataclass(frozen=True)
class KernelRow:
    """Law of the state at time t started from k, as a certified windowed pmf."""

    k: int
    t: float
    pmf: CertifiedPmf
    degenerate: bool = False


class Observable:
    """A non-negative function on the non-negative integers.

    Either a finite-support table (zero off the table) or a bounded callable
    with a declared supremum. The supremum is needed to certify the truncation
    error of windowed sums; it is spot-checked by sampling and trusted beyond.
    """

    def __init__(self, table=None, func=None, sup=None):
        if (table is None) == (func is None):
            raise ValueError("provide exactly one of table or func")
        if table is not None:
            table = {int(n): float(v) for n, v in table.items()}
            if any(n < 0 for n in table):
                raise ValueError("table keys must be non-negative integers")
            if any(v < 0 for v in table.values()):
                raise ValueError("observable values must be non-negative")
            if all(v == 0 for v in table.values()):
                raise ValueError("observable must not be identically zero")
            self.table = table
            self.func = None
            self.sup = max(table.values())
        else:
            if sup is None or not sup > 0:
                raise ValueError("callable observables require a positive sup bound")
            for n in range(0, 201, 7):
                v = func(n)
                if v < 0:
                    raise ValueError(f"observable is negative at {n}")
                if v > sup:
                    raise ValueError(f"declared sup {sup} violated at {n}: {v}")
            self.table = None
            self.func = func
            self.sup = float(sup)

    @classmethod
    def from_table(cls, table) -> "Observable":
        return cls(table=table)

    @classmethod
    def from_callable(cls, func, sup) -> "Observable":
        return cls(func=func, sup=sup)

    @classmethod
    def indicator(cls, points) -> "Observable":
        return cls(table={n: 1.0 for n in points})

    @property
    def is_table(self) -> bool:
        return self.table is not None

    @property
    def support(self) -> list[int]:
        if not self.is_table:
            raise ValueError("callable observables have no finite support")
        return sorted(n for n, v in self.table.items() if v > 0)

    def __call__(self, n: int) -> float:
        if n == -1:
            n = 0  # boundary convention of the generator
        if self.is_table:
            return self.table.get(n, 0.0)
        return self.func(n)


@dataclass(frozen=True)
class SemigroupValue:
    """A semigroup evaluation together with its certified truncation error."""

    value: float
    error: float


@lru_cache(maxsize=2_000_000)
def _kernel_log_entry(lam: float, mu: float, t: float, k: int, n: int) -> float:
    p = math.exp(-mu * t)
    b = (lam / mu) * (-math.expm1(-mu * t))
    j_hi = min(k, n)
    return logsumexp(
        binomial_log_pmf(k, p, j) + poisson_log_pmf(b, n - j) for j in range(j_hi + 1)
    )


def kernel_entry(params: QueueParams, t: float, k: int, n: int) -> float:
    """log P(state = n at time t | start = k), via the finite convolution sum.

    Each entry is a single log-sum-exp over min(k, n) + 1 terms, so it carries
    an error bound independent of any recursion in k.
    """
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if k < 0 or n < 0:
        raise ValueError("states must be non-negative")
    if t == 0:
        return 0.0 if n == k else LOG_ZERO
    return _kernel_log_entry(params.lam, params.mu, t, k, n)


def kernel_log_matrix(params: QueueParams, t: float, k_max: int, n_max: int) -> np.ndarray:
    """Array G[k, n] of log transition masses for k <= k_max, n <= n_max."""
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    p = params.p(t)
    b = params.rho * params.q(t)
    return np.stack(
        [convolution_log_matrix(k, p, b, n_max) for k in range(k_max + 1)]
    )


def mehler_row(
    params: QueueParams, t: float, k: int, deficit: float = DEFAULT_DEFICIT
) -> KernelRow:
    """Full certified row of the time-t kernel started from k.

    At t = 0 the row degenerates to the Dirac mass at k and is flagged; the
    downstream inequality checks are vacuous there.
    """
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if k < 0:
        raise ValueError(f"initial state must be non-negative, got {k}")
    if t == 0:
        pmf = CertifiedPmf(offset=k, log_masses=np.array([0.0]), tail_deficit=0.0)
        return KernelRow(k=k, t=t, pmf=pmf, degenerate=True)
    pmf = convolve(
        BinomialLaw(k, params.p(t)), PoissonLaw(params.rho * params.q(t)), deficit
    )
    return KernelRow(k=k, t=t, pmf=pmf)


def semigroup_apply(
    params: QueueParams,
    t: float,
    f: Observable,
    k: int,
    deficit: float = DEFAULT_DEFICIT,
) -> SemigroupValue:
    """Expected value of f at time t started from k, with certified error.

    Table observables are summed exactly over their support (no truncation
    error); bounded callables are summed over a certified window and carry a
    sup * tail_deficit truncation bound.
    """
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if t == 0:
        return SemigroupValue(value=f(k), error=0.0)
    if f.is_table:
        total = sum(
            f.table[m] * math.exp(kernel_entry(params, t, k, m))
            for m in f.support
        )
        return SemigroupValue(value=total, error=0.0)
    row = mehler_row(params, t, k, deficit)
    total = 0.0
    for n in range(row.pmf.offset, row.pmf.support_end + 1):
        total += f(n) * row.pmf.mass(n)
    return SemigroupValue(value=total, error=f.sup * row.pmf.tail_deficit)


def log_semigroup_apply(
    params: QueueParams,
    t: float,
    f: Observable,
    k: int,
    deficit: float = DEFAULT_DEFICIT,
) -> float:
    """log of the semigroup action, accumulated in the log domain so that
    far-from-support evaluations stay meaningful."""
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    if f.is_table:
        terms = [
            math.log(f.table[m]) + kernel_entry(params, t, k, m) for m in f.support
        ]
        return logsumexp(terms)
    row = mehler_row(params, t, k, deficit)
    terms = []
    for n in range(row.pmf.offset, row.pmf.support_end + 1):
        v = f(n)
        if v > 0:
            terms.append(math.log(v) + row.pmf.log_mass(n))
    return logsumexp(terms) if terms else LOG_ZERO


def generator_apply(params: QueueParams, f: Observable, n: int) -> float:
    """Generator action lam*[f(n+1)-f(n)] + n*mu*[f(n-1)-f(n)], with f(-1)=f(0)."""
    if n < 0:
        raise ValueError(f"state must be non-negative, got {n}")
    up = params.lam * (f(n + 1) - f(n))
    down = n * params.mu * (f(n - 1) - f(n))
    return up + down


def reversibility_defect(
    params: QueueParams, t: float, i: int, j: int, deficit: float = DEFAULT_DEFICIT
) -> float:
    """|P(i|j) pi(j) - P(j|i) pi(i)| under the stationary Poisson(rho) law."""
    if i == j:
        return 0.0
    lhs = kernel_entry(params, t, j, i) + poisson_log_pmf(params.rho, j)
    rhs = kernel_entry(params, t, i, j) + poisson_log_pmf(params.rho, i)
    a = 0.0 if lhs == LOG_ZERO else math.exp(lhs)
    b = 0.0 if rhs == LOG_ZERO else math.exp(rhs)
    return abs(a - b)
