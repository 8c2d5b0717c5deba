"""The sharp semi-log-convexity constants and grid verification of the inequalities.

All comparisons happen in the log domain with an explicit additive error
budget: a case passes when its margin (left side minus right side of the
inequality) is at least minus the budget. Entries whose certified mass falls
below MASS_FLOOR are reported as untestable rather than pass, because ratios
of sub-denormal masses carry no information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import LOG_ZERO, convolution_log_matrix
from .kernel import Observable, QueueParams, kernel_log_matrix, log_semigroup_apply

MASS_FLOOR = 1e-280
LOG_MASS_FLOOR = math.log(MASS_FLOOR)

LOG_TWELVE = math.log(12.0)


def sharp_bound(rho: float, p: float) -> float:
    """Sharp lower bound on the discrete Laplacian of the log-semigroup:
    log(1 - p^2 / [p + rho(1-p)^2]^2). Zero at p=0, -inf at p=1."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0,1], got {p}")
    if p == 1.0:
        return LOG_ZERO
    d = p + rho * (1.0 - p) ** 2
    ratio = (p / d) ** 2
    if ratio >= 1.0:
        return LOG_ZERO
    return math.log1p(-ratio)


def glmrs_bound(rho: float, p: float) -> float:
    """The earlier, non-sharp bound: the sharp one weakened by a factor 1/12."""
    return sharp_bound(rho, p) - LOG_TWELVE


def lemma_K(rho: float, p: float, n: int) -> float:
    """Semi-ultra-log-convexity constant K of the kernel rows at lattice point n."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0,1], got {p}")
    if n < 1:
        raise ValueError(f"lattice point must be >= 1, got {n}")
    if p == 1.0:
        return math.inf
    d = rho * (1.0 - p) ** 2 + p
    inv = (n / (n + 1)) * (1.0 - (p / d) ** 2)
    if inv <= 0.0:
        return math.inf
    return 1.0 / inv


def remark_M(a: float, b: float, n: int) -> float:
    """Generalized constant for binomial(k, a) * Poisson(b) rows; reduces to
    lemma_K when a = p and b = rho(1-p). b is accepted on [0, inf)."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must lie in [0,1], got {a}")
    if b < 0:
        raise ValueError(f"b must be non-negative, got {b}")
    if n < 1:
        raise ValueError(f"lattice point must be >= 1, got {n}")
    d = (1.0 - a) * b + a
    if d == 0.0:
        raise ValueError("degenerate input: a = 0 and b = 0")
    inv = (n / (n + 1)) * (1.0 - (a / d) ** 2)
    if inv <= 0.0:
        return math.inf
    return 1.0 / inv


def log_laplacian(h_minus: float, h_mid: float, h_plus: float) -> float:
    """Discrete Laplacian of log h at an interior point: log(h+ h- / h^2)."""
    if h_minus <= 0 or h_mid <= 0 or h_plus <= 0:
        raise ValueError("log_laplacian requires strictly positive values")
    return math.log(h_plus) + math.log(h_minus) - 2.0 * math.log(h_mid)


def log_laplacian_from_logs(lm: float, l0: float, lp: float) -> float:
    """Discrete Laplacian of a sequence given directly in the log domain."""
    return lp + lm - 2.0 * l0


def _entry_log_error(log_mass: float, n_terms: int) -> float:
    # conservative absolute-error bound for a log-domain mass assembled from
    # n_terms log-sum-exp terms of log/lgamma evaluations
    return 2e-14 * (abs(log_mass) + n_terms + 10.0)


@dataclass(frozen=True)
class CaseResult:
    key: tuple
    margin: float
    budget: float
    testable: bool = True

    @property
    def passed(self) -> bool:
        return self.testable and self.margin >= -self.budget


@dataclass
class VerificationReport:
    """Per-case inequality margins over a grid, with verdict and worst case."""

    description: str
    cases: list

    @property
    def testable_cases(self) -> list:
        return [c for c in self.cases if c.testable]

    @property
    def untestable_cases(self) -> list:
        return [c for c in self.cases if not c.testable]

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.testable_cases)

    @property
    def worst_case(self):
        cases = self.testable_cases
        if not cases:
            return None
        return min(cases, key=lambda c: c.margin)

    @property
    def error_budget(self) -> float:
        cases = self.testable_cases
        return max((c.budget for c in cases), default=0.0)

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        return VerificationReport(
            description=self.description, cases=self.cases + other.cases
        )


def _row_margins(
    log_row: np.ndarray,
    n_max: int,
    log_const,
    n_terms: int,
    key_prefix: tuple,
) -> list:
    cases = []
    for n in range(1, n_max + 1):
        lm, l0, lp = log_row[n - 1], log_row[n], log_row[n + 1]
        if min(lm, l0, lp) < LOG_MASS_FLOOR:
            cases.append(CaseResult(key_prefix + (n,), math.nan, 0.0, testable=False))
            continue
        lc = log_const(n)
        margin = lc + lp + lm - 2.0 * l0
        budget = (
            _entry_log_error(lp, n_terms)
            + _entry_log_error(lm, n_terms)
            + 2.0 * _entry_log_error(l0, n_terms)
            + 1e-14
        )
        cases.append(CaseResult(key_prefix + (n,), margin, budget))
    return cases


def verify_kernel_lemma(
    params: QueueParams,
    t: float,
    k_max: int,
    n_max: int,
    deficit: float = 1e-12,
) -> VerificationReport:
    """Check G_k(n)^2 <= K * G_k(n+1) * G_k(n-1) for k <= k_max, 1 <= n <= n_max."""
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    rho, p = params.rho, params.p(t)
    g = kernel_log_matrix(params, t, k_max, n_max + 1)
    cases = []
    for k in range(k_max + 1):
        cases.extend(
            _row_margins(
                g[k],
                n_max,
                lambda n: math.log(lemma_K(rho, p, n)),
                k + 1,
                (rho, p, k),
            )
        )
    return VerificationReport(
        description=f"kernel semi-ultra-log-convexity rho={rho} p={p} "
        f"k<={k_max} n<={n_max}",
        cases=cases,
    )


def verify_generalized(
    a: float,
    b: float,
    k_max: int,
    n_max: int,
    deficit: float = 1e-12,
) -> VerificationReport:
    """Check H_k(n)^2 <= M * H_k(n+1) * H_k(n-1) for H_k = B(k,a) * Poisson(b)."""
    if a == 0.0 and b == 0.0:
        raise ValueError("degenerate input: a = 0 and b = 0")
    cases = []
    for k in range(k_max + 1):
        log_row = convolution_log_matrix(k, a, b, n_max + 1)
        cases.extend(
            _row_margins(
                log_row,
                n_max,
                lambda n: math.log(remark_M(a, b, n)),
                k + 1,
                (a, b, k),
            )
        )
    return VerificationReport(
        description=f"generalized semi-ultra-log-convexity a={a} b={b} "
        f"k<={k_max} n<={n_max}",
        cases=cases,
    )


def _log_semigroup_profile(
    params: QueueParams, t: float, f: Observable, n_hi: int, deficit: float
) -> tuple[np.ndarray, float]:
    logs = np.array(
        [log_semigroup_apply(params, t, f, n, deficit) for n in range(n_hi + 1)]
    )
    if f.is_table:
        n_terms = len(f.support)
        per_value_err = max(
            (_entry_log_error(lv, n_terms) for lv in logs if lv > LOG_ZERO),
            default=0.0,
        )
    else:
        n_terms = 64
        per_value_err = 0.0
        for lv in logs:
            if lv > LOG_ZERO:
                trunc = f.sup * deficit / math.exp(max(lv, LOG_MASS_FLOOR))
                per_value_err = max(
                    per_value_err, _entry_log_error(lv, n_terms) + trunc
                )
    return logs, per_value_err


def verify_theorem(
    params: QueueParams,
    t: float,
    f: Observable,
    n_max: int,
    deficit: float = 1e-12,
    against: str = "sharp",
) -> VerificationReport:
    """Check the semi-log-convexity of the semigroup: the discrete Laplacian
    of log A_t f at every 1 <= n <= n_max dominates the (sharp or 1/12) bound."""
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    if against not in ("sharp", "glmrs"):
        raise ValueError(f"unknown bound {against!r}")
    rho, p = params.rho, params.p(t)
    bound = sharp_bound(rho, p) if against == "sharp" else glmrs_bound(rho, p)
    logs, per_value_err = _log_semigroup_profile(params, t, f, n_max + 1, deficit)
    cases = []
    for n in range(1, n_max + 1):
        lm, l0, lp = logs[n - 1], logs[n], logs[n + 1]
        if min(lm, l0, lp) < LOG_MASS_FLOOR + math.log(max(f.sup, 1e-300)):
            cases.append(
                CaseResult((rho, p, n), math.nan, 0.0, testable=False)
            )
            continue
        margin = (lp + lm - 2.0 * l0) - bound
        budget = 4.0 * per_value_err + 1e-14
        cases.append(CaseResult((rho, p, n), margin, budget))
    return VerificationReport(
        description=f"semigroup semi-log-convexity ({against}) rho={rho} p={p} "
        f"n<={n_max}",
        cases=cases,
    )


def sharpness_decay(
    params: QueueParams,
    f: Observable,
    n: int,
    t_sequence,
    deficit: float = 1e-12,
) -> list:
    """Magnitudes of both sides of the sharp inequality along increasing t;
    both vanish in the long-time limit for bounded observables."""
    if n < 1:
        raise ValueError(f"lattice point must be >= 1, got {n}")
    out = []
    for t in t_sequence:
        lm = log_semigroup_apply(params, t, f, n - 1, deficit)
        l0 = log_semigroup_apply(params, t, f, n, deficit)
        lp = log_semigroup_apply(params, t, f, n + 1, deficit)
        lhs = abs(lp + lm - 2.0 * l0)
        rhs = abs(sharp_bound(params.rho, params.p(t)))
        out.append((t, lhs, rhs))
    return out
