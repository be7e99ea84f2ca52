"""Measurement-accuracy statistics: error summaries, Welch's t-test,
two-factor ANOVA with replication, and the t/F critical values they need.

The distribution functions are built on a regularized incomplete beta
function evaluated by the standard continued fraction, so the module has no
dependency beyond ``math``/``numpy``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError


# ---------------------------------------------------------------------------
# special functions

def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) to <= 1e-10 absolute error.

    Continued-fraction evaluation (modified Lentz) with the usual symmetry
    switch to the fast-converging region.
    """
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    if x < 0.0 or x > 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(ln_front) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(ln_front) * _beta_cf(b, a, 1.0 - x) / b


def _beta_cf(a: float, b: float, x: float) -> float:
    tiny = 1e-300
    eps = 1e-15
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 500):
        m2 = 2 * m
        num = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + num * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + num / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        num = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + num * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + num / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def student_t_cdf(t: float, df: float) -> float:
    """CDF of Student's t with (possibly fractional) df."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def f_cdf(x: float, df1: float, df2: float) -> float:
    """CDF of the F distribution."""
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0.0:
        return 0.0
    return regularized_incomplete_beta(df1 / 2.0, df2 / 2.0, df1 * x / (df1 * x + df2))


def _invert_monotone_cdf(cdf, p: float, lo: float, hi: float) -> float:
    """Bisection on a monotone CDF until |cdf(q) - p| <= 1e-9."""
    # expand the bracket until it contains p
    for _ in range(200):
        if cdf(hi) >= p:
            break
        hi *= 2.0
    else:
        raise ArithmeticError("quantile bracket expansion failed")
    for _ in range(200):
        if cdf(lo) <= p:
            break
        lo = lo * 2.0 if lo < 0 else lo / 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = cdf(mid)
        if abs(val - p) <= 1e-12 or (hi - lo) <= 1e-13 * max(1.0, abs(mid)):
            return mid
        if val < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def t_quantile(p: float, df: float) -> float:
    """Inverse Student-t CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if df <= 0:
        raise ValueError("df must be positive")
    if p == 0.5:
        return 0.0
    return _invert_monotone_cdf(lambda t: student_t_cdf(t, df), p, -2.0, 2.0)


def f_quantile(p: float, df1: float, df2: float) -> float:
    """Inverse F CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    return _invert_monotone_cdf(lambda x: f_cdf(x, df1, df2), p, 0.0, 4.0)


# ---------------------------------------------------------------------------
# result records

@dataclass(frozen=True)
class Sample:
    """A labeled sample of real-valued measurements."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def n(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def sd(self) -> float:
        if self.n < 2:
            raise DegenerateInputError("sample standard deviation needs n >= 2")
        return float(np.std(self.values, ddof=1))


@dataclass(frozen=True)
class SummaryStats:
    """Mean / sd / n triple, for tests driven from published summaries."""

    mean: float
    sd: float
    n: int


@dataclass(frozen=True)
class ErrorStats:
    mse: float
    std_dev: float
    n: int


@dataclass(frozen=True)
class TTestResult:
    mean_a: float
    mean_b: float
    t_stat: float
    df: float
    t_crit_two_tail: float
    p_two_tail: float
    alpha: float


@dataclass(frozen=True)
class AnovaSource:
    name: str
    ss: float
    df: float
    ms: float
    f: float
    p_value: float
    f_critical: float


@dataclass(frozen=True)
class AnovaResult:
    sample: AnovaSource
    factor: AnovaSource
    interaction: AnovaSource
    within_ss: float
    within_df: float
    within_ms: float
    total_ss: float
    alpha: float


# ---------------------------------------------------------------------------
# tests and summaries

def error_stats(measured: Sample, actual: float) -> ErrorStats:
    """MSE against the true value plus the sample (n-1) standard deviation."""
    if measured.n < 2:
        raise DegenerateInputError("error_stats needs n >= 2")
    vals = np.asarray(measured.values)
    mse = float(np.mean((vals - actual) ** 2))
    return ErrorStats(mse=mse, std_dev=measured.sd(), n=measured.n)


def _as_summary(sample) -> SummaryStats:
    if isinstance(sample, SummaryStats):
        return sample
    if isinstance(sample, Sample):
        return SummaryStats(sample.mean(), sample.sd(), sample.n)
    raise TypeError("expected Sample or SummaryStats")


def welch_t_test(a, b, alpha: float = 0.01) -> TTestResult:
    """Two-sample t-test assuming unequal variances.

    ``a`` and ``b`` may be :class:`Sample` or :class:`SummaryStats`; the
    Welch-Satterthwaite df is kept fractional.
    """
    sa, sb = _as_summary(a), _as_summary(b)
    if sa.n < 2 or sb.n < 2:
        raise DegenerateInputError("welch_t_test needs n >= 2 in both samples")
    if sa.sd <= 0 or sb.sd <= 0:
        raise DegenerateInputError("welch_t_test needs positive variance in both samples")
    va, vb = sa.sd ** 2 / sa.n, sb.sd ** 2 / sb.n
    t = (sa.mean - sb.mean) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (sa.n - 1) + vb ** 2 / (sb.n - 1))
    p = 2.0 * (1.0 - student_t_cdf(abs(t), df))
    t_crit = t_quantile(1.0 - alpha / 2.0, df)
    return TTestResult(
        mean_a=sa.mean, mean_b=sb.mean, t_stat=t, df=df,
        t_crit_two_tail=t_crit, p_two_tail=p, alpha=alpha,
    )


def two_factor_anova_rep(data, alpha: float = 0.01) -> AnovaResult:
    """Two-factor ANOVA with replication on a (rows, cols, n) data cube.

    Rows are the samples (methods), columns the second factor
    (e.g. width/height); every cell must hold the same number of replicates.
    """
    try:
        arr = np.asarray(data, dtype=float)
    except ValueError as exc:
        raise DegenerateInputError(f"unbalanced design: {exc}") from exc
    if arr.ndim != 3:
        raise DegenerateInputError("unbalanced design: data must be a (rows, cols, replicates) cube")
    r, c, n = arr.shape
    if n < 2:
        raise DegenerateInputError("two_factor_anova_rep needs n >= 2 replicates per cell")
    grand = arr.mean()
    row_means = arr.mean(axis=(1, 2))
    col_means = arr.mean(axis=(0, 2))
    cell_means = arr.mean(axis=2)

    ss_sample = c * n * float(np.sum((row_means - grand) ** 2))
    ss_factor = r * n * float(np.sum((col_means - grand) ** 2))
    inter = cell_means - row_means[:, None] - col_means[None, :] + grand
    ss_inter = n * float(np.sum(inter ** 2))
    ss_within = float(np.sum((arr - cell_means[:, :, None]) ** 2))
    ss_total = float(np.sum((arr - grand) ** 2))

    df_sample, df_factor = r - 1.0, c - 1.0
    df_inter = (r - 1.0) * (c - 1.0)
    df_within = r * c * (n - 1.0)
    ms_within = ss_within / df_within

    def source(name, ss, df):
        ms = ss / df
        f = ms / ms_within
        return AnovaSource(
            name=name, ss=ss, df=df, ms=ms, f=f,
            p_value=1.0 - f_cdf(f, df, df_within),
            f_critical=f_quantile(1.0 - alpha, df, df_within),
        )

    return AnovaResult(
        sample=source("sample", ss_sample, df_sample),
        factor=source("factor", ss_factor, df_factor),
        interaction=source("interaction", ss_inter, df_inter),
        within_ss=ss_within, within_df=df_within, within_ms=ms_within,
        total_ss=ss_total, alpha=alpha,
    )
