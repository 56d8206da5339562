"""Mann-Kendall trend statistics and hypothesis tests.

Implements the pair-sign statistic S, Mann-Kendall's tau, the classical
normal-approximation test, and the two variance-corrected variants for
autocorrelated data:

* Yue-Wang: effective-sample-size correction from the autocorrelation of
  the Theil-Sen-detrended values,
      n/n* = 1 + (2/n) * sum_i (n-i) rho(i),
  by default using only lag 1.
* Hamed-Rao: rank-based correction from the autocorrelation of the ranks
  of the detrended values,
      n/n* = 1 + 2/(n(n-1)(n-2)) * sum_i (n-i)(n-i-1)(n-i-2) rho_rank(i),
  by default using lags 1..3; a significance-filtered lag selection is
  also available.

An exact finite-sample null distribution of S under the i.i.d.
hypothesis is provided through an inversion-count recursion, usable as
an oracle up to n = 60.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import norm, rankdata

from .errors import DegenerateError, LengthMismatch, RangeError, TieError
from .series import as_values, detrend_linear, ensure_untied

__all__ = [
    "MKOutcome",
    "LagPolicy",
    "NullDistribution",
    "s_statistic",
    "mk_tau",
    "kendall_tau",
    "var_s_iid",
    "z_statistic",
    "p_two_tailed",
    "normalized_tau",
    "ess_ratio_yue_wang",
    "ess_ratio_hamed_rao",
    "mk_test",
    "exact_null_distribution",
]

METHODS = ("original", "yue_wang", "hamed_rao")

# An ESS ratio at or below zero (possible when strongly negative
# coefficients are selected) would make the corrected variance
# meaningless; it is clamped here and the outcome flagged.
ESS_FLOOR = 1e-4


@dataclass(frozen=True)
class LagPolicy:
    """Which autocorrelation lags enter an effective-sample-size correction.

    ``fixed(k)`` uses lags ``1..k``; ``significant(level)`` keeps every lag
    ``i`` in ``1..n-1`` whose coefficient exceeds the two-sided normal
    threshold ``z_{1-level/2}/sqrt(n)`` in absolute value.
    """

    mode: str
    max_lag: int = 1
    level: float = 0.05

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "significant"):
            raise RangeError(f"unknown lag policy mode {self.mode!r}")
        if self.mode == "fixed" and self.max_lag < 1:
            raise RangeError(f"max_lag must be >= 1, got {self.max_lag}")
        if self.mode == "significant" and not 0.0 < self.level < 1.0:
            raise RangeError(f"significance level must be in (0,1), got {self.level}")

    @classmethod
    def fixed(cls, max_lag: int) -> "LagPolicy":
        return cls("fixed", max_lag=max_lag)

    @classmethod
    def significant(cls, level: float = 0.05) -> "LagPolicy":
        return cls("significant", level=level)


DEFAULT_LAG_POLICIES = {
    "yue_wang": LagPolicy.fixed(1),
    "hamed_rao": LagPolicy.fixed(3),
}


@dataclass(frozen=True)
class MKOutcome:
    """Full result of one Mann-Kendall trend test.

    Attributes:
        s: Pair-sign statistic.
        tau: ``s`` normalized by the number of pairs, in [-1, 1].
        var_s: Variance of S used by the test (ESS-corrected for the
            modified methods).
        ess_ratio: Variance inflation factor n/n* (1 for the original test).
        z: Standardized statistic with continuity correction.
        p: Two-tailed p-value.
        trend: "increasing", "decreasing" or "no_trend" at the test level.
        method: One of ``original``, ``yue_wang``, ``hamed_rao``.
        ess_clamped: True when the raw ESS ratio fell below ``ESS_FLOOR``
            and was clamped.
    """

    s: int
    tau: float
    var_s: float
    ess_ratio: float
    z: float
    p: float
    trend: str
    method: str
    ess_clamped: bool = False


def _pair_sign_sum(x: np.ndarray) -> int:
    i, j = np.triu_indices(x.size, k=1)
    return int(np.sign(x[j] - x[i]).sum())


def s_statistic(series) -> int:
    """Pair-sign statistic S: the number of increasing minus decreasing pairs.

    Raises:
        TieError: if two values coincide.
    """
    x = as_values(series)
    ensure_untied(x)
    return _pair_sign_sum(x)


def mk_tau(series) -> float:
    """Mann-Kendall's tau: S divided by the number of pairs."""
    x = as_values(series)
    ensure_untied(x)
    n = x.size
    return _pair_sign_sum(x) / (n * (n - 1) // 2)


def kendall_tau(x, y) -> float:
    """Kendall rank correlation between two equally long, tie-free series."""
    xv = as_values(x)
    yv = as_values(y)
    if xv.size != yv.size:
        raise LengthMismatch(f"series lengths differ: {xv.size} vs {yv.size}")
    ensure_untied(xv)
    ensure_untied(yv)
    i, j = np.triu_indices(xv.size, k=1)
    concordance = np.sign(xv[j] - xv[i]) * np.sign(yv[j] - yv[i])
    return float(concordance.sum()) / (xv.size * (xv.size - 1) // 2)


def var_s_iid(n: int) -> float:
    """Variance of S for n i.i.d. observations: n(n-1)(2n+5)/18."""
    if n < 2:
        raise RangeError(f"need n >= 2, got {n}")
    return n * (n - 1) * (2 * n + 5) / 18.0


def z_statistic(s: int, var_s: float) -> float:
    """Standardized statistic with the +-1 continuity correction.

    S moves in steps of 2, so the tail is taken to start half a step in:
    (s-1)/sqrt(var) for s>0, (s+1)/sqrt(var) for s<0, and 0 at s=0.
    """
    if not var_s > 0:
        raise RangeError(f"var_s must be positive, got {var_s}")
    if s == 0:
        return 0.0
    shift = -1 if s > 0 else 1
    return (s + shift) / math.sqrt(var_s)


def p_two_tailed(z: float) -> float:
    """Two-tailed normal p-value, 2*(1 - Phi(|z|))."""
    return math.erfc(abs(z) / math.sqrt(2.0))


def normalized_tau(series) -> float:
    """Tau divided by its i.i.d. null standard deviation, i.e. S/sqrt(V(S)).

    No continuity correction; asymptotically standard normal for i.i.d.
    inputs (approximately sqrt(9n/4)*tau).
    """
    x = as_values(series)
    ensure_untied(x)
    return _pair_sign_sum(x) / math.sqrt(var_s_iid(x.size))


def _mk_tau_rows(matrix: np.ndarray) -> np.ndarray:
    """Mann-Kendall tau of every row of a (batch, n) matrix.

    Vectorized fast path for ensemble work; identical per row to
    :func:`mk_tau`.
    """
    x = np.asarray(matrix, dtype=np.float64)
    n = x.shape[-1]
    if n < 2:
        raise RangeError(f"need at least 2 columns, got {n}")
    sorted_rows = np.sort(x, axis=-1)
    if np.any(sorted_rows[:, 1:] == sorted_rows[:, :-1]):
        raise TieError("a row contains tied values")
    i, j = np.triu_indices(n, k=1)
    s = np.sign(x[:, j] - x[:, i]).sum(axis=-1)
    return s / (n * (n - 1) // 2)


# ---------------------------------------------------------------------------
# Effective-sample-size corrections
# ---------------------------------------------------------------------------


def _acf(values: np.ndarray, lags) -> dict[int, float]:
    """Biased single-mean autocorrelation at each requested lag."""
    dev = values - values.mean()
    den = float(dev @ dev)
    if den == 0.0:
        raise DegenerateError("autocorrelation undefined for constant values")
    return {lag: float(dev[:-lag] @ dev[lag:]) / den for lag in lags}


def _select_lags(base: np.ndarray, policy: LagPolicy) -> dict[int, float]:
    n = base.size
    if policy.mode == "fixed":
        if policy.max_lag >= n:
            raise RangeError(f"max_lag must be < n = {n}, got {policy.max_lag}")
        return _acf(base, range(1, policy.max_lag + 1))
    rho = _acf(base, range(1, n))
    threshold = float(norm.ppf(1.0 - policy.level / 2.0)) / math.sqrt(n)
    return {lag: r for lag, r in rho.items() if abs(r) > threshold}


def _ess_ratio(x: np.ndarray, method: str, policy: LagPolicy) -> tuple[float, bool]:
    n = x.size
    detrended = detrend_linear(x)
    if method == "hamed_rao":
        # Theil-Sen detrending routinely leaves exactly tied values (the
        # median-defining pair collapses), so midranks are used here.
        base = rankdata(detrended, method="average")
    else:
        base = detrended
    rho = _select_lags(base, policy)
    if method == "yue_wang":
        correction = (2.0 / n) * sum((n - lag) * r for lag, r in rho.items())
    else:
        correction = (2.0 / (n * (n - 1) * (n - 2))) * sum(
            (n - lag) * (n - lag - 1) * (n - lag - 2) * r for lag, r in rho.items()
        )
    ratio = 1.0 + correction
    if ratio < ESS_FLOOR:
        return ESS_FLOOR, True
    return ratio, False


def ess_ratio_yue_wang(series, policy: LagPolicy | None = None) -> float:
    """Variance inflation n/n* from the detrended-series autocorrelation.

    Default policy is ``fixed(1)``. The result is floored at ``ESS_FLOOR``.
    """
    x = as_values(series, min_len=3)
    return _ess_ratio(x, "yue_wang", policy or DEFAULT_LAG_POLICIES["yue_wang"])[0]


def ess_ratio_hamed_rao(series, policy: LagPolicy | None = None) -> float:
    """Variance inflation n/n* from the rank autocorrelation of the detrended series.

    Default policy is ``fixed(3)``. The result is floored at ``ESS_FLOOR``.
    """
    x = as_values(series, min_len=4)
    return _ess_ratio(x, "hamed_rao", policy or DEFAULT_LAG_POLICIES["hamed_rao"])[0]


def mk_test(series, method: str = "original", policy: LagPolicy | None = None,
            level: float = 0.05) -> MKOutcome:
    """Run one Mann-Kendall trend test.

    Args:
        series: Input series (n >= 4; the normal approximation is
            considered reliable from n = 10).
        method: ``original``, ``yue_wang`` or ``hamed_rao``.
        policy: Lag selection for the modified methods; defaults to
            ``fixed(1)`` for Yue-Wang and ``fixed(3)`` for Hamed-Rao.
        level: Two-sided significance level used to label the trend.

    Raises:
        TieError: on tied values.
        DegenerateError: when a modified method sees a constant detrended
            series.
    """
    if method not in METHODS:
        raise RangeError(f"unknown method {method!r}; expected one of {METHODS}")
    if not 0.0 < level < 1.0:
        raise RangeError(f"level must be in (0,1), got {level}")
    x = as_values(series, min_len=4)
    ensure_untied(x)
    n = x.size
    s = _pair_sign_sum(x)
    tau = s / (n * (n - 1) // 2)
    if method == "original":
        ratio, clamped = 1.0, False
    else:
        ratio, clamped = _ess_ratio(x, method, policy or DEFAULT_LAG_POLICIES[method])
    var_s = var_s_iid(n) * ratio
    z = z_statistic(s, var_s)
    p = p_two_tailed(z)
    if p < level and s > 0:
        trend = "increasing"
    elif p < level and s < 0:
        trend = "decreasing"
    else:
        trend = "no_trend"
    return MKOutcome(s=s, tau=tau, var_s=var_s, ess_ratio=ratio, z=z, p=p,
                     trend=trend, method=method, ess_clamped=clamped)


# ---------------------------------------------------------------------------
# Exact i.i.d. null distribution of S
# ---------------------------------------------------------------------------

MAX_EXACT_N = 60


@dataclass(frozen=True, eq=False)
class NullDistribution:
    """Exact pmf of S over uniformly random rankings of n observations.

    ``support`` runs from -C(n,2) to +C(n,2) in steps of 2 and
    ``probabilities`` sum to one; the pmf is symmetric about zero.
    """

    n: int
    support: np.ndarray
    probabilities: np.ndarray

    def variance(self) -> float:
        return math.fsum(p * s * s for s, p in zip(self.support.tolist(),
                                                   self.probabilities.tolist()))

    def prob_geq(self, s: int) -> float:
        """P(S >= s), exact tail sum."""
        mask = self.support >= s
        return math.fsum(self.probabilities[mask].tolist())

    def to_csv(self, path) -> None:
        lines = ["s,probability"]
        lines.extend(f"{int(s)},{p!r}" for s, p in zip(self.support.tolist(),
                                                       self.probabilities.tolist()))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _inversion_counts(n: int) -> list[int]:
    """Number of permutations of n elements with k inversions, k = 0..C(n,2).

    Classical recursion over exact integers: appending the m-th element
    adds 0..m-1 inversions, so each row is a sliding-window sum of the
    previous one.
    """
    counts = [1]
    for m in range(2, n + 1):
        prefix = [0]
        for c in counts:
            prefix.append(prefix[-1] + c)
        top = len(counts) - 1
        counts = [
            prefix[min(k, top) + 1] - prefix[max(0, k - m + 1)]
            for k in range(top + m)
        ]
    return counts


def exact_null_distribution(n: int) -> NullDistribution:
    """Exact i.i.d. null distribution of S for 2 <= n <= 60.

    S = C(n,2) - 2k where k is the inversion count of the ranking, so
    P(S) follows from the inversion-count recursion divided by n!.
    """
    if not 2 <= n <= MAX_EXACT_N:
        raise RangeError(f"n must be in 2..{MAX_EXACT_N}, got {n}")
    counts = _inversion_counts(n)
    total = math.factorial(n)
    max_s = n * (n - 1) // 2
    support = np.arange(-max_s, max_s + 1, 2, dtype=np.int64)
    probabilities = np.array(
        [counts[(max_s - int(s)) // 2] / total for s in support], dtype=np.float64
    )
    return NullDistribution(n=n, support=support, probabilities=probabilities)
