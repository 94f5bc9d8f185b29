"""Null distributions and p-values.

Monte Carlo tables for the higher criticism and likelihood-ratio statistics,
limiting distributions for Wilcoxon and one-sided KS, and the exact negative
hypergeometric null for the tail run.  Rank statistics are distribution-free
under H0 for continuous data, so their null tables are simulated from
Uniform(0,1) pooled samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate, special

from . import statistics as st
from .distributions import GGParams, MixtureAlt, gg_cdf, gg_pdf, gg_sample

CACHE_FORMAT_VERSION = 1

_TINY_P = 1e-300


@dataclass(frozen=True)
class NullTable:
    """Sorted Monte Carlo draws of a statistic under H0."""

    statistic: str
    m: int
    n: int
    draws: np.ndarray
    seed: int

    @property
    def reps(self) -> int:
        return int(self.draws.size)


@dataclass(frozen=True)
class PValue:
    p: float
    method: str  # monte-carlo | normal-approx | smirnov-limit | exact

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise ValueError(f"p-value must lie in (0, 1], got {self.p}")


def _rank_stat_from_uniform(statistic: str, m: int, n: int, rng) -> float:
    # retry on the (astronomically rare) float collision so long simulation
    # runs never abort on a tie
    for _ in range(100):
        pooled = rng.random(m + n)
        try:
            xi = st.pooled_indicator(pooled[:m], pooled[m:])
        except st.TiesError:
            continue
        break
    else:  # pragma: no cover
        raise st.TiesError("persistent ties in uniform draws")
    if statistic == st.HC:
        return st.hc_from_indicator(xi, m, n)
    if statistic == st.WILCOXON:
        return float(st.wilcoxon_from_indicator(xi, m, n))
    if statistic == st.KS:
        return st.ks_from_indicator(xi, m, n)
    if statistic == st.TAILRUN:
        return float(st.tailrun_from_indicator(xi, m, n))
    raise ValueError(f"unknown rank statistic {statistic!r}")


def mc_null_table(
    statistic: str,
    m: int,
    n: int,
    reps: int,
    master_seed: int,
    model: tuple[GGParams, MixtureAlt] | None = None,
) -> NullTable:
    """Simulate the null distribution of a statistic.

    Replicate k draws from a stream derived from (master_seed, k), so the
    table is identical regardless of evaluation order.
    """
    if reps < 100:
        raise ValueError("reps must be at least 100")
    if statistic == st.LRT and model is None:
        raise ValueError("LRT calibration requires the model (GGParams, MixtureAlt)")
    draws = np.empty(reps)
    for k in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, k]))
        if statistic == st.LRT:
            p, alt = model
            y = gg_sample(n, p, rng)
            draws[k] = st.lrt_stat(y, p, alt).value
        else:
            draws[k] = _rank_stat_from_uniform(statistic, m, n, rng)
    draws.sort()
    return NullTable(statistic=statistic, m=m, n=n, draws=draws, seed=master_seed)


def mc_pvalue(value: float, table: NullTable) -> PValue:
    """Add-one Monte Carlo p-value: (1 + #{draws >= value}) / (R + 1)."""
    r = table.reps
    n_ge = r - int(np.searchsorted(table.draws, value, side="left"))
    return PValue(p=(1 + n_ge) / (r + 1), method="monte-carlo")


def mc_pvalues(values: np.ndarray, table: NullTable) -> np.ndarray:
    """Vectorized add-one Monte Carlo p-values."""
    r = table.reps
    n_ge = r - np.searchsorted(table.draws, values, side="left")
    return (1 + n_ge) / (r + 1)


def wilcoxon_pvalue(u, m: int, n: int) -> PValue:
    """Upper-tail normal approximation with continuity correction."""
    if not 0 <= u <= m * n:
        raise ValueError(f"U must lie in [0, mn], got {u}")
    sd = math.sqrt(m * n * (m + n + 1) / 12.0)
    z = (u - 0.5 - m * n / 2.0) / sd
    return PValue(p=max(float(special.ndtr(-z)), _TINY_P), method="normal-approx")


def wilcoxon_exact_null(m: int, n: int) -> np.ndarray:
    """Exact null pmf of U over {0, ..., mn} by the rank-sum recursion."""
    if m + n > 24:
        raise ValueError("exact enumeration limited to m + n <= 24")
    if m < 1 or n < 1:
        raise ValueError("m and n must be at least 1")
    # counts[i, j, u]: arrangements of i X's and j Y's with U = u
    top = m * n
    counts = np.zeros((m + 1, n + 1, top + 1))
    counts[0, :, 0] = 1.0
    counts[:, 0, 0] = 1.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            counts[i, j, :] = counts[i, j - 1, :]
            counts[i, j, j:] += counts[i - 1, j, : top + 1 - j]
    return counts[m, n, :] / math.comb(m + n, n)


def _mixture_cdf(x, p: GGParams, alt: MixtureAlt):
    return (1 - alt.epsilon) * gg_cdf(x, p) + alt.epsilon * gg_cdf(x - alt.mu, p)


def _mixture_pdf(x, p: GGParams, alt: MixtureAlt):
    return (1 - alt.epsilon) * gg_pdf(x, p) + alt.epsilon * gg_pdf(x - alt.mu, p)


def _quad_full_line(fn, p: GGParams, alt: MixtureAlt) -> float:
    # split around both mixture components so quad never misses a bump
    s = p.scale
    pts = sorted({-alt.mu - 10 * s, -10 * s, 0.0, alt.mu / 2, alt.mu, alt.mu + 10 * s})
    segments = [-np.inf, *pts, np.inf]
    total = 0.0
    for a, b in zip(segments[:-1], segments[1:]):
        val, _ = integrate.quad(fn, a, b, epsabs=1e-10, epsrel=1e-8, limit=200)
        total += val
    return total


def wilcoxon_alt_moments(
    p: GGParams, alt: MixtureAlt, m: int, n: int
) -> tuple[float, float]:
    """Mean and variance of U/mn under the mixture alternative.

    The three cross-moments of (F, G) are evaluated by adaptive quadrature
    and assembled with the classical large-sample variance identity.
    """
    f_dg = _quad_full_line(
        lambda x: gg_cdf(x, p) * _mixture_pdf(x, p, alt), p, alt
    )
    f2_dg = _quad_full_line(
        lambda x: gg_cdf(x, p) ** 2 * _mixture_pdf(x, p, alt), p, alt
    )
    bar_g2_df = _quad_full_line(
        lambda x: (1.0 - _mixture_cdf(x, p, alt)) ** 2 * gg_pdf(x, p), p, alt
    )
    lam = 0.5 - f_dg
    eps1 = 1.0 / 3.0 - f2_dg
    eps2 = 1.0 / 3.0 - bar_g2_df
    var = (
        (m + n + 1) / 12.0
        + (m - 1) * (lam - eps1)
        + (n - 1) * (lam - eps2)
        - lam**2 * (m + n - 1)
    ) / (m * n)
    return f_dg, var


def ks_pvalue(lam: float) -> PValue:
    """One-sided Smirnov limit: p = exp(-2 * lambda**2) for lambda > 0."""
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    if lam <= 0:
        return PValue(p=1.0, method="smirnov-limit")
    return PValue(p=max(math.exp(-2.0 * lam * lam), _TINY_P), method="smirnov-limit")


def _tailrun_log_sf(l: int, m: int, n: int) -> float:
    # log P0(L* >= l) = log prod_{j=0}^{l-1} (n-j)/(m+n-j)
    return (
        special.gammaln(n + 1)
        - special.gammaln(n - l + 1)
        + special.gammaln(m + n - l + 1)
        - special.gammaln(m + n + 1)
    )


def tailrun_pvalue(l: int, m: int, n: int) -> PValue:
    """Exact P0(L* >= l) from the negative hypergeometric null."""
    if not 0 <= l <= n:
        raise ValueError(f"l must lie in [0, {n}], got {l}")
    if l == 0:
        return PValue(p=1.0, method="exact")
    return PValue(p=max(math.exp(_tailrun_log_sf(l, m, n)), _TINY_P), method="exact")


def tailrun_pvalues(ls: np.ndarray, m: int, n: int) -> np.ndarray:
    """Vectorized exact tail-run p-values."""
    ls = np.asarray(ls, dtype=int)
    log_sf = (
        special.gammaln(n + 1)
        - special.gammaln(n - ls + 1)
        + special.gammaln(m + n - ls + 1)
        - special.gammaln(m + n + 1)
    )
    return np.where(ls == 0, 1.0, np.maximum(np.exp(log_sf), _TINY_P))


def tailrun_null_pmf(m: int, n: int) -> np.ndarray:
    """Exact null pmf of the tail run over {0, ..., n}."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be at least 1")
    sf = np.array([math.exp(_tailrun_log_sf(l, m, n)) for l in range(n + 1)] + [0.0])
    return sf[:-1] - sf[1:]


def save_null_table(table: NullTable, path, force: bool = False) -> None:
    """Write a null-table cache file (bit-exact round trip, versioned)."""
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists; pass force=True to overwrite")
    np.savez(
        path,
        version=np.int64(CACHE_FORMAT_VERSION),
        statistic=np.str_(table.statistic),
        m=np.int64(table.m),
        n=np.int64(table.n),
        reps=np.int64(table.reps),
        seed=np.int64(table.seed),
        draws=table.draws,
    )


def load_null_table(path) -> NullTable:
    with np.load(Path(path)) as data:
        version = int(data["version"])
        if version != CACHE_FORMAT_VERSION:
            raise ValueError(f"unsupported cache format version {version}")
        return NullTable(
            statistic=str(data["statistic"]),
            m=int(data["m"]),
            n=int(data["n"]),
            draws=data["draws"].copy(),
            seed=int(data["seed"]),
        )


def cache_key(statistic: str, m: int, n: int, reps: int, seed: int) -> str:
    return f"{statistic}_m{m}_n{n}_r{reps}_s{seed}.npz"
