"""Gapped-block exceedance point process and Poisson-limit diagnostics.

Length-r blocks separated by length-p gaps; a block emits a point (mark 1)
at its normalized right endpoint when any sample inside it exceeds the
threshold vector. Gap samples never influence the pattern.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from subgauss.evt import _exceed_indicator
from subgauss.gausslin import SpecError
from subgauss.m4 import ThresholdVector


@dataclass(frozen=True)
class GapConfig:
    r: int          # block length
    p: int          # gap length
    m: int = 0      # window of the underlying subordination

    def __post_init__(self):
        if self.r <= self.m:
            raise SpecError("block length r must exceed the window m")
        if self.p < self.m:
            raise SpecError("gap length p must be at least the window m")


@dataclass(frozen=True)
class PointPattern:
    """Sorted exceedance-block points (normalized time, mark 1) on [0, T]."""

    times: np.ndarray
    horizon: float = 1.0
    blocks: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size and (np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] > self.horizon):
            raise SpecError("times must be strictly increasing within [0, T]")
        if self.blocks is None:
            object.__setattr__(self, "blocks", np.arange(1, len(t) + 1))

    @property
    def count(self) -> int:
        return len(self.times)


def gapped_blocks(Y, u: ThresholdVector, cfg: GapConfig) -> PointPattern:
    """Extract the exceedance-block pattern from one path.

    Block j (1-based) covers samples (j-1)(r+p)+1 .. jr+(j-1)p in paper
    time, i.e. 0-based rows (j-1)(r+p) .. (j-1)(r+p)+r-1; a point lands at
    j(r+p)/n when the block contains an exceedance. The trailing partial
    block is dropped.
    """
    e = _exceed_indicator(Y, u)
    n = len(e)
    r, p = cfg.r, cfg.p
    if n < r + p:
        raise SpecError("path shorter than one block-gap segment")
    nblocks = n // (r + p)
    trimmed = e[: nblocks * (r + p)].reshape(nblocks, r + p)
    hit = np.any(trimmed[:, :r], axis=1)
    j = np.nonzero(hit)[0] + 1
    times = j * (r + p) / n
    return PointPattern(times=times, horizon=1.0, blocks=j)


def lambda_rp(theta_list, theta_m: float, G: float, cfg: GapConfig) -> float:
    """Poisson intensity of the gapped-block process:
    [(r-m)/(r+p) * theta_m + R/(r+p)] * (-log G), R = sum of theta_0..theta_{m-1}.

    theta_list carries theta_0..theta_m; only the first m entries enter R.
    The value is normalized to be nonnegative (the source formula carries a
    leading minus against log G < 0).
    """
    theta_list = list(theta_list)
    if len(theta_list) != cfg.m + 1:
        raise SpecError(f"need theta_0..theta_{cfg.m} ({cfg.m + 1} values)")
    if not all(0.0 <= t <= 1.0 for t in theta_list) or not 0.0 <= theta_m <= 1.0:
        raise SpecError("theta values must lie in [0, 1]")
    if not 0.0 < G < 1.0:
        raise SpecError("G must lie in (0, 1)")
    R = float(np.sum(theta_list[: cfg.m]))
    r, p, m = cfg.r, cfg.p, cfg.m
    return ((r - m) / (r + p) * theta_m + R / (r + p)) * (-np.log(G))


@dataclass(frozen=True)
class PoissonReport:
    mean_count: float        # points per unit normalized time
    dispersion_index: float  # Var/Mean of counts on [0, 1]
    ks_interarrival: float   # KS distance, pooled gaps vs Exp(lambda_target)
    chi2_counts: float       # chi-square stat, binned counts vs Poisson
    chi2_pvalue: float
    degenerate: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "mean_count": self.mean_count,
                "dispersion_index": self.dispersion_index,
                "ks_interarrival": self.ks_interarrival,
                "chi2_counts": self.chi2_counts,
                "chi2_pvalue": self.chi2_pvalue,
                "degenerate": self.degenerate,
            }
        )


def poisson_diagnostics(patterns, lambda_target: float,
                        bins: int = 10) -> PoissonReport:
    """Poisson goodness diagnostics over replicated patterns on [0, 1]."""
    patterns = list(patterns)
    if len(patterns) < 200:
        raise SpecError("need at least 200 replications")
    counts = np.array([p.count for p in patterns], dtype=float)
    mean = float(np.mean(counts))
    if mean == 0.0:
        return PoissonReport(0.0, 0.0, 0.0, 0.0, 1.0, degenerate=True)
    dispersion = float(np.var(counts, ddof=1) / mean)

    # Concatenate the replications onto one long timeline: independent
    # Poisson paths glued end to end form a single Poisson process, so the
    # pooled gaps are exactly exponential under the null. Per-path gaps
    # would be right-censored by the horizon and biased small.
    pooled = np.concatenate(
        [i * p.horizon + p.times for i, p in enumerate(patterns) if p.count]
    )
    inter = np.diff(np.concatenate([[0.0], pooled]))
    ks = float(stats.kstest(inter, "expon",
                            args=(0.0, 1.0 / lambda_target)).statistic)

    # per-bin occupancy counts pooled over replications vs Poisson(lam*binwidth)
    binwidth = 1.0 / bins
    per_bin = np.concatenate(
        [np.bincount(np.minimum((p.times / binwidth).astype(int), bins - 1),
                     minlength=bins) for p in patterns]
    )
    lam_bin = lambda_target * binwidth
    kmax = int(stats.poisson.ppf(1.0 - 1e-6, lam_bin)) + 1
    obs = np.bincount(np.minimum(per_bin, kmax), minlength=kmax + 1).astype(float)
    pmf = stats.poisson.pmf(np.arange(kmax), lam_bin)
    expected = np.concatenate([pmf, [1.0 - pmf.sum()]]) * len(per_bin)
    # collapse sparse cells so the chi-square approximation is honest
    keep = expected > 5.0
    obs_c = np.append(obs[keep], obs[~keep].sum())
    exp_c = np.append(expected[keep], expected[~keep].sum())
    if exp_c[-1] == 0.0:
        obs_c, exp_c = obs_c[:-1], exp_c[:-1]
    obs_c = obs_c * (exp_c.sum() / obs_c.sum())
    chi2, pval = stats.chisquare(obs_c, exp_c)
    return PoissonReport(
        mean_count=mean,
        dispersion_index=dispersion,
        ks_interarrival=ks,
        chi2_counts=float(chi2),
        chi2_pvalue=float(pval),
    )


def patterns_to_csv(patterns) -> str:
    lines = ["replication,block_index,time"]
    for rep, p in enumerate(patterns):
        for b, t in zip(p.blocks, p.times):
            lines.append(f"{rep},{b},{float(t)!r}")
    return "\n".join(lines) + "\n"
