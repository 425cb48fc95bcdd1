"""Monte Carlo estimation of ergodic rates, outage and fairness.

Trials are drawn in fixed-size blocks, one RNG stream per block, and the
per-block partial sums are reduced in block order with math.fsum, so
results are reproducible and independent of how blocks would be farmed
out to workers.  Within a sweep row, every scheme sees the same channel
realizations (common random numbers), which makes the per-realization
dominance relations between schemes hold exactly in the outputs.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import analytic
from .channel import draw_batch
from .config import SweepSpec, SystemParams, db_to_linear, validate
from .selection import NEEDS_RNG, check_scheme, select_batch
from .sinr import cross_sinr, near_sinr, rate_bits, relay_sinr

DEFAULT_BLOCK_SIZE = 1 << 16
_RANDOM_SALT = 0x52414E44

MONTE_CARLO = "monte_carlo"
ANALYTIC = "analytic"


@dataclass(frozen=True)
class MetricEstimate:
    """A point estimate with its standard error; analytic values carry 0."""

    value: float
    std_error: float
    trials: int
    kind: str = MONTE_CARLO


@dataclass(frozen=True)
class MetricSet:
    rate_u1: MetricEstimate
    rate_u2: MetricEstimate
    rate_sum: MetricEstimate
    outage_u1: MetricEstimate
    outage_u2: MetricEstimate
    jain_index: MetricEstimate


@dataclass(frozen=True)
class OutageEstimate:
    outage_u1: MetricEstimate
    outage_u2: MetricEstimate
    threshold_infeasible: bool = False


@dataclass(frozen=True)
class SweepRow:
    power_db: float
    scheme: str
    kind: str
    trials: int
    metrics: MetricSet


def jain_index(rate_u1: float, rate_u2: float) -> float:
    """Two-user fairness index (r1+r2)^2 / (2 (r1^2 + r2^2)) in [0.5, 1].

    1 means equal rates, 0.5 means one user takes everything.  Undefined
    at (0, 0); returns 1 by convention with a warning.
    """
    if rate_u1 == 0.0 and rate_u2 == 0.0:
        warnings.warn("jain_index undefined for two zero rates; returning 1", RuntimeWarning)
        return 1.0
    total = rate_u1 + rate_u2
    return total * total / (2.0 * (rate_u1 * rate_u1 + rate_u2 * rate_u2))


class _Stats:
    """Per-scheme partial sums, one entry per block, reduced in block order."""

    def __init__(self):
        self.n = 0
        self.sum_r1: list[float] = []
        self.sum_r2: list[float] = []
        self.sum_r1sq: list[float] = []
        self.sum_r2sq: list[float] = []
        self.sum_r1r2: list[float] = []
        self.count_out1 = 0
        self.count_out2 = 0

    def add_block(self, r1: np.ndarray, r2: np.ndarray, out1: np.ndarray, out2: np.ndarray):
        self.n += r1.shape[0]
        self.sum_r1.append(float(np.sum(r1)))
        self.sum_r2.append(float(np.sum(r2)))
        self.sum_r1sq.append(float(np.sum(r1 * r1)))
        self.sum_r2sq.append(float(np.sum(r2 * r2)))
        self.sum_r1r2.append(float(np.sum(r1 * r2)))
        self.count_out1 += int(np.count_nonzero(out1))
        self.count_out2 += int(np.count_nonzero(out2))


def _simulate(
    params: SystemParams,
    schemes: tuple[str, ...],
    trials: int,
    entropy_base: tuple[int, ...],
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> dict[str, _Stats]:
    validate(params)
    for scheme in schemes:
        check_scheme(scheme)
    theta1, theta2 = analytic.thresholds(params)
    stats = {scheme: _Stats() for scheme in schemes}

    offset = 0
    block_index = 0
    while offset < trials:
        count = min(block_size, trials - offset)
        batch = draw_batch(params, (*entropy_base, block_index), count)
        rows = np.arange(count)
        for scheme in schemes:
            rng = None
            if scheme in NEEDS_RNG:
                rng = np.random.default_rng(
                    np.random.SeedSequence((*entropy_base, block_index, _RANDOM_SALT))
                )
            ii, jj, kk = select_batch(scheme, batch, params, rng)
            g_br = batch.g_br[rows, ii, jj]
            g_si = batch.g_si[rows, jj, kk]
            g_su1 = batch.g_su1[rows, ii]
            g_ru1 = batch.g_ru1[rows, kk]
            g_ru2 = batch.g_ru2[rows, kk]

            gamma_r = relay_sinr(g_br, g_si, params.a1, params.a2)
            gamma_12 = cross_sinr(g_su1, g_ru1, params.a1, params.a2)
            gamma_1 = near_sinr(g_su1, g_ru1, params.a1)
            gamma_2 = np.minimum(np.minimum(gamma_12, gamma_r), g_ru2)

            r1 = rate_bits(gamma_1)
            r2 = rate_bits(gamma_2)
            out1 = ~((gamma_12 > theta2) & (gamma_1 > theta1))
            out2 = ~((gamma_r > theta2) & (g_ru2 > theta2))
            stats[scheme].add_block(r1, r2, out1, out2)
        offset += count
        block_index += 1
    return stats


def _rate_estimates(stats: _Stats) -> tuple[MetricEstimate, MetricEstimate, MetricEstimate]:
    n = stats.n
    s1 = math.fsum(stats.sum_r1)
    s2 = math.fsum(stats.sum_r2)
    q1 = math.fsum(stats.sum_r1sq)
    q2 = math.fsum(stats.sum_r2sq)
    s12 = math.fsum(stats.sum_r1r2)
    m1 = s1 / n
    m2 = s2 / n
    if n > 1:
        var1 = max((q1 - n * m1 * m1) / (n - 1), 0.0)
        var2 = max((q2 - n * m2 * m2) / (n - 1), 0.0)
        var_sum = max((q1 + q2 + 2.0 * s12 - n * (m1 + m2) ** 2) / (n - 1), 0.0)
    else:
        var1 = var2 = var_sum = 0.0
    return (
        MetricEstimate(m1, math.sqrt(var1 / n), n),
        MetricEstimate(m2, math.sqrt(var2 / n), n),
        MetricEstimate(m1 + m2, math.sqrt(var_sum / n), n),
    )


def _outage_estimates(stats: _Stats) -> tuple[MetricEstimate, MetricEstimate]:
    n = stats.n
    estimates = []
    for count in (stats.count_out1, stats.count_out2):
        p = count / n
        estimates.append(MetricEstimate(p, math.sqrt(p * (1.0 - p) / n), n))
    return tuple(estimates)


def _jain_estimate(stats: _Stats) -> MetricEstimate:
    """Fairness of the estimated mean rates; standard error by the delta method."""
    n = stats.n
    m1 = math.fsum(stats.sum_r1) / n
    m2 = math.fsum(stats.sum_r2) / n
    value = jain_index(m1, m2)
    if n > 1 and (m1 != 0.0 or m2 != 0.0):
        q1 = math.fsum(stats.sum_r1sq)
        q2 = math.fsum(stats.sum_r2sq)
        s12 = math.fsum(stats.sum_r1r2)
        var1 = max((q1 - n * m1 * m1) / (n - 1), 0.0) / n
        var2 = max((q2 - n * m2 * m2) / (n - 1), 0.0) / n
        cov = ((s12 - n * m1 * m2) / (n - 1)) / n
        norm = (m1 * m1 + m2 * m2) ** 2
        d1 = (m1 + m2) * m2 * (m2 - m1) / norm
        d2 = (m1 + m2) * m1 * (m1 - m2) / norm
        se = math.sqrt(max(d1 * d1 * var1 + 2.0 * d1 * d2 * cov + d2 * d2 * var2, 0.0))
    else:
        se = 0.0
    return MetricEstimate(value, se, n)


def _metric_set(stats: _Stats, metrics: tuple[str, ...]) -> MetricSet:
    nan = MetricEstimate(math.nan, 0.0, stats.n)
    if "rates" in metrics:
        rate_u1, rate_u2, rate_sum = _rate_estimates(stats)
    else:
        rate_u1 = rate_u2 = rate_sum = nan
    outage_u1, outage_u2 = _outage_estimates(stats) if "outage" in metrics else (nan, nan)
    jain = _jain_estimate(stats) if "jain" in metrics else nan
    return MetricSet(rate_u1, rate_u2, rate_sum, outage_u1, outage_u2, jain)


def estimate_rates(
    params: SystemParams,
    scheme: str,
    trials: int,
    seed: int,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> tuple[MetricEstimate, MetricEstimate, MetricEstimate]:
    """Sample means of the per-realization user rates under one scheme."""
    stats = _simulate(params, (scheme,), trials, (seed,), block_size)[scheme]
    return _rate_estimates(stats)


def estimate_outage(
    params: SystemParams,
    scheme: str,
    trials: int,
    seed: int,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> OutageEstimate:
    """Outage frequencies under one scheme.

    Near-user outage: fails to decode the far-user symbol at its target
    or its own symbol at its own target.  Far-user outage: the relay or
    the far user fails the far-user target.  When the far-user threshold
    reaches the a2/a1 cap both outages are identically 1 and the result
    is flagged instead of simulated.
    """
    _, theta2 = analytic.thresholds(params)
    if theta2 >= analytic.sinr_cap(params):
        certain = MetricEstimate(1.0, 0.0, trials)
        return OutageEstimate(certain, certain, threshold_infeasible=True)
    stats = _simulate(params, (scheme,), trials, (seed,), block_size)[scheme]
    outage_u1, outage_u2 = _outage_estimates(stats)
    return OutageEstimate(outage_u1, outage_u2)


def run_sweep(
    params: SystemParams,
    sweep: SweepSpec,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> list[SweepRow]:
    """Monte Carlo sweep over the power grid; one row per (point, scheme).

    Power points set rho_s and rho_r jointly unless the sweep overrides
    the relay power.  All schemes at a point share realizations.
    """
    rows = []
    for p_idx, power_db in enumerate(sweep.power_db):
        relay_db = power_db if sweep.rho_r_db is None else sweep.rho_r_db[p_idx]
        run_params = validate(
            replace(params, rho_s=db_to_linear(power_db), rho_r=db_to_linear(relay_db))
        )
        stats = _simulate(
            run_params, sweep.schemes, sweep.trials, (sweep.seed, p_idx), block_size
        )
        for scheme in sweep.schemes:
            rows.append(
                SweepRow(
                    power_db=power_db,
                    scheme=scheme,
                    kind=MONTE_CARLO,
                    trials=sweep.trials,
                    metrics=_metric_set(stats[scheme], sweep.metrics),
                )
            )
    return rows


# Schemes whose statistics the closed forms describe.
ANALYTIC_SCHEMES = ("max_u1_analytic", "max_u2_decoupled")


def analytic_metric_set(params: SystemParams, scheme: str, metrics: tuple[str, ...]) -> MetricSet:
    """Closed-form MetricSet for one of ANALYTIC_SCHEMES."""
    if scheme == "max_u1_analytic":
        rate_fns = (analytic.rate_u1_max_u1, lambda p: analytic.rate_u2_max_u1(p).value)
        outage_fns = (analytic.outage_u1_max_u1, analytic.outage_u2_max_u1)
    elif scheme == "max_u2_decoupled":
        rate_fns = (analytic.rate_u1_max_u2, lambda p: analytic.rate_u2_max_u2(p).value)
        outage_fns = (analytic.outage_u1_max_u2, analytic.outage_u2_max_u2)
    else:
        raise ValueError(f"no closed forms for scheme {scheme!r}; have {ANALYTIC_SCHEMES}")

    def est(value: float) -> MetricEstimate:
        return MetricEstimate(value, 0.0, 0, kind=ANALYTIC)

    nan = est(math.nan)
    rate_u1 = rate_u2 = rate_sum = jain = nan
    outage_u1 = outage_u2 = nan
    if "rates" in metrics or "jain" in metrics:
        r1 = rate_fns[0](params)
        r2 = rate_fns[1](params)
        if "rates" in metrics:
            rate_u1, rate_u2, rate_sum = est(r1), est(r2), est(r1 + r2)
        if "jain" in metrics:
            jain = est(jain_index(r1, r2))
    if "outage" in metrics:
        outage_u1, outage_u2 = est(outage_fns[0](params)), est(outage_fns[1](params))
    return MetricSet(rate_u1, rate_u2, rate_sum, outage_u1, outage_u2, jain)


def analytic_sweep(params: SystemParams, sweep: SweepSpec) -> list[SweepRow]:
    """Closed-form sweep rows for the schemes that have closed forms."""
    rows = []
    for p_idx, power_db in enumerate(sweep.power_db):
        relay_db = power_db if sweep.rho_r_db is None else sweep.rho_r_db[p_idx]
        run_params = validate(
            replace(params, rho_s=db_to_linear(power_db), rho_r=db_to_linear(relay_db))
        )
        for scheme in sweep.schemes:
            rows.append(
                SweepRow(
                    power_db=power_db,
                    scheme=scheme,
                    kind=ANALYTIC,
                    trials=0,
                    metrics=analytic_metric_set(run_params, scheme, sweep.metrics),
                )
            )
    return rows


CSV_COLUMNS = (
    "power_db",
    "scheme",
    "rate_u1",
    "rate_u1_se",
    "rate_u2",
    "rate_u2_se",
    "rate_sum",
    "outage_u1",
    "outage_u1_se",
    "outage_u2",
    "outage_u2_se",
    "jain",
    "trials",
    "kind",
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(rows: list[SweepRow], target) -> None:
    """Write sweep rows with full-precision decimals; byte-stable for a seed."""
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    handle = open(target, "w", newline="") if own else target
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            m = row.metrics
            writer.writerow(
                [
                    _fmt(row.power_db),
                    row.scheme,
                    _fmt(m.rate_u1.value),
                    _fmt(m.rate_u1.std_error),
                    _fmt(m.rate_u2.value),
                    _fmt(m.rate_u2.std_error),
                    _fmt(m.rate_sum.value),
                    _fmt(m.outage_u1.value),
                    _fmt(m.outage_u1.std_error),
                    _fmt(m.outage_u2.value),
                    _fmt(m.outage_u2.std_error),
                    _fmt(m.jain_index.value),
                    str(row.trials),
                    row.kind,
                ]
            )
    finally:
        if own:
            handle.close()


def rows_to_csv_text(rows: list[SweepRow]) -> str:
    buffer = io.StringIO()
    write_csv(rows, buffer)
    return buffer.getvalue()
