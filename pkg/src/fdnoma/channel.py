"""Rayleigh-fading channel draws exposed as per-antenna power gains.

Only squared envelopes enter the SINR expressions, so gains are drawn
directly as exponentials (|CN(0, v)|^2 is exponential with mean v) with
the transmit SNR folded into the mean.  Streams are keyed by
(seed, stream) so trials reproduce independently of scheduling.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SystemParams, mean_gains


@dataclass(frozen=True)
class RngSeed:
    """64-bit seed plus stream index; identical pairs give identical draws."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must be in [0, 2^64), got {self.seed!r}")
        if self.stream < 0:
            raise ValueError(f"stream must be >= 0, got {self.stream!r}")


@dataclass(frozen=True)
class ChannelRealization:
    """One joint draw of all five channel groups (power gains, SNR folded in).

    g_br[i, j]: BS antenna i to relay receive antenna j.
    g_si[j, k]: relay transmit antenna k into receive antenna j.
    """

    g_br: np.ndarray  # (m_b, m_r)
    g_su1: np.ndarray  # (m_b,)
    g_ru1: np.ndarray  # (m_t,)
    g_ru2: np.ndarray  # (m_t,)
    g_si: np.ndarray  # (m_r, m_t)


@dataclass(frozen=True)
class GainBatch:
    """Trial-major stacks of `count` realizations from one stream."""

    g_br: np.ndarray  # (count, m_b, m_r)
    g_su1: np.ndarray  # (count, m_b)
    g_ru1: np.ndarray  # (count, m_t)
    g_ru2: np.ndarray  # (count, m_t)
    g_si: np.ndarray  # (count, m_r, m_t)
    count: int


def _generator(entropy: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy))


def draw_batch(params: SystemParams, entropy: tuple[int, ...], count: int) -> GainBatch:
    """Draw `count` i.i.d. realizations from the stream keyed by `entropy`.

    Group order (g_br, g_su1, g_ru1, g_ru2, g_si) is fixed so a stream
    always yields the same batch for the same count.  Draws are consumed
    even when k1 = 0 (the zero mean just scales them away), keeping the
    remaining groups aligned across parameter sets.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count!r}")
    gains = mean_gains(params)
    rng = _generator(entropy)
    return GainBatch(
        g_br=gains.lam_br * rng.standard_exponential((count, params.m_b, params.m_r)),
        g_su1=gains.lam_su1 * rng.standard_exponential((count, params.m_b)),
        g_ru1=gains.lam_ru1 * rng.standard_exponential((count, params.m_t)),
        g_ru2=gains.lam_ru2 * rng.standard_exponential((count, params.m_t)),
        g_si=gains.lam_si * rng.standard_exponential((count, params.m_r, params.m_t)),
        count=count,
    )


def draw(params: SystemParams, seed: RngSeed) -> ChannelRealization:
    """Draw one realization; equals the single element of a count-1 batch."""
    batch = draw_batch(params, (seed.seed, seed.stream), 1)
    return realization_at(batch, 0)


def realization_at(batch: GainBatch, index: int) -> ChannelRealization:
    return ChannelRealization(
        g_br=batch.g_br[index],
        g_su1=batch.g_su1[index],
        g_ru1=batch.g_ru1[index],
        g_ru2=batch.g_ru2[index],
        g_si=batch.g_si[index],
    )


def dump_columns(params: SystemParams) -> list[str]:
    """Fixed column order of the realization dump (row-major matrices)."""
    cols = ["trial"]
    cols += [f"g_br_{i}_{j}" for i in range(params.m_b) for j in range(params.m_r)]
    cols += [f"g_su1_{i}" for i in range(params.m_b)]
    cols += [f"g_ru1_{k}" for k in range(params.m_t)]
    cols += [f"g_ru2_{k}" for k in range(params.m_t)]
    cols += [f"g_si_{j}_{k}" for j in range(params.m_r) for k in range(params.m_t)]
    return cols


def dump_realizations(params: SystemParams, seed: int, trials: int, path: str | Path) -> None:
    """Write one realization per row (trial t uses stream index t)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(dump_columns(params))
        for trial in range(trials):
            real = draw(params, RngSeed(seed, trial))
            row = [str(trial)]
            for values in (real.g_br.ravel(), real.g_su1, real.g_ru1, real.g_ru2, real.g_si.ravel()):
                row += [f"{v:.17g}" for v in values]
            writer.writerow(row)
