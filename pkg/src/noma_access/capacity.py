"""Rate mathematics for SIC receivers, two-user regions, subband load and fairness."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np


class RatePair(NamedTuple):
    r1: float
    r2: float

    @property
    def total(self) -> float:
        return self.r1 + self.r2


class LoadModel(str, enum.Enum):
    EQUAL_SHARE = "equal_share"
    STAGE_STRICT = "stage_strict"


@dataclass(frozen=True)
class SubbandLoadModel:
    """Decodability model for one subband over one frame.

    gamma is the per-device received SNR on the subband, tw_product the
    number of complex symbols the subband offers in a frame.
    """

    gamma: float
    tw_product: float
    msg_bits: int = 1024
    model: LoadModel = LoadModel.EQUAL_SHARE

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not (self.tw_product > 0 and math.isfinite(self.tw_product)):
            raise ValueError(f"tw_product must be positive, got {self.tw_product}")
        if self.msg_bits < 1:
            raise ValueError(f"msg_bits must be >= 1, got {self.msg_bits}")
        object.__setattr__(self, "model", LoadModel(self.model))


def sic_stage_rates(n: int, gamma: float, bandwidth_hz: float = 1.0) -> np.ndarray:
    """Per-stage rates of an n-device equal-power SIC chain, first decoded first.

    Stage j sees the n - j not-yet-decoded devices as noise.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return np.zeros(0)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    remaining = np.arange(n - 1, -1, -1, dtype=float)
    return bandwidth_hz * np.log2(1.0 + gamma / (remaining * gamma + 1.0))


def sum_capacity(n: int, gamma: float, bandwidth_hz: float = 1.0) -> float:
    if n < 0 or gamma <= 0:
        raise ValueError("need n >= 0 and gamma > 0")
    return bandwidth_hz * math.log2(1.0 + n * gamma)


def noma_region_vertices(snr1: float, snr2: float) -> tuple[RatePair, RatePair]:
    """Corner points of the two-user MAC region at 1 Hz.

    A gives user 1 its single-user rate (user 2 decoded first, then
    cancelled); B is the mirror image.
    """
    if snr1 <= 0 or snr2 <= 0:
        raise ValueError("SNRs must be positive")
    a = RatePair(math.log2(1 + snr1), math.log2(1 + snr2 / (1 + snr1)))
    b = RatePair(math.log2(1 + snr1 / (1 + snr2)), math.log2(1 + snr2))
    return a, b


def _share_rate(frac: float, snr: float) -> float:
    # frac * log2(1 + snr/frac), continuous at frac = 0
    if frac == 0.0:
        return 0.0
    q = snr / frac
    if math.isinf(q):
        return frac * (math.log(frac + snr) - math.log(frac)) / math.log(2)
    return frac * math.log1p(q) / math.log(2)


def oma_region_point(alpha: float, snr1: float, snr2: float) -> RatePair:
    """Rates when user 1 gets a fraction ``alpha`` of the band, user 2 the rest."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return RatePair(_share_rate(alpha, snr1), _share_rate(1.0 - alpha, snr2))


def _feasible(model: SubbandLoadModel, n: int, collided: int) -> bool:
    g, tw, bits = model.gamma, model.tw_product, model.msg_bits
    if model.model is LoadModel.EQUAL_SHARE:
        return n * bits <= tw * math.log2(1 + n * g / (collided * g + 1))
    return bits <= tw * math.log2(1 + g / ((n - 1 + collided) * g + 1))


@lru_cache(maxsize=4096)
def noma_max_load(model: SubbandLoadModel, collided_count: int = 0) -> int:
    """Largest number of clean devices a subband can decode in one frame.

    Collided devices stay in the signal as Gaussian interference. Both
    models have a prefix-closed feasible set, so the scan stops at the first
    infeasible count.
    """
    if collided_count < 0:
        raise ValueError("collided_count must be non-negative")
    n = 0
    while _feasible(model, n + 1, collided_count):
        n += 1
    return n


def _bisect(f, lo: float, hi: float, iters: int = 200) -> float:
    # f increasing, f(lo) < 0 <= f(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return hi


def bandwidth_for_rate(rate: float, rho: float) -> float:
    """Smallest bandwidth W with W log2(1 + rho/W) >= rate.

    The rate saturates at rho/ln 2 as W grows, so larger targets are infeasible.
    """
    if rate <= 0:
        return 0.0
    if rate >= rho / math.log(2):
        raise ValueError("rate exceeds the infinite-bandwidth limit")
    hi = rate
    while _share_rate(hi, rho) < rate:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("rate too close to the infinite-bandwidth limit")
    return _bisect(lambda w: _share_rate(w, rho) - rate, 0.0, hi)


def fairness_allocate(snr_densities: Sequence[float], total_bandwidth_hz: float) -> np.ndarray:
    """Split bandwidth so every device gets the same rate.

    ``snr_densities`` are received power over noise density (Hz). Weak links
    get wider shares.
    """
    rho = [float(r) for r in snr_densities]
    if not rho:
        raise ValueError("need at least one device")
    if any(not (r > 0) for r in rho) or not total_bandwidth_hz > 0:
        raise ValueError("densities and bandwidth must be positive")
    if len(rho) == 1:
        return np.array([float(total_bandwidth_hz)])

    def excess(rate):
        return math.fsum(bandwidth_for_rate(rate, r) for r in rho) - total_bandwidth_hz

    # the weakest device's share diverges as the rate nears its limit
    r_cap = min(rho) / math.log(2)
    hi = 0.5 * r_cap
    step = 0.5
    while excess(hi) < 0:
        step *= 0.5
        hi = r_cap * (1 - step)
    rate = _bisect(excess, 0.0, hi)
    shares = np.array([bandwidth_for_rate(rate, r) for r in rho])
    return shares * (total_bandwidth_hz / math.fsum(shares))
