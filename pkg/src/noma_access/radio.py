"""Physical-layer helpers: dB conversion, AWGN rates, power control, load estimation.

All powers are linear watts. dB only appears at the config/report boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Time-bandwidth product of the power measurement used for load estimation.
DEFAULT_ESTIMATION_TW = 1000.0


class CoverageOutage(Exception):
    """Raised when a device cannot reach the target received power."""


def db_to_linear(x_db):
    out = 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def linear_to_db(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"linear_to_db needs a strictly positive ratio, got {x!r}")
    out = 10.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out


def shannon_rate(bandwidth_hz, snr):
    """AWGN capacity ``W log2(1 + snr)`` in bits/s."""
    w = np.asarray(bandwidth_hz, dtype=float)
    s = np.asarray(snr, dtype=float)
    if np.any(w < 0) or np.any(s < 0) or np.any(np.isnan(w)) or np.any(np.isnan(s)):
        raise ValueError("bandwidth and snr must be non-negative")
    out = w * np.log2(1.0 + s)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TwoUserUplink:
    """Two devices on one resource: y = sqrt(p1) h1 s1 + sqrt(p2) h2 s2 + w."""

    p1: float
    p2: float
    h1: float
    h2: float
    noise_power: float
    bandwidth_hz: float = 1.0

    def __post_init__(self):
        for name in ("p1", "p2", "noise_power"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        for name in ("h1", "h2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be non-negative and finite, got {v}")
        if not (math.isfinite(self.bandwidth_hz) and self.bandwidth_hz > 0):
            raise ValueError("bandwidth_hz must be positive")

    @property
    def snr1(self) -> float:
        return self.p1 * self.h1**2 / self.noise_power

    @property
    def snr2(self) -> float:
        return self.p2 * self.h2**2 / self.noise_power


@dataclass(frozen=True)
class LinkBudget:
    channel_gain: float
    max_tx_power: float
    target_rx_power: float

    def __post_init__(self):
        for name in ("channel_gain", "max_tx_power", "target_rx_power"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @property
    def required_tx_power(self) -> float:
        return self.target_rx_power / self.channel_gain

    @property
    def feasible(self) -> bool:
        return self.required_tx_power <= self.max_tx_power


def power_control(link: LinkBudget) -> float:
    """Open-loop power control: transmit so the base station sees ``target_rx_power``.

    Raises CoverageOutage when the required power exceeds the device limit.
    """
    p = link.required_tx_power
    if p > link.max_tx_power:
        raise CoverageOutage(
            f"need {p:.3g} W to reach target, device limit is {link.max_tx_power:.3g} W"
        )
    return p


def estimate_load(total_rx_power: float, per_device_rx_power: float, noise_power: float) -> int:
    """Number of power-controlled devices on a subband, from its total received power."""
    if per_device_rx_power <= 0:
        raise ValueError("per_device_rx_power must be positive")
    if total_rx_power < 0 or noise_power < 0:
        raise ValueError("powers must be non-negative")
    n = round((total_rx_power - noise_power) / per_device_rx_power)
    return max(0, int(n))


def measure_total_power(n_devices, per_device_rx_power, noise_power, rng,
                        tw_product=DEFAULT_ESTIMATION_TW):
    """Noisy observation of the total received power on one or more subbands.

    The noise-floor estimate fluctuates with standard deviation
    ``noise_power / sqrt(tw_product)``; signal power is taken as exact.
    ``n_devices`` may be an array, one entry per subband.
    """
    n = np.asarray(n_devices, dtype=float)
    jitter = rng.normal(0.0, noise_power / math.sqrt(tw_product), size=n.shape)
    total = np.maximum(n * per_device_rx_power + noise_power + jitter, 0.0)
    return float(total) if total.ndim == 0 else total
