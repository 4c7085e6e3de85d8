"""One-frame models of each access scheme and their signalling overhead.

Device sets are represented as sorted int64 arrays of device ids. Every round
takes an explicit ``numpy.random.Generator`` and is otherwise pure.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .capacity import SubbandLoadModel, noma_max_load
from .radio import DEFAULT_ESTIMATION_TW, estimate_load, measure_total_power


class Scheme(str, enum.Enum):
    NOMA = "noma"
    ACB_RA = "acb_ra"
    RA = "ra"
    FDMA = "fdma"
    TDMA = "tdma"

    @property
    def uses_handshake(self) -> bool:
        return self in (Scheme.RA, Scheme.ACB_RA)


@dataclass(frozen=True)
class RaConfig:
    num_preambles: int = 64
    ra_overhead_ul_bytes: int = 59
    ra_overhead_dl_bytes: int = 136
    # bytes charged per collided preamble; a preamble carries no payload
    msg1_bytes: int = 0
    acb: bool = False
    # None selects the dynamic rule min(1, M / backlog)
    barring_factor: Optional[float] = None

    def __post_init__(self):
        if self.num_preambles < 1:
            raise ValueError("num_preambles must be >= 1")
        if min(self.ra_overhead_ul_bytes, self.ra_overhead_dl_bytes, self.msg1_bytes) < 0:
            raise ValueError("overhead byte counts must be non-negative")
        if self.barring_factor is not None and not 0.0 <= self.barring_factor <= 1.0:
            raise ValueError("barring_factor must lie in [0, 1]")


@dataclass(frozen=True)
class OmaConfig:
    num_resources: int = 10
    per_tx_overhead_bytes: int = 16
    ack_bytes: int = 2

    def __post_init__(self):
        if self.num_resources < 1:
            raise ValueError("num_resources must be >= 1")


@dataclass(frozen=True)
class NomaConfig:
    load_model: SubbandLoadModel
    num_subbands: int = 4
    seed_space: int = 2**16
    per_tx_overhead_bytes: int = 16
    ack_bytes: int = 2
    estimation_tw: float = DEFAULT_ESTIMATION_TW

    def __post_init__(self):
        if self.num_subbands < 1 or self.seed_space < 1:
            raise ValueError("num_subbands and seed_space must be >= 1")
        if min(self.per_tx_overhead_bytes, self.ack_bytes) < 0:
            raise ValueError("overhead byte counts must be non-negative")


@dataclass(frozen=True)
class OverheadTally:
    ul_bytes: int = 0
    dl_bytes: int = 0

    def __add__(self, other: "OverheadTally") -> "OverheadTally":
        return OverheadTally(self.ul_bytes + other.ul_bytes, self.dl_bytes + other.dl_bytes)


class ContentionResult(NamedTuple):
    winners: np.ndarray
    collided: np.ndarray


class RaResult(NamedTuple):
    succeeded: np.ndarray
    collided: np.ndarray
    overhead: OverheadTally


class SubbandOutcome(NamedTuple):
    subband_index: int
    clean_devices: np.ndarray
    collided_devices: np.ndarray
    decoded_devices: np.ndarray
    estimated_load: int

    @property
    def all_devices(self) -> np.ndarray:
        return np.union1d(self.clean_devices, self.collided_devices)


def _ids(devices) -> np.ndarray:
    if isinstance(devices, (set, frozenset)):
        devices = list(devices)
    ids = np.asarray(devices, dtype=np.int64)
    if ids.ndim == 1 and np.all(ids[1:] > ids[:-1]):
        return ids
    return np.unique(ids)


def _alone(choices: np.ndarray, num_options: int) -> np.ndarray:
    """Mask of entries whose value no other entry picked."""
    if choices.size == 0:
        return np.zeros(0, dtype=bool)
    if num_options <= 4 * choices.size:
        counts = np.bincount(choices, minlength=num_options)
        return counts[choices] == 1
    order = np.argsort(choices, kind="stable")
    ranked = choices[order]
    dup = ranked[1:] == ranked[:-1]
    shared = np.zeros(choices.size, dtype=bool)
    shared[1:] |= dup
    shared[:-1] |= dup
    alone = np.empty(choices.size, dtype=bool)
    alone[order] = ~shared
    return alone


def preamble_round(contenders, num_preambles: int, rng: np.random.Generator) -> ContentionResult:
    """Each contender picks a preamble; devices alone on theirs win."""
    if num_preambles < 1:
        raise ValueError("num_preambles must be >= 1")
    ids = _ids(contenders)
    alone = _alone(rng.integers(num_preambles, size=ids.size), num_preambles)
    return ContentionResult(ids[alone], ids[~alone])


def dynamic_barring_factor(backlog_size: int, num_preambles: int) -> float:
    return min(1.0, num_preambles / max(1, backlog_size))


def acb_gate(backlog, barring_factor: float, rng: np.random.Generator) -> np.ndarray:
    """Access class barring: each device independently passes with ``barring_factor``."""
    if not 0.0 <= barring_factor <= 1.0:
        raise ValueError("barring_factor must lie in [0, 1]")
    ids = _ids(backlog)
    return ids[rng.random(ids.size) < barring_factor]


def ra_round(backlog, cfg: RaConfig, rng: np.random.Generator) -> RaResult:
    """LTE random access, with the handshake reduced to success on a unique preamble."""
    ids = _ids(backlog)
    if cfg.acb:
        p = cfg.barring_factor
        if p is None:
            p = dynamic_barring_factor(ids.size, cfg.num_preambles)
        ids = acb_gate(ids, p, rng)
    winners, collided = preamble_round(ids, cfg.num_preambles, rng)
    overhead = overhead_tally(Scheme.ACB_RA if cfg.acb else Scheme.RA,
                              winners.size, collided.size, cfg)
    return RaResult(winners, collided, overhead)


def oma_round(active, num_resources: int, per_resource_rate_bits: float, msg_bits: int,
              rng: np.random.Generator) -> ContentionResult:
    """Uncoordinated TDMA/FDMA: one random resource per device, no coordination.

    A device succeeds when alone on its resource and the resource carries
    the whole message.
    """
    if num_resources < 1:
        raise ValueError("num_resources must be >= 1")
    ids = _ids(active)
    alone = _alone(rng.integers(num_resources, size=ids.size), num_resources)
    if msg_bits > per_resource_rate_bits:
        return ContentionResult(ids[:0], ids[~alone])
    return ContentionResult(ids[alone], ids[~alone])


def noma_round(active, cfg: NomaConfig, rng: np.random.Generator) -> list[SubbandOutcome]:
    """Random NOMA frame: random (subband, seed) per device, then SIC per subband.

    Devices sharing both subband and seed are indistinguishable and stay in
    the signal as interference. Clean devices are decoded in ascending id
    order up to the subband's load limit.
    """
    ids = _ids(active)
    k, s = cfg.num_subbands, cfg.seed_space
    subband = rng.integers(k, size=ids.size)
    seed = rng.integers(s, size=ids.size)

    clean = _alone(subband * np.int64(s) + seed, k * s)
    # stable grouping keeps ids ascending inside each subband
    order = np.argsort(subband, kind="stable")
    by_band, clean_by_band = ids[order], clean[order]
    counts = np.bincount(subband, minlength=k)
    bounds = np.concatenate(([0], np.cumsum(counts)))

    gamma = cfg.load_model.gamma
    observed = measure_total_power(counts, gamma, 1.0, rng, cfg.estimation_tw)

    outcomes = []
    for j in range(k):
        members = by_band[bounds[j]:bounds[j + 1]]
        ok = clean_by_band[bounds[j]:bounds[j + 1]]
        clean_j, collided_j = members[ok], members[~ok]
        limit = noma_max_load(cfg.load_model, int(collided_j.size))
        outcomes.append(SubbandOutcome(
            subband_index=j,
            clean_devices=clean_j,
            collided_devices=collided_j,
            decoded_devices=clean_j[:limit],
            estimated_load=estimate_load(float(observed[j]), gamma, 1.0),
        ))
    return outcomes


def overhead_tally(scheme: Scheme, successes: int, retransmissions: int, cfg) -> OverheadTally:
    """Signalling bytes spent on control, excluding the payload itself.

    Handshake schemes pay the full connection setup per success plus msg1
    per collided preamble. Grant-free schemes send an identity/seed header
    on every transmission and receive a short ack per decoded device.
    """
    if successes < 0 or retransmissions < 0:
        raise ValueError("counts must be non-negative")
    scheme = Scheme(scheme)
    if scheme.uses_handshake:
        return OverheadTally(
            successes * cfg.ra_overhead_ul_bytes + retransmissions * cfg.msg1_bytes,
            successes * cfg.ra_overhead_dl_bytes,
        )
    return OverheadTally(
        (successes + retransmissions) * cfg.per_tx_overhead_bytes,
        successes * cfg.ack_bytes,
    )
