"""Frame-by-frame Monte-Carlo simulation of the access schemes.

Replication ``r`` of a scenario draws from
``Generator(PCG64(SeedSequence(master_seed, spawn_key=(r,))))``, which is the
``r``-th child of ``SeedSequence(master_seed).spawn(...)``. Replications are
therefore independent of how many others are run.
"""
from __future__ import annotations

import enum
import math
from functools import cached_property
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import access
from .access import NomaConfig, OmaConfig, RaConfig, Scheme
from .capacity import LoadModel, SubbandLoadModel
from .radio import DEFAULT_ESTIMATION_TW, db_to_linear, shannon_rate

Z95 = 1.959963984540054
MAX_SEED = 2**64


class ConfigError(ValueError):
    """Invalid scenario configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class NomaOptions:
    num_subbands: int = 4
    seed_space: int = 2**16
    load_model: LoadModel = LoadModel.EQUAL_SHARE
    per_tx_overhead_bytes: int = 16
    ack_bytes: int = 2
    estimation_tw: float = DEFAULT_ESTIMATION_TW


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one simulated operating point.

    ``target_rx_snr_db`` is the received SNR of one power-controlled device
    over the band it occupies (a NOMA subband or an OMA resource).
    """

    scheme: Scheme = Scheme.NOMA
    arrival_rate_lambda: float = 10.0
    total_bandwidth_hz: float = 1e6
    frame_duration_s: float = 1e-3
    target_rx_snr_db: float = 20.0
    msg_bits: int = 1024
    num_frames: int = 100
    num_replications: int = 30
    master_seed: int = 0
    max_attempts: int = 10
    backoff_max: int = 0
    noma: NomaOptions = field(default_factory=NomaOptions)
    ra: RaConfig = field(default_factory=RaConfig)
    oma: OmaConfig = field(default_factory=OmaConfig)

    def __post_init__(self):
        try:
            object.__setattr__(self, "scheme", Scheme(self.scheme))
        except ValueError:
            raise ConfigError("scheme", f"unknown scheme {self.scheme!r}") from None
        try:
            object.__setattr__(self, "noma", replace(self.noma, load_model=LoadModel(self.noma.load_model)))
        except ValueError:
            raise ConfigError("noma.load_model", f"unknown model {self.noma.load_model!r}") from None
        self.validate()

    def validate(self) -> None:
        def need(ok, name, msg):
            if not ok:
                raise ConfigError(name, msg)

        need(math.isfinite(self.arrival_rate_lambda) and self.arrival_rate_lambda >= 0,
             "arrival_rate_lambda", "must be finite and >= 0")
        need(math.isfinite(self.total_bandwidth_hz) and self.total_bandwidth_hz > 0,
             "total_bandwidth_hz", "must be > 0")
        need(math.isfinite(self.frame_duration_s) and self.frame_duration_s > 0,
             "frame_duration_s", "must be > 0")
        need(math.isfinite(self.target_rx_snr_db), "target_rx_snr_db", "must be finite")
        need(self.msg_bits >= 1, "msg_bits", "must be >= 1")
        need(self.num_frames >= 1, "num_frames", "must be >= 1")
        need(self.num_replications >= 1, "num_replications", "must be >= 1")
        need(0 <= self.master_seed < MAX_SEED, "master_seed", "must be a 64-bit unsigned integer")
        need(self.max_attempts >= 1, "max_attempts", "must be >= 1")
        need(self.backoff_max >= 0, "backoff_max", "must be >= 0")
        need(self.noma.num_subbands >= 1, "noma.num_subbands", "must be >= 1")
        need(self.noma.seed_space >= 1, "noma.seed_space", "must be >= 1")
        need(self.noma.per_tx_overhead_bytes >= 0, "noma.per_tx_overhead_bytes", "must be >= 0")
        need(self.noma.ack_bytes >= 0, "noma.ack_bytes", "must be >= 0")
        need(self.noma.estimation_tw > 0, "noma.estimation_tw", "must be > 0")

    @property
    def gamma(self) -> float:
        return db_to_linear(self.target_rx_snr_db)

    @property
    def symbols_per_frame(self) -> float:
        return self.total_bandwidth_hz * self.frame_duration_s

    @cached_property
    def noma_config(self) -> NomaConfig:
        k = self.noma.num_subbands
        model = SubbandLoadModel(self.gamma, self.symbols_per_frame / k, self.msg_bits,
                                 self.noma.load_model)
        return NomaConfig(model, k, self.noma.seed_space, self.noma.per_tx_overhead_bytes,
                          self.noma.ack_bytes, self.noma.estimation_tw)

    @cached_property
    def ra_config(self) -> RaConfig:
        return replace(self.ra, acb=self.scheme is Scheme.ACB_RA)

    @cached_property
    def oma_resource_bits(self) -> float:
        """Bits one OMA resource carries in a frame.

        FDMA splits the band and TDMA splits the frame; with the SNR fixed on
        the occupied resource both give the same symbol count.
        """
        r = self.oma.num_resources
        w, t = self.total_bandwidth_hz, self.frame_duration_s
        if self.scheme is Scheme.TDMA:
            return shannon_rate(w, self.gamma) * t / r
        return shannon_rate(w / r, self.gamma) * t


class Status(str, enum.Enum):
    BACKLOGGED = "backlogged"
    SUCCEEDED = "succeeded"
    DROPPED = "dropped"


@dataclass
class DeviceState:
    id: int
    arrival_frame: int
    attempts: int = 0
    status: Status = Status.BACKLOGGED
    completion_frame: Optional[int] = None


@dataclass
class FrameTally:
    arrivals: int = 0
    transmissions: int = 0
    successes: int = 0
    collisions: int = 0
    drops: int = 0
    delay_sum: int = 0
    ul_bytes: int = 0
    dl_bytes: int = 0


_EMPTY = np.zeros(0, dtype=np.int64)


@dataclass
class SimState:
    """Backlog of one replication, held as parallel arrays sorted by id."""

    frame: int = 0
    next_id: int = 0
    ids: np.ndarray = field(default_factory=lambda: _EMPTY.copy())
    arrival: np.ndarray = field(default_factory=lambda: _EMPTY.copy())
    attempts: np.ndarray = field(default_factory=lambda: _EMPTY.copy())
    next_try: np.ndarray = field(default_factory=lambda: _EMPTY.copy())

    @property
    def backlog_size(self) -> int:
        return int(self.ids.size)

    def devices(self) -> list[DeviceState]:
        return [DeviceState(int(i), int(a), int(n))
                for i, a, n in zip(self.ids, self.arrival, self.attempts)]

    def admit(self, count: int) -> np.ndarray:
        """Add ``count`` fresh devices arriving in the current frame."""
        new_ids = np.arange(self.next_id, self.next_id + count, dtype=np.int64)
        self.next_id += count
        self.ids = np.concatenate([self.ids, new_ids])
        self.arrival = np.concatenate([self.arrival, np.full(count, self.frame, dtype=np.int64)])
        self.attempts = np.concatenate([self.attempts, np.zeros(count, dtype=np.int64)])
        self.next_try = np.concatenate([self.next_try, np.full(count, self.frame, dtype=np.int64)])
        return new_ids

    def _keep(self, mask: np.ndarray) -> None:
        self.ids = self.ids[mask]
        self.arrival = self.arrival[mask]
        self.attempts = self.attempts[mask]
        self.next_try = self.next_try[mask]


def _member_mask(sorted_ids: np.ndarray, subset: np.ndarray) -> np.ndarray:
    mask = np.zeros(sorted_ids.size, dtype=bool)
    mask[np.searchsorted(sorted_ids, subset)] = True
    return mask


def poisson_arrivals(lam: float, rng: np.random.Generator) -> int:
    if lam < 0:
        raise ValueError("arrival rate must be non-negative")
    if lam == 0:
        return 0
    return int(rng.poisson(lam))


def _dispatch(config: ScenarioConfig, active: np.ndarray, rng):
    """Run one access round; returns (succeeded, transmitted, collided_count, overhead)."""
    scheme = config.scheme
    if scheme is Scheme.NOMA:
        cfg = config.noma_config
        outcomes = access.noma_round(active, cfg, rng)
        decoded = np.concatenate([o.decoded_devices for o in outcomes]) if outcomes else _EMPTY
        decoded.sort()
        collided = sum(o.collided_devices.size for o in outcomes)
        overhead = access.overhead_tally(scheme, decoded.size, active.size - decoded.size, cfg)
        return decoded, active, collided, overhead
    if scheme.uses_handshake:
        res = access.ra_round(active, config.ra_config, rng)
        transmitted = np.union1d(res.succeeded, res.collided)
        return res.succeeded, transmitted, res.collided.size, res.overhead
    won, collided = access.oma_round(active, config.oma.num_resources, config.oma_resource_bits,
                                     config.msg_bits, rng)
    overhead = access.overhead_tally(scheme, won.size, active.size - won.size, config.oma)
    return won, active, collided.size, overhead


def step_frame(state: SimState, config: ScenarioConfig, rng: np.random.Generator) -> FrameTally:
    """Advance one frame: arrivals, one access round, retry/drop bookkeeping."""
    t = state.frame
    tally = FrameTally()

    n_new = poisson_arrivals(config.arrival_rate_lambda, rng)
    if n_new:
        state.admit(n_new)
    tally.arrivals = n_new

    active_mask = state.next_try <= t
    if active_mask.any():
        active = state.ids[active_mask]
        succeeded, transmitted, n_collided, overhead = _dispatch(config, active, rng)
        tally.transmissions = int(transmitted.size)
        tally.collisions = int(n_collided)
        tally.successes = int(succeeded.size)
        tally.ul_bytes, tally.dl_bytes = overhead.ul_bytes, overhead.dl_bytes

        ok = _member_mask(state.ids, succeeded)
        tally.delay_sum = int((t - state.arrival[ok]).sum())

        tried = _member_mask(state.ids, transmitted) & ~ok
        state.attempts[tried] += 1
        dropped = tried & (state.attempts >= config.max_attempts)
        tally.drops = int(dropped.sum())

        retry = tried & ~dropped
        if config.backoff_max > 0:
            wait = rng.integers(0, config.backoff_max + 1, size=int(retry.sum()))
            state.next_try[retry] = t + 1 + wait
        else:
            state.next_try[retry] = t + 1
        # barred devices try again next frame
        state.next_try[active_mask & ~tried & ~ok] = t + 1
        state._keep(~(ok | dropped))

    state.frame += 1
    return tally


@dataclass(frozen=True)
class ReplicationTally:
    num_frames: int
    arrivals: int
    succeeded: int
    dropped: int
    backlogged: int
    transmissions: int
    collisions: int
    delay_sum: int
    ul_bytes: int
    dl_bytes: int
    payload_bytes_per_message: float

    @property
    def conserved(self) -> bool:
        return self.arrivals == self.succeeded + self.dropped + self.backlogged

    def metrics(self) -> tuple[float, float, float, float, float, float]:
        def ratio(a, b):
            return a / b if b else 0.0

        payload = self.succeeded * self.payload_bytes_per_message
        return (
            self.succeeded / self.num_frames,
            ratio(self.succeeded, self.arrivals),
            ratio(self.delay_sum, self.succeeded),
            ratio(self.collisions, self.transmissions),
            ratio(self.ul_bytes, payload),
            ratio(self.dl_bytes, payload),
        )


@dataclass(frozen=True)
class MetricsRecord:
    mean_success_per_frame: float
    success_probability: float
    mean_access_delay_frames: float
    collision_rate: float
    overhead_ul_bytes_per_payload_byte: float
    overhead_dl_bytes_per_payload_byte: float
    ci95_success_per_frame: float
    ci95_success_probability: float
    ci95_access_delay_frames: float
    ci95_collision_rate: float
    ci95_overhead_ul: float
    ci95_overhead_dl: float
    num_replications: int


def replication_rng(master_seed: int, replication: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(replication,))
    return np.random.Generator(np.random.PCG64(ss))


def run_replication(config: ScenarioConfig, replication: int) -> ReplicationTally:
    rng = replication_rng(config.master_seed, replication)
    state = SimState()
    totals = FrameTally()
    for _ in range(config.num_frames):
        f = step_frame(state, config, rng)
        totals.arrivals += f.arrivals
        totals.transmissions += f.transmissions
        totals.successes += f.successes
        totals.collisions += f.collisions
        totals.drops += f.drops
        totals.delay_sum += f.delay_sum
        totals.ul_bytes += f.ul_bytes
        totals.dl_bytes += f.dl_bytes
    return ReplicationTally(
        num_frames=config.num_frames,
        arrivals=totals.arrivals,
        succeeded=totals.successes,
        dropped=totals.drops,
        backlogged=state.backlog_size,
        transmissions=totals.transmissions,
        collisions=totals.collisions,
        delay_sum=totals.delay_sum,
        ul_bytes=totals.ul_bytes,
        dl_bytes=totals.dl_bytes,
        payload_bytes_per_message=config.msg_bits / 8,
    )


def run_replications(config: ScenarioConfig, replications: Optional[int] = None) -> list[ReplicationTally]:
    n = config.num_replications if replications is None else replications
    return [run_replication(config, r) for r in range(n)]


def _mean_ci(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, Z95 * math.sqrt(var / n)


def aggregate(tallies: Iterable[ReplicationTally]) -> MetricsRecord:
    """Mean and normal-approximation 95% half-width of each metric across replications.

    Sums are exactly rounded, so the record does not depend on input order.
    """
    rows = [t.metrics() for t in tallies]
    if not rows:
        raise ValueError("aggregate needs at least one replication")
    stats = [_mean_ci(sorted(col)) for col in zip(*rows)]
    means = [m for m, _ in stats]
    cis = [c for _, c in stats]
    return MetricsRecord(*means, *cis, num_replications=len(rows))


def run_scenario(config: ScenarioConfig) -> MetricsRecord:
    config.validate()
    return aggregate(run_replications(config))


def one_shot_successes(config: ScenarioConfig, n_devices: int, rng: np.random.Generator) -> int:
    """Successes of a single round with exactly ``n_devices`` contending."""
    active = np.arange(n_devices, dtype=np.int64)
    succeeded, *_ = _dispatch(config, active, rng)
    return int(succeeded.size)


def one_shot_curve(config: ScenarioConfig, n_values: Sequence[int],
                   replications: Optional[int] = None) -> list[tuple[int, float, float]]:
    """Mean single-round successes versus contending population, with 95% half-widths."""
    reps = config.num_replications if replications is None else replications
    out = []
    for n in n_values:
        counts = [one_shot_successes(config, n, replication_rng(config.master_seed, r))
                  for r in range(reps)]
        mean, ci = _mean_ci(counts)
        out.append((n, mean, ci))
    return out


def config_fields(config: ScenarioConfig) -> dict[str, object]:
    """Flat ``key -> value`` view, nested options prefixed with their section."""
    flat: dict[str, object] = {}
    for f in fields(config):
        value = getattr(config, f.name)
        if f.name in ("noma", "ra", "oma"):
            for sub in fields(value):
                flat[f"{f.name}.{sub.name}"] = getattr(value, sub.name)
        else:
            flat[f.name] = value
    flat.pop("ra.acb", None)
    return flat
