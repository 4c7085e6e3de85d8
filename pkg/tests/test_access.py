import math

import numpy as np
import pytest

from noma_access.access import (NomaConfig, OmaConfig, OverheadTally, RaConfig, Scheme,
                                acb_gate, dynamic_barring_factor, noma_round, oma_round,
                                overhead_tally, preamble_round, ra_round)
from noma_access.capacity import SubbandLoadModel, noma_max_load

from oracles import seed_collision_probability, singleton_mean, thinned_singleton_mean

FEASIBLE = SubbandLoadModel(gamma=100.0, tw_product=1000, msg_bits=1024)


def within_3se(samples, expected):
    samples = np.asarray(samples, dtype=float)
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    return abs(samples.mean() - expected) <= 3 * se


def test_preamble_round_lone_contender(rng):
    won, lost = preamble_round({7}, 64, rng)
    assert set(won) == {7} and lost.size == 0


def test_preamble_round_pigeonhole(rng):
    won, lost = preamble_round([1, 2], 1, rng)
    assert won.size == 0 and set(lost) == {1, 2}


def test_preamble_round_partition(rng):
    devices = set(range(0, 300, 3))
    for _ in range(200):
        won, lost = preamble_round(devices, 64, rng)
        assert set(won) | set(lost) == devices
        assert not set(won) & set(lost)


def test_preamble_round_matches_singleton_oracle(rng):
    devices = np.arange(64)
    wins = [preamble_round(devices, 64, rng).winners.size for _ in range(10_000)]
    assert singleton_mean(64, 64) == pytest.approx(23.7, abs=0.05)
    assert within_3se(wins, singleton_mean(64, 64))


def test_acb_gate_extremes(rng):
    backlog = np.arange(500)
    assert set(acb_gate(backlog, 1.0, rng)) == set(backlog)
    assert acb_gate(backlog, 0.0, rng).size == 0
    with pytest.raises(ValueError):
        acb_gate(backlog, 1.5, rng)


def test_acb_gate_binomial(rng):
    backlog = np.arange(1000)
    passed = [acb_gate(backlog, 0.5, rng).size for _ in range(10_000)]
    se = math.sqrt(1000 * 0.25) / math.sqrt(len(passed))
    assert abs(np.mean(passed) - 500) <= 3 * se


def test_dynamic_barring_factor():
    assert dynamic_barring_factor(0, 64) == 1.0
    assert dynamic_barring_factor(32, 64) == 1.0
    assert dynamic_barring_factor(640, 64) == pytest.approx(0.1)


def test_ra_round_empty(rng):
    res = ra_round([], RaConfig(), rng)
    assert res.succeeded.size == 0 and res.collided.size == 0
    assert res.overhead == OverheadTally(0, 0)


def test_ra_round_single_device_overhead(rng):
    res = ra_round([42], RaConfig(), rng)
    assert list(res.succeeded) == [42]
    assert res.overhead == OverheadTally(59, 136)


def test_acb_round_matches_thinned_oracle(rng):
    cfg = RaConfig(acb=True)
    backlog = np.arange(500)
    p = dynamic_barring_factor(500, 64)
    wins = [ra_round(backlog, cfg, rng).succeeded.size for _ in range(10_000)]
    expected = thinned_singleton_mean(500, p, 64)
    # closed form for a Bernoulli-thinned population
    assert expected == pytest.approx(500 * p * (1 - p / 64) ** 499, rel=1e-9)
    assert within_3se(wins, expected)


def test_ra_without_acb_ignores_barring(rng):
    res = ra_round(np.arange(10), RaConfig(acb=False, barring_factor=0.0), rng)
    assert res.succeeded.size + res.collided.size == 10


def test_oma_round_examples(rng):
    assert list(oma_round([3], 4, 2000.0, 1024, rng).winners) == [3]
    assert oma_round([1, 2], 1, 2000.0, 1024, rng).winners.size == 0
    # a lone device still fails when the resource cannot carry the message
    assert oma_round([3], 4, 1000.0, 1024, rng).winners.size == 0


def test_oma_round_singleton_oracle(rng):
    wins = [oma_round(np.arange(10), 10, 2000.0, 1024, rng).winners.size for _ in range(10_000)]
    assert singleton_mean(10, 10) == pytest.approx(3.874, abs=1e-3)
    assert within_3se(wins, singleton_mean(10, 10))


def test_noma_single_device_decoded(rng):
    cfg = NomaConfig(FEASIBLE, num_subbands=1, seed_space=1)
    (out,) = noma_round([5], cfg, rng)
    assert list(out.decoded_devices) == [5]
    assert out.estimated_load == 1


def test_noma_forced_collision(rng):
    cfg = NomaConfig(FEASIBLE, num_subbands=1, seed_space=1)
    (out,) = noma_round([1, 2], cfg, rng)
    assert set(out.collided_devices) == {1, 2}
    assert out.decoded_devices.size == 0 and out.clean_devices.size == 0


def test_noma_round_partition_invariants():
    rng = np.random.default_rng(99)
    configs = [NomaConfig(FEASIBLE, num_subbands=k, seed_space=s)
               for k in (1, 2, 3, 4) for s in (1, 2, 8, 64)]
    for _ in range(100_000):
        cfg = configs[rng.integers(len(configs))]
        n = int(rng.integers(0, 40))
        active = np.unique(rng.integers(0, 1000, size=n))
        outcomes = noma_round(active, cfg, rng)
        assert [o.subband_index for o in outcomes] == list(range(cfg.num_subbands))
        # clean and collided tile the active set with no overlap
        tiles = np.concatenate([np.concatenate([o.clean_devices, o.collided_devices])
                                for o in outcomes])
        np.testing.assert_array_equal(np.sort(tiles), active)
        for o in outcomes:
            limit = noma_max_load(cfg.load_model, o.collided_devices.size)
            assert o.decoded_devices.size == min(o.clean_devices.size, limit)
            np.testing.assert_array_equal(o.decoded_devices,
                                          o.clean_devices[:o.decoded_devices.size])


def test_noma_decodes_in_ascending_id_order(rng):
    cfg = NomaConfig(SubbandLoadModel(100.0, 500, 1024), num_subbands=1, seed_space=2**20)
    (out,) = noma_round(np.arange(100, 120), cfg, rng)
    limit = noma_max_load(cfg.load_model, out.collided_devices.size)
    np.testing.assert_array_equal(out.decoded_devices, out.clean_devices[:limit])
    assert np.all(np.diff(out.clean_devices) > 0)


def test_noma_load_estimate_tracks_subband_population(rng):
    cfg = NomaConfig(FEASIBLE, num_subbands=4)
    for _ in range(200):
        outcomes = noma_round(np.arange(60), cfg, rng)
        for o in outcomes:
            assert o.estimated_load == o.clean_devices.size + o.collided_devices.size


def test_noma_collision_rate_small_seed_space(rng):
    n, k, s = 12, 2, 8
    cfg = NomaConfig(FEASIBLE, num_subbands=k, seed_space=s)
    fractions = []
    for _ in range(10_000):
        outs = noma_round(np.arange(n), cfg, rng)
        fractions.append(sum(o.collided_devices.size for o in outs) / n)
    assert within_3se(fractions, seed_collision_probability(n, k, s))


def _mean_decoded(cfg, n, rounds, seed):
    rng = np.random.default_rng(seed)
    out = [sum(o.decoded_devices.size for o in noma_round(np.arange(n), cfg, rng))
           for _ in range(rounds)]
    return np.mean(out), np.std(out, ddof=1) / math.sqrt(rounds)


def test_noma_monotone_in_seed_space():
    means = [_mean_decoded(NomaConfig(FEASIBLE, num_subbands=2, seed_space=s), 16, 4000, 1)
             for s in (1, 4, 16, 256, 2**16)]
    for (m0, e0), (m1, e1) in zip(means, means[1:]):
        assert m1 >= m0 - 3 * math.hypot(e0, e1)


def test_noma_monotone_in_gamma():
    means = [_mean_decoded(NomaConfig(SubbandLoadModel(g, 1000, 1024), num_subbands=1), 30, 500, 2)
             for g in (1.0, 10.0, 100.0, 1000.0, 1e4)]
    for (m0, e0), (m1, e1) in zip(means, means[1:]):
        assert m1 >= m0 - 3 * math.hypot(e0, e1)


def test_noma_beats_uncoordinated_oma_beyond_its_peak(rng):
    # one NOMA subband against ten orthogonal resources over the same symbols
    noma_cfg = NomaConfig(SubbandLoadModel(100.0, 10_000, 1024), num_subbands=1)
    for n in (10, 20, 40):
        oma = np.mean([oma_round(np.arange(n), 10, 6000.0, 1024, rng).winners.size
                       for _ in range(2000)])
        noma = np.mean([noma_round(np.arange(n), noma_cfg, rng)[0].decoded_devices.size
                        for _ in range(500)])
        assert noma >= oma


def test_overhead_tally_examples():
    assert overhead_tally(Scheme.RA, 0, 0, RaConfig()) == OverheadTally(0, 0)
    assert overhead_tally(Scheme.RA, 1, 0, RaConfig()) == OverheadTally(59, 136)
    assert overhead_tally(Scheme.ACB_RA, 3, 5, RaConfig(msg1_bytes=7)) == OverheadTally(3 * 59 + 35, 3 * 136)
    noma = NomaConfig(FEASIBLE, per_tx_overhead_bytes=16, ack_bytes=2)
    assert overhead_tally(Scheme.NOMA, 10, 0, noma) == OverheadTally(160, 20)
    assert overhead_tally(Scheme.FDMA, 2, 1, OmaConfig()) == OverheadTally(48, 4)
    with pytest.raises(ValueError):
        overhead_tally(Scheme.NOMA, -1, 0, noma)
