from itertools import combinations
from math import comb, floor, log2

import numpy as np
import pytest

from subthz.indexmod import (FilterBank, FsimConfig, GsmConfig, build_default_bank,
                             build_rrc_bank, fsim_bits_per_symbol, fsim_map, fsim_modulate,
                             gsm_bits_per_symbol, gsm_frame, gsm_legal_combinations, gsm_map,
                             merge_streams, smx_bits_per_symbol, smx_fsim_frame, split_streams)
from subthz.modem import build_constellation, build_rrc, shape


def _formula_gsm(nt, na, m):
    return floor(log2(comb(nt, na))) + na * int(log2(m))


@pytest.mark.parametrize("nt,na,m,expected", [(10, 3, 4, 12), (2, 1, 2, 2), (4, 2, 4, 6)])
def test_gsm_bits_examples(nt, na, m, expected):
    assert gsm_bits_per_symbol(nt, na, m) == expected


def test_bits_formulas_on_grid():
    for nt in range(1, 11):
        for na in range(1, nt + 1):
            for m in (2, 4, 16, 64):
                assert gsm_bits_per_symbol(nt, na, m) == _formula_gsm(nt, na, m)
    for n in (1, 2, 4, 8):
        for m in (2, 4, 16):
            assert fsim_bits_per_symbol(n, m) == int(log2(n)) + int(log2(m))
            for nt in (1, 2, 4, 8):
                assert smx_bits_per_symbol(nt, n, m) == nt * (int(log2(n)) + int(log2(m)))


@pytest.mark.parametrize("n,m,expected", [(2, 4, 3), (1, 16, 4), (4, 4, 4)])
def test_fsim_bits_examples(n, m, expected):
    assert fsim_bits_per_symbol(n, m) == expected


def test_smx_examples():
    assert smx_bits_per_symbol(4, 2, 4) == 12
    assert smx_bits_per_symbol(8, 2, 4) == 24


def test_legal_combinations():
    assert gsm_legal_combinations(4, 2) == ((0, 1), (0, 2), (0, 3), (1, 2))
    assert gsm_legal_combinations(2, 1) == ((0,), (1,))
    c = gsm_legal_combinations(10, 3)
    assert len(c) == 64 and len(set(c)) == 64
    assert all(len(set(s)) == 3 for s in c)
    assert list(c) == list(combinations(range(10), 3))[:64]


def test_legal_combinations_explicit_and_invalid():
    custom = [(2, 3), (0, 1), (1, 3), (0, 2)]
    assert gsm_legal_combinations(4, 2, custom) == ((2, 3), (0, 1), (1, 3), (0, 2))
    for bad in ([(0, 1)] * 4, [(0, 1), (0, 2), (0, 3)], [(0, 1), (0, 2), (0, 3), (0, 4)]):
        with pytest.raises(ValueError):
            gsm_legal_combinations(4, 2, bad)
    with pytest.raises(ValueError):
        gsm_legal_combinations(3, 4)


def test_gsm_map_bpsk_example():
    cfg = GsmConfig(2, 1, build_constellation("psk", 2))
    combo, syms = gsm_map(cfg, [0, 1])
    assert list(combo) == [0] and syms[0, 0] == -1
    X = gsm_frame(cfg, [0, 1, 1, 0])
    assert np.array_equal(X, np.array([[-1, 0], [0, 1]], dtype=complex))


def test_gsm_frame_structure(rng):
    cfg = GsmConfig(10, 3, build_constellation("qam", 4))
    bits = rng.integers(0, 2, cfg.bits_per_symbol * 500)
    X = gsm_frame(cfg, bits)
    assert X.shape == (10, 500)
    assert np.all(np.count_nonzero(X, axis=0) == 3)
    combo, syms = gsm_map(cfg, bits)
    for k in range(500):
        active = np.flatnonzero(X[:, k])
        assert tuple(active) == cfg.combinations[combo[k]]
        assert np.allclose(X[active, k], syms[k])


def test_gsm_map_rejects_ragged():
    cfg = GsmConfig(4, 2, build_constellation("qam", 4))
    with pytest.raises(ValueError):
        gsm_map(cfg, np.zeros(7, dtype=int))


@pytest.mark.parametrize("n", [2, 4])
def test_default_bank_properties(n):
    bank = build_default_bank(n)
    R = bank.cross_correlation
    assert np.allclose(np.diag(R), 1, atol=1e-12)
    # zero-lag normalized correlation recomputed from the taps
    T = bank.taps
    for i in range(n):
        for j in range(i + 1, n):
            rho = abs(T[i] @ T[j]) / np.sqrt((T[i] @ T[i]) * (T[j] @ T[j]))
            assert rho < 0.95
    assert bank.max_correlation() < 0.95


def test_default_bank_rejects_single_filter():
    with pytest.raises(ValueError):
        build_default_bank(1)


def test_fsim_config_enforces_correlation_bound():
    close = build_rrc_bank([0.3, 0.9])
    assert close.max_correlation() > 0.95
    with pytest.raises(ValueError):
        FsimConfig(close, build_constellation("qam", 4))
    FsimConfig(close, build_constellation("qam", 4), corr_max=0.99)


def test_filter_bank_requires_shared_geometry():
    with pytest.raises(ValueError):
        FilterBank((build_rrc(0.3, 8, 8), build_rrc(0.3, 6, 8)))


def test_fsim_single_symbol_is_scaled_filter():
    bank = build_default_bank(2)
    for i in range(2):
        w = fsim_modulate([i], [0.5 - 2j], bank)
        assert np.allclose(w, (0.5 - 2j) * bank.filters[i].taps)


def test_fsim_single_filter_bank_equals_shape(rng):
    f = build_rrc(0.3, 8, 8)
    cfg = FsimConfig(FilterBank((f,)), build_constellation("qam", 4))
    bits = rng.integers(0, 2, 2 * 100)
    idx, syms = fsim_map(cfg, bits)
    assert not np.any(idx)
    assert np.allclose(fsim_modulate(idx, syms, cfg.bank), shape(syms, f))


def test_fsim_map_index_bits_first():
    cfg = FsimConfig(build_default_bank(2), build_constellation("qam", 4))
    idx, syms = fsim_map(cfg, [1, 0, 0, 0, 1, 1])
    assert list(idx) == [1, 0]
    assert np.allclose(syms, np.array([1 + 1j, -1 - 1j]) / np.sqrt(2))


def test_smx_consumes_nt_times_stream_bits(rng):
    cfg = FsimConfig(build_default_bank(2), build_constellation("qam", 4))
    for nt, per_period in ((4, 12), (8, 24)):
        bits = rng.integers(0, 2, per_period * 50)
        W = smx_fsim_frame(nt, cfg, bits)
        assert W.shape[0] == nt
        assert W.shape[1] == 49 * 8 + len(cfg.bank.filters[0])
        with pytest.raises(ValueError):
            smx_fsim_frame(nt, cfg, bits[:-1])


def test_smx_nt1_matches_fsim(rng):
    cfg = FsimConfig(build_default_bank(2), build_constellation("qam", 4))
    bits = rng.integers(0, 2, 300)
    W = smx_fsim_frame(1, cfg, bits)
    assert np.allclose(W[0], fsim_modulate(*fsim_map(cfg, bits), cfg.bank))


def test_stream_split_roundtrip(rng):
    bits = rng.integers(0, 2, 3 * 4 * 20)
    streams = split_streams(bits, 4, 3)
    assert np.array_equal(streams[1][:3], bits[3:6])
    assert np.array_equal(merge_streams(streams, 3), bits)
