"""Index modulation: GSM antenna-set indexing, FSIM filter-shape indexing
and SMX-FSIM (independent FSIM streams on every transmit antenna).

In every mapper the index bits of a symbol period come first, followed by
the APM bits.  Antenna indices are 0-based.
"""
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np
from scipy.optimize import least_squares

from .modem import (Constellation, PulseFilter, bits_to_int, build_rrc, map_bits,
                    _log2_exact)

__all__ = [
    "GsmConfig", "FilterBank", "FsimConfig", "gsm_bits_per_symbol",
    "gsm_legal_combinations", "gsm_map", "gsm_frame", "fsim_bits_per_symbol",
    "smx_bits_per_symbol", "build_default_bank", "build_rrc_bank",
    "fsim_map", "fsim_modulate", "smx_fsim_frame", "split_streams",
    "merge_streams",
]


def _floor_log2(x):
    return int(x).bit_length() - 1


def gsm_bits_per_symbol(nt, na, m):
    if not 1 <= na <= nt:
        raise ValueError(f"need 1 <= Na <= Nt, got Na={na}, Nt={nt}")
    return na * _log2_exact(m) + _floor_log2(comb(nt, na))


def gsm_legal_combinations(nt, na, strategy="lexicographic"):
    """Antenna subsets used by the GSM index.

    ``strategy`` is ``"lexicographic"`` (first ``2**floor(log2 C(Nt,Na))``
    subsets in lexicographic order) or an explicit list of subsets.
    """
    if not 1 <= na <= nt:
        raise ValueError(f"need 1 <= Na <= Nt, got Na={na}, Nt={nt}")
    count = 1 << _floor_log2(comb(nt, na))
    if isinstance(strategy, str):
        if strategy != "lexicographic":
            raise ValueError(f"unknown combination strategy {strategy!r}")
        out = []
        for c in combinations(range(nt), na):
            out.append(c)
            if len(out) == count:
                break
        return tuple(out)
    subsets = [tuple(sorted(int(a) for a in s)) for s in strategy]
    if len(subsets) != count:
        raise ValueError(f"expected {count} subsets, got {len(subsets)}")
    if len(set(subsets)) != len(subsets):
        raise ValueError("duplicate antenna subsets")
    for s in subsets:
        if len(s) != na or len(set(s)) != na or s[0] < 0 or s[-1] >= nt:
            raise ValueError(f"invalid antenna subset {s}")
    return tuple(subsets)


@dataclass(frozen=True, eq=False)
class GsmConfig:
    nt: int
    na: int
    constellation: Constellation
    combinations: tuple = None

    def __post_init__(self):
        if self.combinations is None:
            object.__setattr__(self, "combinations",
                               gsm_legal_combinations(self.nt, self.na))
        else:
            object.__setattr__(self, "combinations",
                               gsm_legal_combinations(self.nt, self.na, self.combinations))

    @property
    def index_bits(self):
        return _floor_log2(len(self.combinations))

    @property
    def apm_bits(self):
        return self.na * self.constellation.bits_per_symbol

    @property
    def bits_per_symbol(self):
        return self.index_bits + self.apm_bits


def gsm_map(cfg, bits):
    """Return ``(combination index per period, K x Na APM symbols)``."""
    bits = np.asarray(bits)
    b = cfg.bits_per_symbol
    if bits.size % b:
        raise ValueError(f"bit count {bits.size} not a multiple of {b}")
    blocks = bits.reshape(-1, b)
    if cfg.index_bits:
        combo = bits_to_int(blocks[:, : cfg.index_bits], cfg.index_bits)
    else:
        combo = np.zeros(len(blocks), dtype=np.int64)
    syms = map_bits(cfg.constellation, blocks[:, cfg.index_bits:].reshape(-1))
    return combo, syms.reshape(len(blocks), cfg.na)


def gsm_frame(cfg, bits):
    """Nt x K transmit matrix with exact zeros on inactive antennas."""
    combo, syms = gsm_map(cfg, bits)
    active = np.asarray(cfg.combinations)[combo]
    X = np.zeros((cfg.nt, len(combo)), dtype=complex)
    cols = np.repeat(np.arange(len(combo)), cfg.na)
    X[active.reshape(-1), cols] = syms.reshape(-1)
    return X


def fsim_bits_per_symbol(n, m):
    return _log2_exact(m) + _log2_exact(n)


def smx_bits_per_symbol(nt, n, m):
    return nt * fsim_bits_per_symbol(n, m)


@dataclass(frozen=True, eq=False)
class FilterBank:
    filters: tuple

    def __post_init__(self):
        fs = tuple(self.filters)
        if not fs:
            raise ValueError("empty filter bank")
        if len({(f.sps, f.span, len(f)) for f in fs}) != 1:
            raise ValueError("bank filters must share sps, span and length")
        object.__setattr__(self, "filters", fs)

    def __len__(self):
        return len(self.filters)

    @property
    def sps(self):
        return self.filters[0].sps

    @property
    def span(self):
        return self.filters[0].span

    @property
    def taps(self):
        return np.array([f.taps for f in self.filters])

    @property
    def cross_correlation(self):
        T = self.taps
        return T @ T.T

    def max_correlation(self):
        R = self.cross_correlation
        d = np.sqrt(np.diag(R))
        Rn = np.abs(R / np.outer(d, d))
        np.fill_diagonal(Rn, 0.0)
        return float(Rn.max()) if len(self) > 1 else 0.0


@dataclass(frozen=True, eq=False)
class FsimConfig:
    bank: FilterBank
    constellation: Constellation
    corr_max: float = 0.95

    def __post_init__(self):
        _log2_exact(len(self.bank))
        for f in self.bank.filters:
            if abs(f.energy - 1.0) > 1e-9:
                raise ValueError("bank filters must have unit energy")
        if self.bank.max_correlation() >= self.corr_max:
            raise ValueError(
                f"bank correlation {self.bank.max_correlation():.4f} >= {self.corr_max}")

    @property
    def n_filters(self):
        return len(self.bank)

    @property
    def index_bits(self):
        return _log2_exact(len(self.bank))

    @property
    def bits_per_symbol(self):
        return self.index_bits + self.constellation.bits_per_symbol


def _odd_partner(even, sps, weight=0.05):
    """Odd pulse occupying the same band as a roll-off-1 RRC.

    Starts from ``t * rrc(t)``, whose untruncated form is orthogonal to the
    RRC at every symbol shift and Nyquist with itself, then refits the taps so
    the truncated pulse keeps both properties.  ``weight`` pulls the fit
    towards the analytic shape to limit out-of-band energy.
    """
    L = len(even)
    c = L - 1
    t = (np.arange(L) - (L - 1) / 2) / sps
    h0 = t * even
    h0 /= np.linalg.norm(h0)
    half = L // 2

    def full(p):
        return np.concatenate([-p[::-1], [0.0], p])

    def resid(p):
        h = full(p)
        auto = np.convolve(h, h[::-1])[c + sps:: sps]
        cross = np.convolve(even, h[::-1])[c % sps:: sps]
        return np.concatenate([auto, cross, [h @ h - 1.0], weight * (h - h0)])

    sol = least_squares(resid, h0[half + 1:], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    h = full(sol.x)
    return h / np.linalg.norm(h)


def build_default_bank(n=2, sps=8, span=8):
    """Default FSIM bank.

    N=2: an RRC with roll-off 1 and its odd same-band partner (near-zero
    correlation at every symbol shift).  N=4: the same two pulses plus their
    normalized sum and difference, i.e. four directions in the pulse plane
    at 45 degree steps.
    """
    if n not in (2, 4):
        raise ValueError(f"default bank supports N in {{2, 4}}, got {n}")
    even = build_rrc(1.0, span, sps).taps
    odd = _odd_partner(np.asarray(even), sps)
    shapes = [even, odd]
    if n == 4:
        shapes += [(even + odd) / np.sqrt(2), (even - odd) / np.sqrt(2)]
    filters = []
    for i, h in enumerate(shapes):
        h = np.asarray(h, dtype=float)
        h = h / np.linalg.norm(h)
        h.setflags(write=False)
        filters.append(PulseFilter(h, sps, span, symmetric=(i == 0)))
    bank = FilterBank(tuple(filters))
    if bank.max_correlation() >= 0.95:
        raise ValueError("default bank violates the correlation bound")
    return bank


def build_rrc_bank(betas, sps=8, span=8):
    """Bank of RRC pulses with different roll-offs and a common span."""
    return FilterBank(tuple(build_rrc(b, span, sps) for b in betas))


def fsim_map(cfg, bits):
    """Return ``(filter index per symbol, APM symbols)``."""
    bits = np.asarray(bits)
    b = cfg.bits_per_symbol
    if bits.size % b:
        raise ValueError(f"bit count {bits.size} not a multiple of {b}")
    blocks = bits.reshape(-1, b)
    nb = cfg.index_bits
    if nb:
        idx = bits_to_int(blocks[:, :nb], nb)
    else:
        idx = np.zeros(len(blocks), dtype=np.int64)
    syms = map_bits(cfg.constellation, blocks[:, nb:].reshape(-1))
    return idx, syms


def fsim_modulate(indices, symbols, bank):
    """Sum of ``symbol_k * filter[index_k]`` delayed by ``k`` symbol periods."""
    indices = np.asarray(indices)
    symbols = np.asarray(symbols, dtype=complex)
    if indices.shape != symbols.shape:
        raise ValueError("indices and symbols differ in length")
    K = symbols.size
    if K == 0:
        return np.zeros(0, dtype=complex)
    S = bank.sps
    out = np.zeros((K - 1) * S + len(bank.filters[0]), dtype=complex)
    for i, f in enumerate(bank.filters):
        up = np.zeros((K - 1) * S + 1, dtype=complex)
        up[::S] = np.where(indices == i, symbols, 0)
        out += np.convolve(up, f.taps)
    return out


def split_streams(bits, nt, bits_per_stream_symbol):
    """Split bits into ``nt`` streams, one symbol group per stream in turn."""
    bits = np.asarray(bits)
    b = nt * bits_per_stream_symbol
    if bits.size % b:
        raise ValueError(f"bit count {bits.size} not a multiple of {b}")
    blocks = bits.reshape(-1, nt, bits_per_stream_symbol)
    return [blocks[:, t, :].reshape(-1) for t in range(nt)]


def merge_streams(streams, bits_per_stream_symbol):
    arr = np.stack([np.asarray(s).reshape(-1, bits_per_stream_symbol) for s in streams], axis=1)
    return arr.reshape(-1)


def smx_fsim_frame(nt, cfg, bits):
    """Nt x samples matrix of independently FSIM-modulated streams."""
    streams = split_streams(bits, nt, cfg.bits_per_symbol)
    rows = [fsim_modulate(*fsim_map(cfg, s), cfg.bank) for s in streams]
    return np.array(rows)
