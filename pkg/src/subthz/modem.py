"""Constellations, bit mapping and pulse shaping.

Labels are integers whose binary expansion (MSB first) is the bit pattern
carried by a point, so ``points[label]`` is the transmitted symbol.

QAM uses per-axis Gray coding: the first half of the bits picks the in-phase
level and the second half the quadrature level, with bit value 0 on the
positive side.  QPSK therefore maps ``00 -> (1+1j)/sqrt(2)``,
``01 -> (1-1j)/sqrt(2)``, ``10 -> (-1+1j)/sqrt(2)``, ``11 -> (-1-1j)/sqrt(2)``.
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Kind", "Constellation", "PulseFilter", "build_constellation", "map_bits",
    "demap_hard", "build_rrc", "shape", "matched_filter", "bits_to_int",
    "int_to_bits", "gray", "inverse_gray",
]


class Kind(str, Enum):
    QAM = "qam"
    PSK = "psk"
    POLAR = "polar"
    OOK = "ook"


def gray(n):
    n = np.asarray(n)
    return n ^ (n >> 1)


def inverse_gray(g):
    g = np.array(g, dtype=np.int64, copy=True)
    mask = g >> 1
    while np.any(mask):
        g ^= mask
        mask >>= 1
    return g


def bits_to_int(bits, width):
    """Pack rows of ``width`` bits (MSB first) into integers."""
    bits = np.asarray(bits, dtype=np.int64).reshape(-1, width)
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return bits @ weights


def int_to_bits(values, width):
    values = np.asarray(values, dtype=np.int64).reshape(-1)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def _log2_exact(m):
    if m < 1 or (m & (m - 1)) != 0:
        raise ValueError(f"order must be a power of 2, got {m}")
    return m.bit_length() - 1


@dataclass(frozen=True, eq=False)
class Constellation:
    kind: Kind
    order: int
    points: np.ndarray
    rings: int = 1
    radii: np.ndarray = field(default=None, repr=False)

    @property
    def bits_per_symbol(self):
        return _log2_exact(self.order)

    @property
    def phases(self):
        return self.order // self.rings

    def energy(self):
        return float(np.mean(np.abs(self.points) ** 2))


def _qam_points(m):
    side = int(round(np.sqrt(m)))
    if side * side != m:
        raise ValueError(f"QAM order must be a square power of 2, got {m}")
    half = _log2_exact(side)
    labels = np.arange(m)
    gi = labels >> half
    gq = labels & (side - 1)
    i_amp = (side - 1) - 2 * inverse_gray(gi)
    q_amp = (side - 1) - 2 * inverse_gray(gq)
    pts = i_amp + 1j * q_amp
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


def _psk_points(m):
    k = inverse_gray(np.arange(m))
    pts = np.exp(2j * np.pi * k / m)
    # exact axis points (BPSK -1, not -1 + 1.2e-16j)
    return np.round(pts.real, 15) + 1j * np.round(pts.imag, 15)


def polar_radii(rings, phases):
    """Unit-energy ring radii for an ``rings x phases`` polar constellation.

    Rings are equally spaced, ``r_a = r_1 * (1 + a*s)`` with the spacing
    ``s = 2*sin(pi/P)`` equal to the inner ring chord, which maximizes the
    minimum distance of this ring family under the energy constraint.
    """
    if phases < 2:
        raise ValueError("polar constellation needs at least 2 phases per ring")
    s = 2.0 * np.sin(np.pi / phases)
    rel = 1.0 + s * np.arange(rings)
    return rel / np.sqrt(np.mean(rel ** 2))


def _polar_points(m, rings):
    if rings < 1 or m % rings != 0:
        raise ValueError(f"ring count {rings} must divide M={m}")
    phases = m // rings
    _log2_exact(rings)
    _log2_exact(phases)
    radii = polar_radii(rings, phases)
    pbits = _log2_exact(phases)
    labels = np.arange(m)
    ring_idx = inverse_gray(labels >> pbits)
    phase_idx = inverse_gray(labels & (phases - 1))
    theta = 2 * np.pi * phase_idx / phases + np.pi / phases
    return radii[ring_idx] * np.exp(1j * theta), radii


def build_constellation(kind, order, polar_rings=None):
    """Build a unit-energy, Gray-labelled constellation.

    ``polar_rings`` sets the ring count for POLAR; by default 4 phases per
    ring are used (M/4 rings), the phase-noise robust choice.
    """
    kind = Kind(kind)
    order = int(order)
    _log2_exact(order)
    rings, radii = 1, None
    if kind is Kind.QAM:
        pts = _qam_points(order)
    elif kind is Kind.PSK:
        pts = _psk_points(order)
    elif kind is Kind.OOK:
        if order != 2:
            raise ValueError("OOK has exactly 2 points")
        pts = np.array([0.0, np.sqrt(2.0)], dtype=complex)
    else:
        if polar_rings is None:
            polar_rings = max(order // 4, 1)
        pts, radii = _polar_points(order, int(polar_rings))
        rings = int(polar_rings)
    pts = np.asarray(pts, dtype=complex)
    pts.setflags(write=False)
    return Constellation(kind, order, pts, rings, radii)


def map_bits(c, bits):
    bits = np.asarray(bits)
    k = c.bits_per_symbol
    if bits.size % k:
        raise ValueError(f"bit count {bits.size} not a multiple of {k}")
    if bits.size == 0:
        return np.zeros(0, dtype=complex)
    return c.points[bits_to_int(bits, k)]


def demap_labels(c, symbols):
    """Hard decisions as integer labels (ties go to the lowest label)."""
    y = np.asarray(symbols, dtype=complex).reshape(-1)
    if c.kind is Kind.POLAR:
        # ring and phase are decided independently
        pbits = _log2_exact(c.phases)
        ring = np.argmin(np.abs(np.abs(y)[:, None] - c.radii[None, :]), axis=1)
        step = 2 * np.pi / c.phases
        ph = np.floor(np.mod(np.angle(y) - np.pi / c.phases + step / 2, 2 * np.pi) / step)
        ph = ph.astype(np.int64) % c.phases
        return (gray(ring) << pbits) | gray(ph)
    d = np.abs(y[:, None] - c.points[None, :]) ** 2
    return np.argmin(d, axis=1)


def demap_hard(c, symbols):
    return int_to_bits(demap_labels(c, symbols), c.bits_per_symbol)


@dataclass(frozen=True, eq=False)
class PulseFilter:
    taps: np.ndarray
    sps: int
    span: int
    symmetric: bool = True

    @property
    def peak_index(self):
        return (len(self.taps) - 1) // 2

    @property
    def energy(self):
        return float(np.sum(self.taps ** 2))

    def __len__(self):
        return len(self.taps)


def rrc_taps(beta, span, sps):
    """Unnormalized root-raised-cosine samples at t = n/sps, |t| <= span/2."""
    t = (np.arange(span * sps + 1) - span * sps / 2) / sps
    h = np.empty_like(t)
    singular = 1.0 / (4 * beta)
    for i, x in enumerate(t):
        if abs(x) < 1e-12:
            h[i] = 1 - beta + 4 * beta / np.pi
        elif abs(abs(x) - singular) < 1e-9:
            h[i] = beta / np.sqrt(2) * (
                (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
                + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
            )
        else:
            num = np.sin(np.pi * x * (1 - beta)) + 4 * beta * x * np.cos(np.pi * x * (1 + beta))
            h[i] = num / (np.pi * x * (1 - (4 * beta * x) ** 2))
    return h


def build_rrc(beta=0.3, span=8, sps=8):
    if not 0 < beta <= 1:
        raise ValueError(f"roll-off must be in (0, 1], got {beta}")
    if span < 4:
        raise ValueError(f"span must be >= 4 symbols, got {span}")
    if sps < 2:
        raise ValueError(f"samples per symbol must be >= 2, got {sps}")
    if (span * sps) % 2:
        raise ValueError("span * sps must be even for an odd, centred tap count")
    h = rrc_taps(beta, span, sps)
    h = h / np.sqrt(np.sum(h ** 2))
    h.setflags(write=False)
    return PulseFilter(h, int(sps), int(span))


def shape(symbols, f):
    """Upsample by ``f.sps`` and filter.  Output length ``(K-1)*sps + len(f)``."""
    symbols = np.asarray(symbols)
    if symbols.size == 0:
        return np.zeros(0, dtype=complex)
    up = np.zeros((symbols.size - 1) * f.sps + 1, dtype=np.result_type(symbols, float))
    up[:: f.sps] = symbols
    return np.convolve(up, f.taps)


def matched_filter(waveform, f, n_symbols=None, sps=None):
    """Correlate with ``f`` and sample at the symbol instants.

    The filter delay ``len(f) - 1`` is removed, so the k-th output lines up
    with the k-th transmitted symbol of :func:`shape`.
    """
    if sps is not None and sps != f.sps:
        raise ValueError(f"waveform has {sps} samples/symbol, filter expects {f.sps}")
    waveform = np.asarray(waveform)
    L = len(f.taps)
    if n_symbols is None:
        n_symbols = (waveform.size - L) // f.sps + 1
    if n_symbols <= 0:
        return np.zeros(0, dtype=complex)
    y = np.convolve(waveform, f.taps[::-1])
    return y[L - 1: L - 1 + n_symbols * f.sps: f.sps]
