"""Transmit-side descriptions shared by the detectors and the simulator."""
from dataclasses import dataclass

import numpy as np

from . import indexmod
from .modem import Constellation, build_constellation, map_bits

__all__ = ["Scheme", "SCHEMES", "transmit", "make_scheme", "parse_modulation"]

SCHEMES = ("qam", "gsm", "fsim", "smx-fsim", "ook-ed")

_MODULATIONS = {
    "bpsk": ("psk", 2), "qpsk": ("qam", 4), "8psk": ("psk", 8),
    "16qam": ("qam", 16), "64qam": ("qam", 64), "256qam": ("qam", 256),
    "ook": ("ook", 2),
}


def parse_modulation(name, polar_rings=None):
    """``qpsk``, ``16qam``, ``8psk``, ``ook`` or ``polar<M>`` (e.g. polar64)."""
    name = name.lower()
    if name in _MODULATIONS:
        kind, m = _MODULATIONS[name]
        return build_constellation(kind, m)
    if name.startswith("polar") and name[5:].isdigit():
        return build_constellation("polar", int(name[5:]), polar_rings)
    raise ValueError(f"unknown modulation {name!r}")


@dataclass(frozen=True, eq=False)
class Scheme:
    """A transmission scheme.

    ``qam`` sends one APM stream per antenna (SISO when nt == 1), ``gsm``
    uses antenna-set indexing, ``fsim``/``smx-fsim`` send filter-indexed
    waveforms (nt == 1 for fsim) and ``ook-ed`` sends OOK on every antenna.
    """
    name: str
    constellation: Constellation
    nt: int = 1
    gsm: indexmod.GsmConfig = None
    fsim: indexmod.FsimConfig = None

    def __post_init__(self):
        if self.name not in SCHEMES:
            raise ValueError(f"unknown scheme {self.name!r}")
        if self.name == "gsm" and self.gsm is None:
            raise ValueError("gsm scheme needs a GsmConfig")
        if self.name in ("fsim", "smx-fsim") and self.fsim is None:
            raise ValueError(f"{self.name} scheme needs an FsimConfig")
        if self.name == "fsim" and self.nt != 1:
            raise ValueError("fsim is single-antenna; use smx-fsim")
        if self.name == "ook-ed" and self.constellation.kind.value != "ook":
            raise ValueError("ook-ed needs the OOK constellation")

    @property
    def waveform(self):
        return self.name in ("fsim", "smx-fsim")

    @property
    def bits_per_period(self):
        if self.name == "gsm":
            return self.gsm.bits_per_symbol
        if self.waveform:
            return self.nt * self.fsim.bits_per_symbol
        return self.nt * self.constellation.bits_per_symbol


def make_scheme(name, modulation="qpsk", nt=1, na=1, n_filters=2, sps=8, span=8,
                polar_rings=None):
    c = parse_modulation(modulation, polar_rings)
    if name == "ook-ed":
        c = build_constellation("ook", 2)
    gsm = fsim = None
    if name == "gsm":
        gsm = indexmod.GsmConfig(nt, na, c)
    elif name in ("fsim", "smx-fsim"):
        fsim = indexmod.FsimConfig(indexmod.build_default_bank(n_filters, sps, span), c)
    return Scheme(name, c, nt, gsm, fsim)


def transmit(scheme, bits):
    """Map bits to the nt x (symbols or samples) transmit matrix."""
    bits = np.asarray(bits)
    if bits.size % scheme.bits_per_period:
        raise ValueError(
            f"bit count {bits.size} not a multiple of {scheme.bits_per_period}")
    if scheme.name == "gsm":
        return indexmod.gsm_frame(scheme.gsm, bits)
    if scheme.waveform:
        return indexmod.smx_fsim_frame(scheme.nt, scheme.fsim, bits)
    syms = map_bits(scheme.constellation, bits)
    return syms.reshape(-1, scheme.nt).T.copy()
