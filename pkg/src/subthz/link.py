"""Monte-Carlo BER simulation over SNR sweeps.

Every frame draws from its own generator, ``default_rng([seed, point, frame])``,
so results do not depend on how points are scheduled across workers.

SNR is the ratio of the unit symbol energy of one stream to the noise
power ``N0`` per complex sample at one receive antenna.  LoS channels are
normalized to unit mean entry power so the same convention holds.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import channel
from .detect import DetectorConfig, Mode, ed_threshold, hard_frame_detect
from .fec import BchCode, decode_stream, encode_stream
from .scheme import SCHEMES, make_scheme, transmit

__all__ = ["RunConfig", "PointResult", "parse_sweep", "run_point", "run_sweep",
           "frame_rng", "BER_COLUMNS", "ber_csv"]

CHANNELS = ("identity", "rayleigh", "los")


def parse_sweep(spec):
    """``start:step:stop`` (inclusive) or a comma-separated list, in dB."""
    spec = str(spec).strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"sweep must be start:step:stop, got {spec!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"empty or invalid sweep {spec!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(n)]
    vals = [float(v) for v in spec.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty sweep")
    return vals


@dataclass(frozen=True)
class RunConfig:
    scheme: str = "qam"
    modulation: str = "qpsk"
    nt: int = 1
    nr: int = None
    na: int = 1
    n_filters: int = 2
    polar_rings: int = None
    channel: str = "identity"
    distance_m: float = 5.0
    spacing_m: float = None
    carrier_Hz: float = 150e9
    pn_floor_dBcHz: float = None
    bandwidth_Hz: float = 1e9
    snr_dB: tuple = (10.0,)
    noise: bool = True
    equalizer: str = "zf"
    code_t: int = 0
    seed: int = 0
    max_bits: int = 1_000_000
    max_errors: int = 100
    frame_periods: int = 256
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme: unknown scheme {self.scheme!r}")
        if self.channel not in CHANNELS:
            raise ValueError(f"channel: unknown channel {self.channel!r}")
        if not self.snr_dB:
            raise ValueError("snr: sweep is empty")
        if self.seed is None:
            raise ValueError("seed: a seed is required")
        if self.max_bits <= 0 or self.max_errors <= 0 or self.frame_periods <= 0:
            raise ValueError("max_bits/max_errors/frame_periods must be positive")
        if self.nr is None:
            object.__setattr__(self, "nr", self.nt)
        if self.channel == "identity" and self.nr != self.nt:
            raise ValueError("nr: identity channel needs nr == nt")
        if self.equalizer not in ("zf", "mmse"):
            raise ValueError(f"equalizer: unknown equalizer {self.equalizer!r}")

    def build_scheme(self):
        return make_scheme(self.scheme, self.modulation, self.nt, self.na,
                           self.n_filters, polar_rings=self.polar_rings)

    @property
    def pn_sigma2(self):
        if self.pn_floor_dBcHz is None:
            return 0.0
        return channel.pn_variance(self.pn_floor_dBcHz, self.bandwidth_Hz)


@dataclass
class PointResult:
    snr_dB: float
    bits: int = 0
    bit_errors: int = 0
    frames: int = 0
    frame_errors: int = 0
    decode_failures: int = 0

    @property
    def ber(self):
        return self.bit_errors / self.bits if self.bits else 0.0


def frame_rng(seed, point, frame):
    return np.random.default_rng([int(seed), int(point), int(frame)])


def _frame_sizes(cfg, scheme, code):
    """(information bits, coded bits) per frame."""
    bpp = scheme.bits_per_period
    if code.t == 0:
        n = bpp * cfg.frame_periods
        return n, n
    unit = bpp // math.gcd(bpp, code.n)
    blocks = unit * max(1, round(cfg.frame_periods * bpp / (unit * code.n)))
    return blocks * code.k, blocks * code.n


def _channel(cfg, rng):
    if cfg.channel == "identity":
        return np.eye(cfg.nr, cfg.nt, dtype=complex)
    if cfg.channel == "rayleigh":
        return (rng.standard_normal((cfg.nr, cfg.nt))
                + 1j * rng.standard_normal((cfg.nr, cfg.nt))) / np.sqrt(2)
    geom = channel.LosMimoGeometry(cfg.carrier_Hz, cfg.nt, cfg.nr, cfg.distance_m,
                                   cfg.spacing_m, cfg.spacing_m)
    H = channel.los_mimo_matrix(geom)
    return H / np.sqrt(np.mean(np.abs(H) ** 2))


def run_point(cfg, point_index, snr, scheme=None):
    scheme = scheme or cfg.build_scheme()
    code = BchCode(cfg.code_t)
    n_info, _ = _frame_sizes(cfg, scheme, code)
    n0 = 10.0 ** (-snr / 10.0) if cfg.noise else 0.0
    det = DetectorConfig(Mode(cfg.equalizer), n0)
    res = PointResult(snr)
    cached_thr = None
    frame = 0
    while res.bits < cfg.max_bits and res.bit_errors < cfg.max_errors:
        rng = frame_rng(cfg.seed, point_index, frame)
        info = rng.integers(0, 2, n_info, dtype=np.uint8)
        coded = encode_stream(code, info)
        X = transmit(scheme, coded)
        H = _channel(cfg, rng)
        Y = channel.apply_mimo(H, X, rng, n0, cfg.pn_sigma2)
        frame_cfg = det
        if scheme.name == "ook-ed" and scheme.nt == 1:
            # fixed SISO channel gain: calibrate once per point
            if cached_thr is None or cfg.channel == "rayleigh":
                thr = ed_threshold(0.0, 2.0 * abs(H[0, 0]) ** 2, n0, "auto",
                                   np.random.default_rng([cfg.seed, point_index, 1 << 30]))
                cached_thr = thr
            frame_cfg = replace(det, threshold=float(cached_thr))
        hard = hard_frame_detect(scheme, Y, H, frame_cfg)
        decoded, failures = decode_stream(code, hard)
        errors = int(np.count_nonzero(decoded != info))
        res.bits += n_info
        res.bit_errors += errors
        res.frames += 1
        res.frame_errors += errors > 0
        res.decode_failures += failures
        frame += 1
    return res


def run_sweep(cfg):
    scheme = cfg.build_scheme()
    jobs = list(enumerate(cfg.snr_dB))
    if cfg.workers <= 1:
        return [run_point(cfg, i, s, scheme) for i, s in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda j: run_point(cfg, j[0], j[1], scheme), jobs))


BER_COLUMNS = ("snr_dB", "bits", "bit_errors", "ber", "frames", "frame_errors")


def ber_csv(results):
    lines = [",".join(BER_COLUMNS)]
    for r in results:
        lines.append(f"{r.snr_dB:.6g},{r.bits},{r.bit_errors},{r.ber:.6g},"
                     f"{r.frames},{r.frame_errors}")
    return "\n".join(lines) + "\n"
