"""Impairments and propagation: AWGN, Gaussian phase noise, free-space and
atmospheric loss, antenna patterns and the spherical-wave LoS MIMO matrix.
"""
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "C", "PhaseNoiseModel", "AntennaPattern", "AtmosphericProfile",
    "LosMimoGeometry", "pn_variance", "add_phase_noise", "add_awgn",
    "fspl_dB", "atmospheric_loss_dB", "antenna_gain_dBi", "los_mimo_matrix",
    "rayleigh_spacing", "apply_mimo", "DEFAULT_ATMOSPHERE", "D2D_PATTERN",
]

C = 299792458.0


def pn_variance(floor_dBcHz, bandwidth_Hz):
    """Variance (rad^2) of white phase noise with a flat floor over the band."""
    if bandwidth_Hz <= 0:
        raise ValueError("bandwidth must be positive")
    if floor_dBcHz is None or np.isneginf(floor_dBcHz):
        return 0.0
    return 10.0 ** (floor_dBcHz / 10.0) * bandwidth_Hz


@dataclass(frozen=True)
class PhaseNoiseModel:
    floor_dBcHz: float
    bandwidth_Hz: float

    @property
    def sigma2_rad2(self):
        return pn_variance(self.floor_dBcHz, self.bandwidth_Hz)


def add_phase_noise(signal, sigma2, rng):
    """Multiply every sample by ``exp(1j*phi)``, phi ~ N(0, sigma2) i.i.d."""
    if sigma2 < 0:
        raise ValueError(f"phase noise variance must be >= 0, got {sigma2}")
    signal = np.asarray(signal, dtype=complex)
    if sigma2 == 0:
        return signal.copy()
    phi = rng.normal(0.0, np.sqrt(sigma2), size=signal.shape)
    return signal * np.exp(1j * phi)


def add_awgn(signal, rng, noise_power=None, snr_dB=None):
    """Add circular complex Gaussian noise.

    Give either ``noise_power`` (total variance per complex sample) or
    ``snr_dB``, in which case the power is referenced to the measured mean
    power of ``signal``.
    """
    signal = np.asarray(signal, dtype=complex)
    if (noise_power is None) == (snr_dB is None):
        raise ValueError("give exactly one of noise_power or snr_dB")
    if snr_dB is not None:
        noise_power = np.mean(np.abs(signal) ** 2) / 10.0 ** (snr_dB / 10.0)
    if noise_power < 0:
        raise ValueError("noise power must be >= 0")
    if noise_power == 0:
        return signal.copy()
    scale = np.sqrt(noise_power / 2.0)
    noise = rng.standard_normal(signal.shape) + 1j * rng.standard_normal(signal.shape)
    return signal + scale * noise


def fspl_dB(f_Hz, d_m):
    f_Hz = np.asarray(f_Hz, dtype=float)
    d_m = np.asarray(d_m, dtype=float)
    if np.any(f_Hz <= 0) or np.any(d_m <= 0):
        raise ValueError("frequency and distance must be positive")
    out = 20.0 * np.log10(4.0 * np.pi * d_m * f_Hz / C)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AtmosphericProfile:
    """Specific attenuation table, dB/km against frequency in GHz."""
    freq_GHz: tuple
    dB_per_km: tuple
    extrapolate: bool = False

    def __post_init__(self):
        f = np.asarray(self.freq_GHz, dtype=float)
        if f.size < 1 or np.any(np.diff(f) <= 0) or np.any(f <= 0):
            raise ValueError("frequencies must be positive and strictly increasing")
        if len(self.dB_per_km) != f.size:
            raise ValueError("table columns differ in length")

    @classmethod
    def from_file(cls, path, extrapolate=False):
        """Load a two-column text file: ``frequency_GHz  dB_per_km``."""
        rows = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.replace(",", " ").split()
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 2 columns")
                rows.append((float(parts[0]), float(parts[1])))
        rows.sort()
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows), extrapolate)

    def specific_attenuation(self, f_Hz):
        f = f_Hz / 1e9
        table_f = np.asarray(self.freq_GHz, dtype=float)
        table_a = np.asarray(self.dB_per_km, dtype=float)
        if table_f.size == 1:
            if f != table_f[0] and not self.extrapolate:
                raise ValueError(f"{f} GHz outside atmospheric table")
            return float(table_a[0])
        if not table_f[0] <= f <= table_f[-1]:
            if not self.extrapolate:
                raise ValueError(
                    f"{f} GHz outside atmospheric table [{table_f[0]}, {table_f[-1]}] GHz")
            lf = np.log10(table_f)
            i = 0 if f < table_f[0] else -2
            slope = (table_a[i + 1] - table_a[i]) / (lf[i + 1] - lf[i])
            return float(max(table_a[i] + slope * (np.log10(f) - lf[i]), 0.0))
        return float(np.interp(np.log10(f), np.log10(table_f), table_a))


# Coarse clear-air attenuation at 7.5 g/m^3 water vapour, sea level.
DEFAULT_ATMOSPHERE = AtmosphericProfile(
    freq_GHz=(1.0, 10.0, 22.0, 40.0, 60.0, 80.0, 100.0, 118.75, 130.0, 150.0,
              170.0, 183.3, 200.0, 250.0, 300.0),
    dB_per_km=(0.006, 0.012, 0.2, 0.12, 15.0, 0.35, 0.42, 2.5, 1.2, 2.0,
               4.0, 28.0, 6.0, 5.0, 7.0),
)


def atmospheric_loss_dB(f_Hz, d_m, profile=DEFAULT_ATMOSPHERE):
    if d_m < 0:
        raise ValueError("distance must be >= 0")
    return profile.specific_attenuation(f_Hz) * d_m / 1000.0


@dataclass(frozen=True)
class AntennaPattern:
    boresight_gain_dBi: float = 32.0
    beamwidth_3dB_deg: float = 3.0
    sidelobe_floor_dBi: float = -20.0

    def __post_init__(self):
        if self.boresight_gain_dBi <= self.sidelobe_floor_dBi:
            raise ValueError("boresight gain must exceed the sidelobe floor")
        if self.beamwidth_3dB_deg <= 0:
            raise ValueError("beamwidth must be positive")


D2D_PATTERN = AntennaPattern(32.0, 3.0, -20.0)


def antenna_gain_dBi(pattern, offset_deg):
    """Quadratic (Gaussian main lobe) pattern clamped at the sidelobe floor."""
    offset = np.abs(np.asarray(offset_deg, dtype=float))
    g = pattern.boresight_gain_dBi - 12.0 * (offset / pattern.beamwidth_3dB_deg) ** 2
    out = np.maximum(g, pattern.sidelobe_floor_dBi)
    return float(out) if out.ndim == 0 else out


def rayleigh_spacing(carrier_Hz, distance_m, n):
    """Element spacing making an n x n broadside ULA pair orthogonal."""
    return np.sqrt(C / carrier_Hz * distance_m / n)


@dataclass(frozen=True)
class LosMimoGeometry:
    """Two facing uniform linear arrays, broadside, centred on a common axis."""
    carrier_Hz: float
    n_tx: int
    n_rx: int
    distance_m: float
    tx_spacing_m: float = None
    rx_spacing_m: float = None
    tx_pattern: AntennaPattern = field(default_factory=AntennaPattern)
    rx_pattern: AntennaPattern = field(default_factory=AntennaPattern)

    def __post_init__(self):
        if self.carrier_Hz <= 0:
            raise ValueError("carrier must be positive")
        if self.distance_m <= 0:
            raise ValueError("link distance must be positive")
        half_wave = C / self.carrier_Hz / 2
        for name in ("tx_spacing_m", "rx_spacing_m"):
            v = getattr(self, name)
            if v is None:
                object.__setattr__(self, name, half_wave)
            elif v <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def wavelength_m(self):
        return C / self.carrier_Hz

    def positions(self):
        tx = (np.arange(self.n_tx) - (self.n_tx - 1) / 2) * self.tx_spacing_m
        rx = (np.arange(self.n_rx) - (self.n_rx - 1) / 2) * self.rx_spacing_m
        return tx, rx


def los_mimo_matrix(geom):
    """n_rx x n_tx complex gains from exact element-to-element distances."""
    tx, rx = geom.positions()
    lateral = rx[:, None] - tx[None, :]
    d = np.hypot(geom.distance_m, lateral)
    offset = np.degrees(np.arctan2(np.abs(lateral), geom.distance_m))
    gain_dB = (antenna_gain_dBi(geom.tx_pattern, offset)
               + antenna_gain_dBi(geom.rx_pattern, offset)
               - fspl_dB(geom.carrier_Hz, d))
    amp = 10.0 ** (np.asarray(gain_dB) / 20.0)
    return amp * np.exp(-2j * np.pi * d / geom.wavelength_m)


def apply_mimo(H, X, rng=None, noise_power=0.0, pn_sigma2=0.0):
    """``Y = H X``, then independent phase noise per receive chain, then AWGN."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[None, :]
    if H.shape[1] != X.shape[0]:
        raise ValueError(f"H is {H.shape}, X has {X.shape[0]} rows")
    Y = H @ X
    if pn_sigma2 > 0:
        Y = add_phase_noise(Y, pn_sigma2, rng)
    if noise_power > 0:
        Y = add_awgn(Y, rng, noise_power=noise_power)
    return Y
