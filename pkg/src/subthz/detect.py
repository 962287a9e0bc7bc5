"""Receivers: joint ML for GSM, ZF/MMSE equalization, matched-filter-bank
FSIM detection and non-coherent energy detection of OOK.

Every exhaustive search orders its hypotheses by the integer value of their
bit pattern, so ties resolve to the lowest pattern.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import indexmod
from .modem import demap_labels, int_to_bits, matched_filter

__all__ = [
    "Mode", "DetectorConfig", "HypothesisBudgetError", "ml_gsm_detect",
    "gsm_candidates", "linear_equalize", "fsim_detect", "ed_threshold",
    "energy_detect", "ed_mimo_joint", "hard_frame_detect", "MAX_HYPOTHESES",
]

MAX_HYPOTHESES = 1 << 20


class HypothesisBudgetError(ValueError):
    pass


class Mode(str, Enum):
    ML_GSM = "ml_gsm"
    LINEAR_ZF = "zf"
    LINEAR_MMSE = "mmse"
    FSIM_BANK = "fsim_bank"
    ENERGY = "energy"


@dataclass(frozen=True)
class DetectorConfig:
    """Receiver settings.

    ``mode`` selects the equalizer for stream schemes (ZF or MMSE) and is
    implied for GSM (ML) and OOK (energy).  ``threshold`` is a number or
    one of ``"auto"``, ``"midpoint"``, ``"optimized"``.
    """
    mode: Mode = Mode.LINEAR_ZF
    n0: float = 0.0
    threshold: object = "auto"
    joint_ed: bool = True
    calibration_seed: int = 0


def gsm_candidates(cfg):
    """Nt x 2**b matrix whose column p transmits bit pattern p."""
    b = cfg.bits_per_symbol
    count = 1 << b
    if count > MAX_HYPOTHESES:
        raise HypothesisBudgetError(f"{count} hypotheses exceed the budget of {MAX_HYPOTHESES}")
    return indexmod.gsm_frame(cfg, int_to_bits(np.arange(count), b)), b


def _nearest_hypothesis(Y, HX, chunk=1 << 22):
    """argmin_p ||y_k - HX[:, p]||^2 for every column of Y."""
    C = HX.shape[1]
    energy = np.sum(np.abs(HX) ** 2, axis=0)
    HXh = HX.conj().T
    step = max(1, chunk // max(C, 1))
    out = np.empty(Y.shape[1], dtype=np.int64)
    for s in range(0, Y.shape[1], step):
        y = Y[:, s: s + step]
        metric = energy[:, None] - 2.0 * np.real(HXh @ y)
        out[s: s + step] = np.argmin(metric, axis=0)
    return out


def ml_gsm_detect(Y, H, cfg):
    """Joint ML over all (antenna set, APM vector) hypotheses."""
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    if H.shape != (Y.shape[0], cfg.nt):
        raise ValueError(f"H must be {Y.shape[0]}x{cfg.nt}, got {H.shape}")
    X, b = gsm_candidates(cfg)
    best = _nearest_hypothesis(Y, H @ X)
    return int_to_bits(best, b)


def linear_equalize(Y, H, mode="zf", n0=0.0):
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    mode = Mode(mode)
    if mode is Mode.LINEAR_ZF:
        if np.linalg.matrix_rank(H) < H.shape[1]:
            raise np.linalg.LinAlgError("ZF needs a full column rank channel")
        return np.linalg.pinv(H) @ Y
    if mode is Mode.LINEAR_MMSE:
        Hh = H.conj().T
        A = Hh @ H + n0 * np.eye(H.shape[1])
        return np.linalg.solve(A, Hh @ Y)
    raise ValueError(f"{mode} is not a linear equalizer")


def fsim_detect(waveform, bank, constellation, n_symbols=None):
    """Joint (filter, symbol) decision per symbol on the matched-filter outputs.

    Maximizes ``2 Re(conj(s) z_i) - |s|^2 R_ii`` where ``z_i`` is the output
    of the i-th matched filter and ``R`` the bank cross-correlation matrix.
    Interference from neighbouring symbols is not modelled.
    """
    waveform = np.asarray(waveform, dtype=complex)
    Z = np.array([matched_filter(waveform, f, n_symbols) for f in bank.filters])
    pts = constellation.points
    R = np.diag(bank.cross_correlation)
    metric = (2.0 * np.real(pts.conj()[None, :, None] * Z[:, None, :])
              - (np.abs(pts) ** 2)[None, :, None] * R[:, None, None])
    M = len(pts)
    best = np.argmax(metric.reshape(len(bank) * M, -1), axis=0)
    idx, labels = best // M, best % M
    nb = indexmod._floor_log2(len(bank))
    m = constellation.bits_per_symbol
    return idx, pts[labels], int_to_bits((idx << m) | labels, nb + m)


def ed_threshold(level0, level1, n0=None, policy="auto", rng=None, n_calibration=100_000):
    """Decision threshold on |y|^2 between two noiseless energy levels.

    ``optimized`` draws calibration noise and picks the threshold with the
    fewest errors; ``auto`` uses it when ``n0`` is known, else the midpoint.
    """
    if policy == "auto":
        policy = "optimized" if n0 else "midpoint"
    if policy == "midpoint" or (policy == "optimized" and not n0):
        return 0.5 * (level0 + level1)
    if policy != "optimized":
        raise ValueError(f"unknown threshold policy {policy!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    n = int(n_calibration)
    s = np.sqrt(n0 / 2.0)
    e0 = np.abs(np.sqrt(level0) + s * (rng.standard_normal(n) + 1j * rng.standard_normal(n))) ** 2
    e1 = np.abs(np.sqrt(level1) + s * (rng.standard_normal(n) + 1j * rng.standard_normal(n))) ** 2
    cand = np.sort(np.concatenate([e0, e1]))
    e0s, e1s = np.sort(e0), np.sort(e1)
    # errors(T) = #(e0 > T) + #(e1 <= T), evaluated at every sample point
    errs = (n - np.searchsorted(e0s, cand, side="right")) + np.searchsorted(e1s, cand, side="right")
    i = int(np.argmin(errs))
    upper = cand[i + 1] if i + 1 < cand.size else cand[i]
    return 0.5 * (cand[i] + upper)


def energy_detect(Y, threshold):
    """Per-antenna OOK decisions: bit 1 iff |y|^2 > threshold."""
    Y = np.asarray(Y)
    thr = np.asarray(threshold, dtype=float)
    if Y.ndim == 2 and thr.ndim == 1:
        thr = thr[:, None]
    return (np.abs(Y) ** 2 > thr).astype(np.uint8)


def ed_mimo_joint(Y, H, n0=0.0, max_hypotheses=256):
    """Joint OOK decision on receive energies.

    Picks the OOK vector x minimizing ``sum_m (|y_m|^2 - |(Hx)_m|^2 - n0)^2``
    (a Gaussian approximation of the energy statistics).  Returns bits in
    frame order, antenna index fastest.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    nt = H.shape[1]
    count = 1 << nt
    if count > max_hypotheses:
        raise HypothesisBudgetError(f"{count} OOK hypotheses exceed {max_hypotheses}")
    X = np.sqrt(2.0) * int_to_bits(np.arange(count), nt).reshape(count, nt).T
    E = np.abs(H @ X) ** 2 + n0
    P = np.abs(Y) ** 2
    metric = (np.sum(E ** 2, axis=0)[:, None] - 2.0 * E.T @ P)
    best = np.argmin(metric, axis=0)
    return int_to_bits(best, nt)


def _scalar_or_matrix(H, nt, nr):
    if H is None:
        if nt != nr:
            raise ValueError("channel matrix required when nt != nr")
        return np.eye(nt, dtype=complex)
    return np.atleast_2d(np.asarray(H, dtype=complex))


def hard_frame_detect(scheme, Y, H=None, cfg=DetectorConfig()):
    """Hard bits for a received frame, in transmitter bit order."""
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    H = _scalar_or_matrix(H, scheme.nt, Y.shape[0])
    name = scheme.name
    if name == "gsm":
        return ml_gsm_detect(Y, H, scheme.gsm)
    if name == "ook-ed":
        if scheme.nt > 1 and cfg.joint_ed:
            return ed_mimo_joint(Y, H, cfg.n0)
        if H.shape[0] != scheme.nt:
            raise ValueError("per-antenna energy detection needs a square channel")
        levels = 2.0 * np.abs(np.diag(H)) ** 2
        rng = np.random.default_rng(cfg.calibration_seed)
        if isinstance(cfg.threshold, (int, float)):
            thr = np.full(scheme.nt, float(cfg.threshold))
        else:
            thr = np.array([ed_threshold(0.0, lv, cfg.n0, cfg.threshold, rng) for lv in levels])
        return energy_detect(Y, thr).T.reshape(-1)
    mode = cfg.mode if cfg.mode in (Mode.LINEAR_ZF, Mode.LINEAR_MMSE) else Mode.LINEAR_ZF
    if H.shape == (1, 1) and scheme.nt == 1:
        Z = Y / H[0, 0]
    else:
        Z = linear_equalize(Y, H, mode, cfg.n0)
    if name == "qam":
        labels = demap_labels(scheme.constellation, Z.T.reshape(-1))
        return int_to_bits(labels, scheme.constellation.bits_per_symbol)
    fcfg = scheme.fsim
    L = len(fcfg.bank.filters[0])
    K = (Z.shape[1] - L) // fcfg.bank.sps + 1
    streams = [fsim_detect(z, fcfg.bank, fcfg.constellation, K)[2] for z in Z]
    return indexmod.merge_streams(streams, fcfg.bits_per_symbol)
