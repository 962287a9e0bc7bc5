"""Link budgets, SNR to spectral-efficiency mapping, KPI rows, coverage
heatmaps and per-range link statistics.

CSV outputs use a fixed column order and 6 significant digits.
"""
import csv
import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import channel, indexmod

__all__ = [
    "LinkBudget", "CurveMode", "SeCurve", "default_curve", "snr_dB",
    "se_from_snr", "throughput_bps", "SchemeDescriptor", "scheme_rate_bps",
    "Scenario", "SCENARIOS", "kpi_table", "kpi_csv", "EnvironmentGrid",
    "GridFormatError", "parse_grid", "load_grid", "heatmap", "heatmap_csv",
    "link_stats", "THERMAL_NOISE_DBM_HZ", "fmt",
]

THERMAL_NOISE_DBM_HZ = -174.0


def fmt(x):
    return f"{x:.6g}"


@dataclass(frozen=True)
class LinkBudget:
    ptx_dBm: float
    gtx_dBi: float
    grx_dBi: float
    impl_losses_dB: float = 0.0
    noise_figure_dB: float = 0.0
    bandwidth_Hz: float = 1e9
    useful_fraction: float = 1.0

    def __post_init__(self):
        if self.bandwidth_Hz <= 0:
            raise ValueError("bandwidth must be positive")
        if not 0 < self.useful_fraction <= 1:
            raise ValueError("useful fraction must be in (0, 1]")

    @property
    def noise_dBm(self):
        return THERMAL_NOISE_DBM_HZ + 10.0 * np.log10(self.bandwidth_Hz)


def snr_dB(budget, pathloss_dB):
    return (budget.ptx_dBm + budget.gtx_dBi + budget.grx_dBi - pathloss_dB
            - budget.impl_losses_dB - budget.noise_figure_dB - budget.noise_dBm)


class CurveMode(str, Enum):
    NO_PN = "no_pn"
    STRONG_PN_QAM = "strong_pn_qam"
    STRONG_PN_POLAR = "strong_pn_polar"
    TABLE = "table"


CEILINGS = {
    CurveMode.NO_PN: 7.2,
    CurveMode.STRONG_PN_QAM: 2.5,
    CurveMode.STRONG_PN_POLAR: 5.5,
}


@dataclass(frozen=True, eq=False)
class SeCurve:
    mode: CurveMode
    snr_points_dB: np.ndarray
    se_points: np.ndarray
    ceiling: float

    def __post_init__(self):
        s = np.asarray(self.snr_points_dB, dtype=float)
        e = np.asarray(self.se_points, dtype=float)
        if s.size == 0 or s.shape != e.shape:
            raise ValueError("curve needs matching, non-empty point lists")
        if np.any(np.diff(s) <= 0):
            raise ValueError("SNR points must be strictly increasing")
        if np.any(np.diff(e) < 0):
            raise ValueError("SE points must be non-decreasing")
        if np.any(e > self.ceiling + 1e-12) or np.any(e < 0):
            raise ValueError("SE points must lie in [0, ceiling]")
        object.__setattr__(self, "snr_points_dB", s)
        object.__setattr__(self, "se_points", e)

    @classmethod
    def from_table(cls, points, ceiling=None):
        pts = sorted((float(a), float(b)) for a, b in points)
        s, e = zip(*pts)
        return cls(CurveMode.TABLE, np.array(s), np.array(e),
                   max(e) if ceiling is None else float(ceiling))

    @classmethod
    def load(cls, path, ceiling=None):
        """Two-column CSV (snr_dB, se); a non-numeric header row is skipped."""
        pts = []
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    pts.append((float(row[0]), float(row[1])))
                except ValueError:
                    if pts:
                        raise
        return cls.from_table(pts, ceiling)


def default_curve(mode):
    """Shannon bound capped at the mode's ceiling, sampled every 0.5 dB."""
    mode = CurveMode(mode)
    if mode is CurveMode.TABLE:
        raise ValueError("TABLE curves are built with SeCurve.from_table")
    ceiling = CEILINGS[mode]
    snr = np.arange(-30.0, 60.0 + 0.25, 0.5)
    se = np.minimum(np.log2(1.0 + 10.0 ** (snr / 10.0)), ceiling)
    return SeCurve(mode, snr, se, ceiling)


def se_from_snr(curve, snr):
    se = np.interp(snr, curve.snr_points_dB, curve.se_points)
    out = np.clip(se, 0.0, curve.ceiling)
    return float(out) if np.ndim(out) == 0 else out


def throughput_bps(se, bandwidth_Hz, useful_fraction=1.0):
    if np.any(np.asarray(se) < 0):
        raise ValueError("spectral efficiency must be >= 0")
    return se * bandwidth_Hz * useful_fraction


@dataclass(frozen=True)
class SchemeDescriptor:
    """``kind`` in {qam, smx-qam, gsm, fsim, smx-fsim, ook}."""
    kind: str
    m: int = 4
    nt: int = 1
    na: int = 1
    n_filters: int = 1

    def bits_per_symbol(self):
        k = self.kind
        if k == "gsm":
            return indexmod.gsm_bits_per_symbol(self.nt, self.na, self.m)
        if k in ("fsim", "smx-fsim"):
            return indexmod.smx_bits_per_symbol(self.nt, self.n_filters, self.m)
        if k in ("qam", "smx-qam", "ook"):
            return self.nt * indexmod.fsim_bits_per_symbol(1, self.m)
        raise ValueError(f"unknown scheme kind {k!r}")


def scheme_rate_bps(scheme, symbol_rate, code_rate=1.0):
    return scheme.bits_per_symbol() * symbol_rate * code_rate


@dataclass(frozen=True)
class Scenario:
    """One KPI row.  ``scheme=None`` means the rate comes from the SE curve."""
    id: str
    description: str
    pn_condition: str
    budget: LinkBudget
    ptx_range_dBm: tuple
    range_m: tuple
    scheme: SchemeDescriptor = None
    code_rate: float = 1.0
    curve: CurveMode = None
    symbol_rate: float = 1e9
    notes: str = ""


_CHANNEL_NOTE = "per 1 GHz channel (table header says 2 GHz)"

SCENARIOS = {s.id: s for s in (
    Scenario("backhaul", "LDPC coded SISO coherent P-QAM", "No PN",
             LinkBudget(20, 32, 32, 3, 10, 1e9, 0.8), (20, 20), (300, 300),
             curve=CurveMode.NO_PN,
             notes="7.2 b/s/Hz x 0.8 GHz = 5.76 Gbps; Table 3 prints 5.7"),
    Scenario("backhaul-strong-pn", "LDPC coded SISO coherent P-QAM", "Strong PN",
             LinkBudget(20, 32, 32, 3, 10, 1e9, 0.8), (20, 20), (300, 300),
             curve=CurveMode.STRONG_PN_POLAR,
             notes="polar scheme ceiling 5.5 b/s/Hz x 0.8 GHz"),
    Scenario("shortrange-gsm",
             "Uncoded 10x10 MIMO GSM-QPSK, 3 active TAs, joint ML", "Medium PN",
             LinkBudget(14, 10, 10, 0, 12), (-6, 14), (0.5, 5),
             scheme=SchemeDescriptor("gsm", 4, 10, 3)),
    Scenario("shortrange-smxfsim-4x10",
             "Uncoded 4x10 MIMO 2-FSIM-QPSK, linear receiver", "Medium PN",
             LinkBudget(10.5, 10, 10, 0, 12), (-9.5, 10.5), (0.5, 5),
             scheme=SchemeDescriptor("smx-fsim", 4, 4, 1, 2)),
    Scenario("d2d-smxfsim-8x8",
             "LDPC coded 8x8 MIMO 2-FSIM-QPSK, linear receiver", "Medium PN",
             LinkBudget(-36, 32, 32, 0, 10), (-56, -36), (0.5, 5),
             scheme=SchemeDescriptor("smx-fsim", 4, 8, 1, 2), code_rate=8 / 9,
             notes="code rate 8/9 inferred from 21.33/24"),
    Scenario("d2d-fsim-siso", "LDPC coded SISO 2-FSIM-QPSK, linear receiver",
             "Medium PN", LinkBudget(-48.3, 32, 32, 0, 10), (-68, -48.3), (0.5, 5),
             scheme=SchemeDescriptor("fsim", 4, 1, 1, 2), code_rate=8 / 9,
             notes="code rate 8/9 inferred from 2.67/3"),
    Scenario("d2d-ook-ed-8x8", "BCH coded 8x8 MIMO non-coherent OOK, energy detector",
             "Strong PN", LinkBudget(-43, 32, 32, 0, 10), (-43, -43), (5, 5),
             scheme=SchemeDescriptor("ook", 2, 8), code_rate=0.40625,
             notes="effective rate 0.40625 = 3.25/8 is not an exact BCH(63,k) rate"),
)}


def _scenario_row(sc, carrier_Hz, atmosphere):
    d = sc.range_m[1]
    pl = channel.fspl_dB(carrier_Hz, d) + channel.atmospheric_loss_dB(carrier_Hz, d, atmosphere)
    snr = snr_dB(sc.budget, pl)
    if sc.scheme is not None:
        tput = scheme_rate_bps(sc.scheme, sc.symbol_rate, sc.code_rate)
    else:
        se = se_from_snr(default_curve(sc.curve), snr)
        tput = throughput_bps(se, sc.budget.bandwidth_Hz, sc.budget.useful_fraction)
    lo, hi = sc.ptx_range_dBm
    notes = "; ".join(n for n in (sc.notes, _CHANNEL_NOTE) if n)
    return {
        "scenario": sc.id,
        "description": sc.description,
        "pn_condition": sc.pn_condition,
        "ptx_min_dBm": lo,
        "ptx_max_dBm": hi,
        "gain_tx_dBi": sc.budget.gtx_dBi,
        "gain_rx_dBi": sc.budget.grx_dBi,
        "losses_nf_dB": sc.budget.impl_losses_dB + sc.budget.noise_figure_dB,
        "range_min_m": sc.range_m[0],
        "range_max_m": d,
        "snr_at_max_range_dB": snr,
        "throughput_bps": tput,
        "notes": notes,
    }


KPI_COLUMNS = ("scenario", "description", "pn_condition", "ptx_min_dBm", "ptx_max_dBm",
               "gain_tx_dBi", "gain_rx_dBi", "losses_nf_dB", "range_min_m",
               "range_max_m", "snr_at_max_range_dB", "throughput_bps", "notes")


def kpi_table(ids="all", carrier_Hz=150e9, atmosphere=channel.DEFAULT_ATMOSPHERE):
    if ids == "all" or ids == ["all"]:
        ids = list(SCENARIOS)
    elif isinstance(ids, str):
        ids = [ids]
    unknown = [i for i in ids if i not in SCENARIOS]
    if unknown:
        raise KeyError(f"unknown scenario(s): {', '.join(unknown)}")
    return [_scenario_row(SCENARIOS[i], carrier_Hz, atmosphere) for i in ids]


def _write_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) if isinstance(r[c], (float, np.floating)) else r[c]
                    for c in columns])
    return buf.getvalue()


def kpi_csv(rows):
    return _write_csv(KPI_COLUMNS, rows)


class GridFormatError(ValueError):
    def __init__(self, message, line, column=None):
        where = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


GRID_CLASSES = {"L": "LOS", "O": "OLOS", "N": "NLOS"}


@dataclass(frozen=True, eq=False)
class EnvironmentGrid:
    """Row-major cell classes; ``cells[y][x]`` is one of L, O, N."""
    cells: tuple
    cell_size_m: float
    nodes: tuple = field(default=())

    @property
    def width(self):
        return len(self.cells[0])

    @property
    def height(self):
        return len(self.cells)

    def contains(self, x, y):
        return 0 <= x < self.width and 0 <= y < self.height


def parse_grid(text):
    """Parse ``width height cell_size_m`` then one line of L/O/N per row."""
    lines = text.splitlines()
    if not lines:
        raise GridFormatError("empty grid file", 1)
    head = lines[0].split()
    if len(head) != 3:
        raise GridFormatError("header must be 'width height cell_size_m'", 1)
    try:
        width, height = int(head[0]), int(head[1])
        size = float(head[2])
    except ValueError:
        raise GridFormatError("header must be 'width height cell_size_m'", 1) from None
    if width <= 0 or height <= 0 or size <= 0:
        raise GridFormatError("grid dimensions must be positive", 1)
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    rows = []
    for i, line in enumerate(body, start=2):
        row = line.rstrip("\r")
        for j, ch in enumerate(row, start=1):
            if ch not in GRID_CLASSES:
                raise GridFormatError(f"illegal cell character {ch!r}", i, j)
        if len(row) != width:
            raise GridFormatError(f"expected {width} cells, got {len(row)}", i)
        rows.append(row)
    if len(rows) != height:
        raise GridFormatError(f"expected {height} rows, got {len(rows)}", len(lines) + 1)
    return EnvironmentGrid(tuple(rows), size)


def load_grid(path):
    with open(path, encoding="utf-8") as fh:
        return parse_grid(fh.read())


HEATMAP_COLUMNS = ("x", "y", "class", "distance_m", "snr_dB", "throughput_bps")


def heatmap(grid, node, budget, curve, olos_excess_dB=10.0, carrier_Hz=150e9,
            atmosphere=channel.DEFAULT_ATMOSPHERE):
    """Per-cell throughput around ``node`` (cell coordinates ``(x, y)``).

    Distances are between cell centres, floored at half a cell.  NLOS cells
    carry no link (SNR reported as -inf, throughput 0).
    """
    nx, ny = node
    if not grid.contains(nx, ny):
        raise ValueError(f"node {node} outside {grid.width}x{grid.height} grid")
    rows = []
    for y in range(grid.height):
        for x in range(grid.width):
            cls = GRID_CLASSES[grid.cells[y][x]]
            d = max(np.hypot(x - nx, y - ny) * grid.cell_size_m, grid.cell_size_m / 2)
            if cls == "NLOS":
                snr, tput = float("-inf"), 0.0
            else:
                pl = channel.fspl_dB(carrier_Hz, d) + channel.atmospheric_loss_dB(
                    carrier_Hz, d, atmosphere)
                if cls == "OLOS":
                    pl += olos_excess_dB
                snr = snr_dB(budget, pl)
                tput = throughput_bps(se_from_snr(curve, snr), budget.bandwidth_Hz,
                                      budget.useful_fraction)
            rows.append({"x": x, "y": y, "class": cls, "distance_m": float(d),
                         "snr_dB": float(snr), "throughput_bps": float(tput)})
    return rows


def heatmap_csv(rows):
    return _write_csv(HEATMAP_COLUMNS, rows)


def link_stats(links, budget, curve, edges=(0.0, 100.0, 200.0), threshold_bps=1e9,
               olos_excess_dB=10.0, carrier_Hz=150e9, atmosphere=channel.DEFAULT_ATMOSPHERE):
    """Per distance bucket and class: count, median/mean throughput and the
    fraction of links at or above ``threshold_bps``.

    ``links`` holds ``(class, distance_m)`` pairs with class LOS/OLOS/NLOS.
    Buckets are half-open ``[edge_i, edge_i+1)``; links outside all buckets
    are ignored.
    """
    links = list(links)
    if not links:
        raise ValueError("no links given")
    buckets = {}
    for cls, d in links:
        cls = GRID_CLASSES.get(cls, cls)
        if cls not in GRID_CLASSES.values():
            raise ValueError(f"unknown link class {cls!r}")
        i = int(np.searchsorted(edges, d, side="right")) - 1
        if i < 0 or i >= len(edges) - 1:
            continue
        if cls == "NLOS":
            t = 0.0
        else:
            pl = channel.fspl_dB(carrier_Hz, d) + channel.atmospheric_loss_dB(carrier_Hz, d, atmosphere)
            pl += olos_excess_dB if cls == "OLOS" else 0.0
            t = throughput_bps(se_from_snr(curve, snr_dB(budget, pl)),
                               budget.bandwidth_Hz, budget.useful_fraction)
        buckets.setdefault((edges[i], edges[i + 1], cls), []).append(t)
    out = []
    for (lo, hi, cls) in sorted(buckets):
        v = np.sort(np.array(buckets[(lo, hi, cls)]))
        out.append({"range_lo_m": lo, "range_hi_m": hi, "class": cls, "count": int(v.size),
                    "median_bps": float(np.median(v)), "mean_bps": float(np.mean(v)),
                    "fraction_above": float(np.mean(v >= threshold_bps))})
    return out
