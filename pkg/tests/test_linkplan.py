import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subthz.channel import atmospheric_loss_dB, fspl_dB
from subthz.indexmod import fsim_bits_per_symbol, gsm_bits_per_symbol, smx_bits_per_symbol
from subthz.linkplan import (KPI_COLUMNS, SCENARIOS, CurveMode, GridFormatError, LinkBudget,
                             SchemeDescriptor, SeCurve, default_curve, heatmap, heatmap_csv,
                             kpi_csv, kpi_table, link_stats, parse_grid, scheme_rate_bps,
                             se_from_snr, snr_dB, throughput_bps)

BACKHAUL = LinkBudget(30, 25, 25, 3, 10, 1e9, 0.8)
D2D = LinkBudget(-43, 32, 32, 0, 10, 1e9)


def test_snr_examples():
    pl = fspl_dB(150e9, 100) + atmospheric_loss_dB(150e9, 100)
    assert snr_dB(BACKHAUL, pl) == pytest.approx(34.8, abs=0.1)
    assert snr_dB(D2D, fspl_dB(150e9, 5)) == pytest.approx(5.1, abs=0.1)
    assert snr_dB(D2D, 100) - snr_dB(D2D, 110) == pytest.approx(10, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-60, 40), st.floats(0, 40), st.floats(0, 40), st.floats(0, 20),
       st.floats(0, 20), st.floats(40, 200), st.floats(-10, 10))
def test_snr_affine_unit_coefficients(ptx, gt, gr, loss, nf, pl, delta):
    b = LinkBudget(ptx, gt, gr, loss, nf)
    base = snr_dB(b, pl)
    assert snr_dB(LinkBudget(ptx + delta, gt, gr, loss, nf), pl) == pytest.approx(base + delta)
    assert snr_dB(LinkBudget(ptx, gt + delta, gr, loss, nf), pl) == pytest.approx(base + delta)
    assert snr_dB(LinkBudget(ptx, gt, gr, loss + delta, nf), pl) == pytest.approx(base - delta)
    assert snr_dB(b, pl + delta) == pytest.approx(base - delta)


def test_budget_validation():
    with pytest.raises(ValueError):
        LinkBudget(0, 0, 0, bandwidth_Hz=0)
    with pytest.raises(ValueError):
        LinkBudget(0, 0, 0, useful_fraction=1.5)


def test_ceilings():
    qam = default_curve(CurveMode.STRONG_PN_QAM)
    for snr in (20, 30, 40, 60, 100):
        assert se_from_snr(qam, snr) == 2.5
    assert se_from_snr(default_curve("strong_pn_polar"), 30) == 5.5
    assert se_from_snr(default_curve("no_pn"), 60) == 7.2
    assert se_from_snr(default_curve("no_pn"), 1000) == 7.2


def test_curve_matches_capped_shannon():
    c = default_curve("no_pn")
    for snr in (-10.0, 0.0, 7.5, 15.0):
        assert se_from_snr(c, snr) == pytest.approx(math.log2(1 + 10 ** (snr / 10)), abs=1e-12)


@pytest.mark.parametrize("mode", ["no_pn", "strong_pn_qam", "strong_pn_polar"])
def test_curve_monotone_and_bounded(mode):
    c = default_curve(mode)
    se = se_from_snr(c, np.linspace(-50, 80, 2000))
    assert np.all(np.diff(se) >= 0)
    assert se.max() <= c.ceiling and se.min() >= 0


def test_table_curve(tmp_path):
    c = SeCurve.from_table([(0, 0.5), (10, 2.0), (20, 3.0)])
    assert se_from_snr(c, 5) == pytest.approx(1.25)
    assert se_from_snr(c, 50) == 3.0
    with pytest.raises(ValueError):
        SeCurve.from_table([(0, 1.0), (10, 0.5)])
    with pytest.raises(ValueError):
        SeCurve.from_table([(10, 1.0), (0, 2.0)])
    p = tmp_path / "curve.csv"
    p.write_text("snr_dB,se\n0,0.5\n10,2\n")
    assert se_from_snr(SeCurve.load(p), 10) == 2.0


def test_throughput_examples():
    assert throughput_bps(7.2, 1e9, 0.8) == pytest.approx(5.76e9)
    assert throughput_bps(5.5, 1e9, 0.8) == pytest.approx(4.4e9)
    assert throughput_bps(0, 1e9, 0.8) == 0
    with pytest.raises(ValueError):
        throughput_bps(-1, 1e9)


def test_scheme_rate_examples():
    assert scheme_rate_bps(SchemeDescriptor("gsm", 4, 10, 3), 1e9) == pytest.approx(12e9)
    assert scheme_rate_bps(SchemeDescriptor("smx-fsim", 4, 8, 1, 2), 1e9, 8 / 9) == \
        pytest.approx(21.33e9, abs=0.01e9)
    assert scheme_rate_bps(SchemeDescriptor("ook", 2, 8), 1e9, 0.40625) == pytest.approx(3.25e9)


def test_scheme_rate_consistent_with_indexmod():
    for nt in (1, 2, 4, 8, 10):
        for m in (2, 4, 16):
            for na in range(1, nt + 1):
                d = SchemeDescriptor("gsm", m, nt, na)
                assert d.bits_per_symbol() == gsm_bits_per_symbol(nt, na, m)
            for n in (1, 2, 4):
                assert SchemeDescriptor("smx-fsim", m, nt, 1, n).bits_per_symbol() == \
                    smx_bits_per_symbol(nt, n, m)
    assert SchemeDescriptor("fsim", 4, 1, 1, 2).bits_per_symbol() == fsim_bits_per_symbol(2, 4)
    with pytest.raises(ValueError):
        SchemeDescriptor("ofdm").bits_per_symbol()


def test_kpi_rows():
    rows = {r["scenario"]: r for r in kpi_table("all")}
    assert list(rows) == list(SCENARIOS)
    gbps = {k: r["throughput_bps"] / 1e9 for k, r in rows.items()}
    assert gbps["d2d-fsim-siso"] == pytest.approx(2.67, abs=0.01)
    assert gbps["shortrange-smxfsim-4x10"] == pytest.approx(12, abs=0.01)
    assert gbps["shortrange-gsm"] == pytest.approx(12, abs=0.01)
    assert gbps["d2d-smxfsim-8x8"] == pytest.approx(21.33, abs=0.01)
    assert gbps["d2d-ook-ed-8x8"] == pytest.approx(3.25, abs=0.01)
    assert gbps["backhaul"] == pytest.approx(5.76, abs=0.01)
    assert "Table 3 prints 5.7" in rows["backhaul"]["notes"]
    assert gbps["backhaul-strong-pn"] == pytest.approx(4.4, abs=0.01)
    with pytest.raises(KeyError):
        kpi_table(["nope"])


def test_kpi_csv_header_and_rows():
    text = kpi_csv(kpi_table(["backhaul", "shortrange-gsm"]))
    lines = text.splitlines()
    assert lines[0] == ",".join(KPI_COLUMNS)
    assert len(lines) == 3 and text.endswith("\n")
    assert ",1.2e+10," in lines[2]


GRID = "5 3 10\nLLLLL\nLOLNL\nLLLLL\n"


def test_parse_grid():
    g = parse_grid(GRID)
    assert (g.width, g.height, g.cell_size_m) == (5, 3, 10.0)
    assert g.contains(4, 2) and not g.contains(5, 0)


@pytest.mark.parametrize("text,line,col", [
    ("3 3 1\nLLL\nLXL\nLLL\n", 3, 2),
    ("3 3 1\nLLL\nLL\nLLL\n", 3, None),
    ("3 3\nLLL\n", 1, None),
    ("3 3 1\nLLL\nLLL\n", 4, None),
])
def test_parse_grid_errors(text, line, col):
    with pytest.raises(GridFormatError) as ei:
        parse_grid(text)
    assert ei.value.line == line
    assert ei.value.column == col


def test_heatmap_rules():
    g = parse_grid(GRID)
    rows = heatmap(g, (0, 0), BACKHAUL, default_curve("no_pn"))
    assert len(rows) == 15
    by_xy = {(r["x"], r["y"]): r for r in rows}
    assert by_xy[(3, 1)]["throughput_bps"] == 0 and by_xy[(3, 1)]["class"] == "NLOS"
    olos = by_xy[(1, 1)]
    d = olos["distance_m"]
    expected = snr_dB(BACKHAUL, fspl_dB(150e9, d) + atmospheric_loss_dB(150e9, d) + 10)
    assert olos["snr_dB"] == pytest.approx(expected)


def test_heatmap_los_monotone_in_distance():
    g = parse_grid("9 9 40\n" + "LLLLLLLLL\n" * 9)
    rows = heatmap(g, (4, 4), D2D, default_curve("no_pn"))
    rows.sort(key=lambda r: r["distance_m"])
    t = [r["throughput_bps"] for r in rows]
    assert all(b <= a for a, b in zip(t, t[1:]))
    with pytest.raises(ValueError):
        heatmap(g, (9, 0), D2D, default_curve("no_pn"))


def test_heatmap_csv_deterministic():
    g = parse_grid(GRID)
    a = heatmap_csv(heatmap(g, (2, 1), BACKHAUL, default_curve("no_pn")))
    b = heatmap_csv(heatmap(g, (2, 1), BACKHAUL, default_curve("no_pn")))
    assert a == b and a.startswith("x,y,class,")


def test_link_stats_rules(rng):
    curve = default_curve("no_pn")
    [row] = link_stats([("LOS", 50.0)], BACKHAUL, curve)
    pl = fspl_dB(150e9, 50) + atmospheric_loss_dB(150e9, 50)
    direct = throughput_bps(se_from_snr(curve, snr_dB(BACKHAUL, pl)), 1e9, 0.8)
    assert (row["range_lo_m"], row["count"]) == (0.0, 1)
    assert row["mean_bps"] == pytest.approx(direct)
    rows = link_stats([("LOS", 99.9), ("LOS", 100.0)], BACKHAUL, curve)
    assert [(r["range_lo_m"], r["count"]) for r in rows] == [(0.0, 1), (100.0, 1)]
    with pytest.raises(ValueError):
        link_stats([], BACKHAUL, curve)


def test_link_stats_permutation_invariant(rng):
    links = [(rng.choice(["LOS", "OLOS", "NLOS"]), float(d)) for d in rng.uniform(1, 199, 60)]
    a = link_stats(links, BACKHAUL, default_curve("strong_pn_polar"))
    perm = [links[i] for i in rng.permutation(len(links))]
    assert a == link_stats(perm, BACKHAUL, default_curve("strong_pn_polar"))
