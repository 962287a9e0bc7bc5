"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error.
A ``--config`` file holds flat ``key = value`` lines using the long flag
names (``-`` or ``_``); flags given on the command line take precedence.
"""
import argparse
import sys

from . import linkplan
from .fec import code_table
from .indexmod import fsim_bits_per_symbol, gsm_bits_per_symbol, smx_bits_per_symbol
from .link import RunConfig, ber_csv, parse_sweep, run_sweep
from .scheme import parse_modulation

EXIT_IO = 1
EXIT_USAGE = 2


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path):
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _write(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


# key -> (converter, default)
BER_KEYS = {
    "scheme": (str, "qam"),
    "mod": (str, "qpsk"),
    "nt": (int, 1),
    "nr": (int, None),
    "na": (int, 1),
    "n_filters": (int, 2),
    "polar_rings": (int, None),
    "channel": (str, "identity"),
    "distance": (float, 5.0),
    "spacing": (float, None),
    "pn_floor": (float, None),
    "bandwidth": (float, 1e9),
    "snr": (str, "0:2:10"),
    "noise": (_bool, True),
    "equalizer": (str, "zf"),
    "code": (int, 63),
    "max_bits": (lambda v: int(float(v)), 1_000_000),
    "max_errors": (lambda v: int(float(v)), 100),
    "frame_periods": (int, 256),
    "workers": (int, 1),
    "seed": (int, None),
    "out": (str, None),
}


def _resolve(args, config, keys):
    vals = {}
    for key, (conv, default) in keys.items():
        raw = getattr(args, key, None)
        if raw is None:
            raw = config.get(key)
        if raw is None:
            vals[key] = default
            continue
        try:
            vals[key] = conv(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: invalid value {raw!r}") from None
    unknown = set(config) - set(keys)
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown configuration key")
    return vals


def build_run_config(args):
    config = read_config(args.config) if args.config else {}
    v = _resolve(args, config, BER_KEYS)
    if v["seed"] is None:
        raise ConfigError("seed: a master seed is required")
    try:
        sweep = tuple(parse_sweep(v["snr"]))
    except ValueError as exc:
        raise ConfigError(f"snr: {exc}") from None
    code_t = None
    for k, t, _ in code_table():
        if k == v["code"]:
            code_t = t
    if code_t is None:
        raise ConfigError(f"code: no BCH(63, {v['code']}) code available")
    try:
        parse_modulation(v["mod"])
    except ValueError as exc:
        raise ConfigError(f"mod: {exc}") from None
    try:
        cfg = RunConfig(
            scheme=v["scheme"], modulation=v["mod"], nt=v["nt"], nr=v["nr"], na=v["na"],
            n_filters=v["n_filters"], polar_rings=v["polar_rings"], channel=v["channel"],
            distance_m=v["distance"], spacing_m=v["spacing"], pn_floor_dBcHz=v["pn_floor"],
            bandwidth_Hz=v["bandwidth"], snr_dB=sweep, noise=v["noise"],
            equalizer=v["equalizer"], code_t=code_t, seed=v["seed"],
            max_bits=v["max_bits"], max_errors=v["max_errors"],
            frame_periods=v["frame_periods"], workers=v["workers"])
        cfg.build_scheme()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, v["out"]


def cmd_ber(args):
    cfg, out = build_run_config(args)
    _write(ber_csv(run_sweep(cfg)), out)


def cmd_kpi(args):
    ids = args.scenarios or ["all"]
    if ids != ["all"]:
        unknown = [i for i in ids if i not in linkplan.SCENARIOS]
        if unknown:
            raise ConfigError(f"scenario: unknown scenario {unknown[0]!r} "
                              f"(known: {', '.join(linkplan.SCENARIOS)})")
    _write(linkplan.kpi_csv(linkplan.kpi_table(ids)), args.out)


def cmd_heatmap(args):
    try:
        grid = linkplan.load_grid(args.grid)
    except linkplan.GridFormatError as exc:
        raise ConfigError(f"grid {args.grid}: {exc}") from None
    if args.node is None:
        node = (grid.width // 2, grid.height // 2)
    else:
        try:
            node = tuple(int(v) for v in args.node.split(","))
            if len(node) != 2:
                raise ValueError
        except ValueError:
            raise ConfigError(f"node: expected x,y, got {args.node!r}") from None
    if not grid.contains(*node):
        raise ConfigError(f"node: {node} is outside the {grid.width}x{grid.height} grid")
    try:
        budget = linkplan.LinkBudget(args.ptx, args.gtx, args.grx, args.losses, args.nf,
                                     args.bandwidth, args.useful)
    except ValueError as exc:
        raise ConfigError(f"budget: {exc}") from None
    if args.curve_file:
        curve = linkplan.SeCurve.load(args.curve_file)
    else:
        curve = linkplan.default_curve(args.curve)
    rows = linkplan.heatmap(grid, node, budget, curve, args.olos_excess, args.carrier)
    _write(linkplan.heatmap_csv(rows), args.out)


def cmd_codes(args):
    rows = code_table()
    if args.format == "csv":
        text = "n,k,t,rate\n" + "".join(f"63,{k},{t},{k / 63:.6g}\n" for k, t, _ in rows)
    else:
        text = "  n   k   t   rate\n" + "".join(
            f"{63:3d} {k:3d} {t:3d}  {k / 63:.4f}\n" for k, t, _ in rows)
    _write(text, args.out)


def cmd_se(args):
    try:
        c = parse_modulation(args.mod)
        m = c.order
        if args.scheme == "gsm":
            bps = gsm_bits_per_symbol(args.nt, args.na, m)
        elif args.scheme == "fsim":
            bps = fsim_bits_per_symbol(args.n, m)
        elif args.scheme == "smx-fsim":
            bps = smx_bits_per_symbol(args.nt, args.n, m)
        elif args.scheme in ("qam", "smx-qam", "ook"):
            bps = args.nt * c.bits_per_symbol
        else:
            raise ValueError(f"unknown scheme {args.scheme!r}")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    gbps = bps * args.baud * args.rate / 1e9
    if args.format == "csv":
        text = ("scheme,bits_per_symbol,symbol_rate,code_rate,throughput_bps\n"
                f"{args.scheme},{bps},{args.baud:.6g},{args.rate:.6g},{bps * args.baud * args.rate:.6g}\n")
    else:
        text = f"{args.scheme}: {bps} bits/symbol, {gbps:.4g} Gbps at {args.baud / 1e9:g} Gbaud, rate {args.rate:.4g}\n"
    _write(text, args.out)


def _common(p):
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--config", default=None, help="key = value configuration file")


def build_parser():
    parser = _Parser(prog="subthz", description="Sub-THz link-level simulator and planner")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ber", help="Monte-Carlo BER sweep")
    _common(p)
    p.add_argument("--scheme", choices=("qam", "gsm", "fsim", "smx-fsim", "ook-ed"))
    p.add_argument("--mod", help="bpsk, qpsk, 8psk, 16qam, 64qam, polar64, ook")
    for name in ("nt", "nr", "na", "n-filters", "polar-rings", "code", "frame-periods", "workers"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--max-bits", type=float)
    p.add_argument("--max-errors", type=float)
    p.add_argument("--channel", choices=("identity", "rayleigh", "los"))
    p.add_argument("--distance", type=float)
    p.add_argument("--spacing", type=float)
    p.add_argument("--pn-floor", type=float, help="phase-noise floor, dBc/Hz")
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--snr", help="start:step:stop or comma list, dB")
    p.add_argument("--no-noise", dest="noise", action="store_const", const=False)
    p.add_argument("--equalizer", choices=("zf", "mmse"))
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("kpi", help="KPI table rows as CSV")
    _common(p)
    p.add_argument("scenarios", nargs="*", help="scenario ids or 'all'")
    p.set_defaults(func=cmd_kpi)

    p = sub.add_parser("heatmap", help="per-cell throughput map as CSV")
    _common(p)
    p.add_argument("grid", help="environment grid file")
    p.add_argument("--node", help="x,y cell of the serving node (default centre)")
    p.add_argument("--ptx", type=float, default=30.0)
    p.add_argument("--gtx", type=float, default=25.0)
    p.add_argument("--grx", type=float, default=25.0)
    p.add_argument("--losses", type=float, default=3.0)
    p.add_argument("--nf", type=float, default=10.0)
    p.add_argument("--bandwidth", type=float, default=1e9)
    p.add_argument("--useful", type=float, default=0.8)
    p.add_argument("--carrier", type=float, default=150e9)
    p.add_argument("--olos-excess", type=float, default=10.0)
    p.add_argument("--curve", default="no_pn",
                   choices=("no_pn", "strong_pn_qam", "strong_pn_polar"))
    p.add_argument("--curve-file", help="CSV of snr_dB,se points")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("codes", help="available BCH(63, k) codes")
    _common(p)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_codes)

    p = sub.add_parser("se", help="bits per symbol and throughput of a scheme")
    _common(p)
    p.add_argument("scheme", help="gsm, fsim, smx-fsim, qam, ook")
    p.add_argument("--nt", type=int, default=1)
    p.add_argument("--na", type=int, default=1)
    p.add_argument("--n", type=int, default=2, help="FSIM filter count")
    p.add_argument("--mod", default="qpsk")
    p.add_argument("--baud", type=float, default=1e9)
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_se)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"subthz {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"subthz {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
