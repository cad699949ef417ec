"""pefetsim command line: device, array, sweep and calibrate subcommands.

Exit codes: 0 ok, 1 other simulator error, 2 config error, 3 disturb
violation, 4 round-trip mismatch, 5 calibration fit failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import metrics as mx
from .arrays import PeFetArray, cc_current_table, cc_ratios
from .calibrate import default_fet_anchors, run_calibration
from .config import RunConfig, load_config
from .errors import (ConfigError, DisturbViolation, FitFailure, OutOfCalibrationRange,
                     PeFetError, ReadDisturbRisk, UnsupportedArch)
from .layout import norm_arch
from .pefet import delta_eg, device_distinguishability, iv_sweep, write_iv_csv
from .transduction import REF_V_GB, pe_stress, tmd_stress

log = logging.getLogger("pefetsim")

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_DISTURB, EXIT_MISMATCH, EXIT_FIT = 0, 1, 2, 3, 4, 5


def _kappas(text: str | None, default):
    if text is None:
        return list(default)
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"--kappa: {exc}") from exc


def _outdir(args, rc: RunConfig) -> Path:
    out = Path(args.out or rc.sweep.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -----------------------------------------------------------------------------
# device
# -----------------------------------------------------------------------------

def cmd_device(args, rc: RunConfig) -> int:
    out = _outdir(args, rc)
    kappas = _kappas(args.kappa, [0.03, 0.04, 0.05, 0.06, 0.07])
    dev0 = rc.device(kappas[0] if args.kappa else rc.kappa or 0.04)
    sweep = iv_sweep(dev0)
    write_iv_csv(out / "iv_sweep.csv", sweep)
    rows = []
    for k in kappas:
        dev = rc.device(k)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OutOfCalibrationRange)
            sig = tmd_stress(pe_stress(1.0, REF_V_GB, dev.geom, dev.piezo), k, dev.piezo)
            rows.append({"kappa": k, "sigma_tmd": sig,
                         "delta_eg_lrs": delta_eg(dev.p_s, REF_V_GB, dev),
                         "delta_eg_hrs": delta_eg(-dev.p_s, REF_V_GB, dev),
                         "ratio": device_distinguishability(dev)})
    with open(out / "kappa_device.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kappa", "sigma_tmd_pa", "delta_eg_lrs_ev", "delta_eg_hrs_ev", "ratio",
                    "provenance"])
        for r in rows:
            w.writerow([f"{r['kappa']:g}", f"{r['sigma_tmd']:.6e}", f"{r['delta_eg_lrs']:.6e}",
                        f"{r['delta_eg_hrs']:.6e}", f"{r['ratio']:.6g}", "anchored"])
    if not args.no_plots:
        from .plotting import plot_iv, plot_kappa_device
        plot_iv(sweep, out / "iv_sweep.png")
        plot_kappa_device(rows, out / "kappa_device.png")
    for r in rows:
        print(f"kappa={r['kappa']:.3f}  I_LRS/I_HRS={r['ratio']:.3g}")
    return EXIT_OK


# -----------------------------------------------------------------------------
# array
# -----------------------------------------------------------------------------

def _parse_address(text: str | None):
    if text is None:
        return (0, 0)
    try:
        r, w = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--address expects ROW,WORD, got {text!r}") from exc
    return r, w


def cmd_array(args, rc: RunConfig) -> int:
    out = _outdir(args, rc)
    arch = norm_arch(args.arch)
    kappa = float(args.kappa) if args.kappa else (rc.kappa or 0.04)
    cfg = rc.array(arch, kappa)
    if args.segmented is not None and arch != "HD":
        cfg = replace(cfg, segmented=args.segmented == "yes")
    arr = PeFetArray(cfg)
    rng = np.random.default_rng(rc.sweep.seed if args.seed is None else args.seed)
    addr = _parse_address(args.address)
    rows, logs = [], []
    area = mx.cell_area(arch, kappa, cfg.rules)
    rows.append((arch, kappa, "area", "total", area, "lambda^2", mx.PROVENANCE_ANCHOR))
    status = EXIT_OK
    if args.op in ("write", "read"):
        word = mx.canonical_word(cfg.n_w, 0)
        arr.write(addr, 1 - word)
        if args.op == "write":
            wl = arr.write(addr, word)
            logs.append(wl)
            _rows(rows, arch, kappa, "write", mx.operation_energy(wl), mx.operation_latency(wl))
        else:
            arr.write(addr, word)
            res = arr.read(addr)
            logs.append(res.log)
            _rows(rows, arch, kappa, "read", mx.operation_energy(res.log),
                  mx.operation_latency(res.log))
            if res.cc_ratios:
                print("CC ratios: " + ", ".join(f"{k}={v:.4g}" for k, v in res.cc_ratios.items()))
                print("note: worst case taken as LRS11/HRS00; the LRS10/HRS10 reading of the "
                      "worst case gives a very different number")
    else:
        n = args.words or rc.sweep.words
        bad = 0
        for _ in range(n):
            a = (int(rng.integers(cfg.n_r)), int(rng.integers(cfg.n_words)))
            d = rng.integers(0, 2, cfg.n_w)
            wl = arr.write(a, d)
            res = arr.read(a)
            bad += int(np.count_nonzero(res.bits != d))
        logs.extend([wl, res.log])
        _rows(rows, arch, kappa, "write", mx.operation_energy(wl), mx.operation_latency(wl))
        _rows(rows, arch, kappa, "read", mx.operation_energy(res.log),
              mx.operation_latency(res.log))
        print(f"roundtrip: {n} words, {bad} mismatched bits")
        if bad:
            status = EXIT_MISMATCH
    mx.write_report_csv(out / "energy.csv", [r for r in rows if r[5] in ("J", "lambda^2")])
    mx.write_report_csv(out / "latency.csv", [r for r in rows if r[5] == "s"])
    _events_csv(out / "events.csv", logs)
    for r in rows:
        if r[3] == "total":
            print(f"{r[0]} kappa={r[1]:g} {r[2]:14s} {r[4]:.4g} {r[5]}")
    return status


def _rows(rows, arch, kappa, op, er, lr):
    rows.append((arch, kappa, f"{op}_energy", "total", er.total, "J", mx.PROVENANCE_CAL))
    rows.extend((arch, kappa, f"{op}_energy", c, v, "J", mx.PROVENANCE_CAL)
                for c, v in er.components.items())
    rows.append((arch, kappa, f"{op}_latency", "total", lr.total, "s", mx.PROVENANCE_MODEL))
    rows.extend((arch, kappa, f"{op}_latency", c, v, "s", mx.PROVENANCE_MODEL)
                for c, v in lr.components.items())


def _events_csv(path, logs):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["op", "phase", "line_class", "line", "count", "v_from", "v_to", "c_line"])
        for lg in logs:
            for e in lg.events:
                w.writerow([lg.op, e.phase, e.line_class, e.line, e.count, f"{e.v_from:.6g}",
                            f"{e.v_to:.6g}", f"{e.c_line:.6e}"])


# -----------------------------------------------------------------------------
# sweep
# -----------------------------------------------------------------------------

SWEEP_METRICS = ("area", "write_energy", "read_energy", "write_latency", "read_latency")


def cmd_sweep(args, rc: RunConfig) -> int:
    kappas = _kappas(args.kappa, rc.sweep.kappas)
    archs = [norm_arch(a) for a in (args.archs.split(",") if args.archs else rc.sweep.archs)]
    if not kappas or not archs:
        log.warning("empty sweep: nothing to do")
        return EXIT_OK
    out = _outdir(args, rc)
    sram = rc.sram_for()
    table_rows = []
    dist_rows = []
    for k in kappas:
        reps = []
        for a in archs:
            cfg = rc.array(a, k)
            reps.append(mx.evaluate(cfg))
            if a == "CC":
                ratio = cc_ratios(cc_current_table(cfg))["LRS11/HRS00"]
            else:
                ratio = device_distinguishability(cfg.device)
            dist_rows.append((a, k, "distinguishability", "ratio", ratio, "1",
                              mx.PROVENANCE_ANCHOR))
        table_rows.extend(mx.compare_to_sram(reps, sram, rc.array("HD", k)).rows)
    for m in SWEEP_METRICS:
        rows = []
        for r in table_rows:
            if r.metric == m:
                rows.append((r.arch, r.kappa, m, "value", r.value, r.unit, r.provenance))
                rows.append((r.arch, r.kappa, m, "sram_ratio", r.ratio, "1", r.provenance))
        mx.write_report_csv(out / f"sweep_{m}.csv", rows)
    mx.write_report_csv(out / "sweep_distinguishability.csv", dist_rows)
    table = mx.ComparisonTable(table_rows)
    (out / "comparison.txt").write_text(
        table.text() + "\n\nEnergy ratios are calibration-sensitive: the SRAM baseline and "
        "per-cell tap capacitances are fitted, see the model card.\n")
    if not args.no_plots:
        from .plotting import plot_sweep
        for m in SWEEP_METRICS:
            data = {}
            for r in table_rows:
                if r.metric == m:
                    data.setdefault(r.arch, {})[r.kappa] = r.ratio
            plot_sweep(data, f"{m} / SRAM", out / f"sweep_{m}.png")
        dd = {}
        for a, k, *_rest in dist_rows:
            dd.setdefault(a, {})[k] = _rest[2]
        plot_sweep(dd, "I_LRS / I_HRS", out / "sweep_distinguishability.png", log=True)
    print(table.text())
    return EXIT_OK


# -----------------------------------------------------------------------------
# calibrate
# -----------------------------------------------------------------------------

def cmd_calibrate(args, rc: RunConfig) -> int:
    out = _outdir(args, rc)
    anchors = default_fet_anchors(rc.geom, rc.piezo)
    for item in args.anchor or []:
        try:
            name, val = item.split("=")
            val = float(val)
        except ValueError as exc:
            raise ConfigError(f"--anchor expects NAME=VALUE, got {item!r}") from exc
        hits = [i for i, a in enumerate(anchors) if a.label == name]
        if not hits:
            raise ConfigError(f"unknown anchor {name!r}; have "
                              f"{', '.join(a.label for a in anchors)}")
        anchors[hits[0]] = replace(anchors[hits[0]], target=val)
    card = run_calibration(rc, anchors, energy=args.energy)
    path = out / "model_card.txt"
    card.write(path)
    print(card.to_text(), end="")
    print(f"wrote {path}")
    return EXIT_OK


# -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pefetsim", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="INI run configuration (default: packaged defaults)")
    p.add_argument("--out", help="output directory (default: [sweep] output)")
    p.add_argument("--no-plots", action="store_true", help="skip PNG output")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("device", help="I-V sweep and kappa characterization")
    d.add_argument("--kappa", help="comma-separated kappa values")
    d.set_defaults(func=cmd_device)

    a = sub.add_parser("array", help="simulate one array operation")
    a.add_argument("--arch", required=True, help="hd, tall, wide or cc")
    a.add_argument("--op", choices=("write", "read", "roundtrip"), default="roundtrip")
    a.add_argument("--kappa")
    a.add_argument("--address", help="ROW,WORD")
    a.add_argument("--words", type=int, help="random words for roundtrip")
    a.add_argument("--seed", type=int)
    a.add_argument("--segmented", choices=("yes", "no"))
    a.set_defaults(func=cmd_array)

    s = sub.add_parser("sweep", help="kappa x architecture sweep against SRAM")
    s.add_argument("--kappa", help="override [sweep] kappas")
    s.add_argument("--archs", help="override [sweep] archs")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("calibrate", help="run all fits and write the model card")
    c.add_argument("--energy", action="store_true", help="also fit energy taps (slow)")
    c.add_argument("--anchor", action="append", metavar="NAME=VALUE",
                   help="override a FET anchor target (lrs, hrs, k0.03, k0.04, k0.07)")
    c.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        rc = load_config(args.config)
        return args.func(args, rc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedArch as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DisturbViolation, ReadDisturbRisk) as exc:
        print(f"disturb: {exc}", file=sys.stderr)
        return EXIT_DISTURB
    except FitFailure as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT
    except PeFetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
