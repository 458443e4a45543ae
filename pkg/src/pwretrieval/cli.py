"""Command-line front end: ``pwretrieval <command> [options]``.

Exit codes: 0 success, 1 pipeline or check failure, 2 bad input.
"""
import argparse
import csv
import io
import sys
from pathlib import Path

from . import io as pio
from .frames import canonical_frame_k2, verify_tight, verify_two_uniform
from .grids import sampling_rate
from .scenario import SWEEP_PARAMETERS, Scenario, load_config, run_roundtrip, sweep

FRAME_TOL = 1e-10


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _emit(text, out_dir, name):
    if out_dir is None:
        sys.stdout.write(text)
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["signal"]["seed"] = args.seed
    if args.tolerance is not None:
        cfg["tolerances"]["error"] = args.tolerance
    return cfg


def cmd_roundtrip(args):
    cfg = _config(args)
    result, error, _, ms = run_roundtrip(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "result.txt").write_text(pio.result_record(result, cfg, error))
    (out / "measurements.csv").write_text(pio.measurements_to_csv(ms))
    if result.fourier_values is not None:
        (out / "fourier_values.csv").write_text(
            pio.fourier_values_to_csv(result.points, result.fourier_values))
    ok = result.ok and error is not None and error <= cfg["tolerances"]["error"]
    print(f"status={result.status} error={error} tolerance={cfg['tolerances']['error']}")
    return 0 if ok else 1


def cmd_verify_frame(args):
    frame = canonical_frame_k2()
    if args.frame not in (None, "canonical"):
        frame = pio.frame_from_text(Path(args.frame).read_text())
    if args.expect_dim is not None and frame.dim != args.expect_dim:
        raise ValueError(f"frame dimension {frame.dim} != expected {args.expect_dim}")
    tight = verify_tight(frame, FRAME_TOL)
    uni = verify_two_uniform(frame, FRAME_TOL)
    print(f"K={frame.dim} M={frame.count}")
    print(f"tightness: bound={pio.fmt(tight.bound)} max_deviation={pio.fmt(tight.max_deviation)} "
          f"{'pass' if tight.ok else 'FAIL'}")
    print(f"two-uniform: common_value={pio.fmt(uni.common_value)} spread={pio.fmt(uni.max_spread)} "
          f"{'pass' if uni.ok else 'FAIL'}")
    return 0 if tight.ok and uni.ok else 1


def rate_table(K_list, a_list, ratios):
    rows = []
    for K in K_list:
        for a in a_list:
            if not 1 <= a < K:
                continue
            for r in ratios:
                fig = sampling_rate(K, a, r, 1.0)
                rows.append((K, a, r, fig.nyquist_multiple))
    return rows


def cmd_rate_table(args):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["K", "a", "T_ratio", "nyquist_multiple"])
    for K, a, r, mult in rate_table(args.K, args.a, args.T_ratio):
        w.writerow([K, a, pio.fmt(r), pio.fmt(mult)])
    _emit(buf.getvalue(), args.out, "rate_table.csv")
    return 0


def cmd_sweep(args):
    cfg = _config(args)
    seeds = range(args.seed or 0, (args.seed or 0) + args.seeds) if args.seeds else (None,)
    values = [int(v) if args.parameter in ("a", "K", "J") else v for v in args.values]
    rows = sweep(cfg, args.parameter, values, seeds)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "seed", "status", "phase_aligned_error", "runtime_ms"])
    for r in rows:
        err = "" if r["phase_aligned_error"] is None else pio.fmt(r["phase_aligned_error"])
        w.writerow([r["value"], r["seed"], r["status"], err, f"{r['runtime_ms']:.3f}"])
    _emit(buf.getvalue(), args.out, f"sweep_{args.parameter}.csv")
    return 0


def cmd_emit_grid(args):
    sc = Scenario(_config(args))
    _emit(pio.grid_to_csv(sc.grid_for(sc.signal())), args.out, "grid.csv")
    return 0


def cmd_emit_measurements(args):
    sc = Scenario(_config(args))
    _emit(pio.measurements_to_csv(sc.measurements(sc.signal())), args.out, "measurements.csv")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="pwretrieval", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True,
                        help="INI scenario file, or the name of a bundled one")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override the signal seed")
        sp.add_argument("--tolerance", type=float, default=None, help="override the error tolerance")

    sp = sub.add_parser("roundtrip", help="measure and recover one scenario")
    common(sp)
    sp.set_defaults(func=cmd_roundtrip, out="out")

    sp = sub.add_parser("verify-frame", help="check tightness and 2-uniformity of a frame")
    sp.add_argument("--frame", default=None, help="frame file, or 'canonical' (default)")
    sp.add_argument("--expect-dim", type=int, default=None)
    sp.set_defaults(func=cmd_verify_frame)

    sp = sub.add_parser("rate-table", help="sampling rate in multiples of the Nyquist rate")
    sp.add_argument("--K", type=_ints, default=[2, 3, 4, 6])
    sp.add_argument("--a", type=_ints, default=[1, 2, 3])
    sp.add_argument("--T-ratio", dest="T_ratio", type=_floats, default=[1.0, 1.25, 1.5])
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_rate_table)

    sp = sub.add_parser("sweep", help="repeat the roundtrip over parameter values")
    common(sp)
    sp.add_argument("--parameter", required=True, choices=SWEEP_PARAMETERS)
    sp.add_argument("--values", required=True, type=_floats)
    sp.add_argument("--seeds", type=int, default=0, help="seeds per value (0: use config seed)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("emit-grid", help="write the scenario's grid points as CSV")
    common(sp)
    sp.set_defaults(func=cmd_emit_grid)

    sp = sub.add_parser("emit-measurements", help="write the scenario's measurements as CSV")
    common(sp)
    sp.set_defaults(func=cmd_emit_measurements)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
