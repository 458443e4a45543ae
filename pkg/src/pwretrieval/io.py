"""Text and CSV formats for signals, frames, grids, measurements and results.

Floats are written with 17 significant digits so that every format
round-trips bit-exactly.
"""
import configparser
import csv
import io
import json
from datetime import datetime, timezone

import numpy as np

from .frames import FrameFamily
from .grids import InterpolationGrid
from .measurement import MeasurementSet
from .signal_model import TimeLimitedSignal

__all__ = [
    "fmt",
    "signal_to_text",
    "signal_from_text",
    "frame_to_text",
    "frame_from_text",
    "grid_to_csv",
    "measurements_to_csv",
    "measurements_from_csv",
    "fourier_values_to_csv",
    "result_record",
    "jsonable",
]


def fmt(x):
    return format(float(x), ".17g")


def _pairs(values):
    return [[float(v.real), float(v.imag)] for v in np.asarray(values, complex).reshape(-1)]


def _complex(pairs):
    return np.array([complex(re, im) for re, im in pairs])


def signal_to_text(x):
    lines = ["[signal]", f"T = {fmt(x.interval_length)}", f"J = {x.J}", "coefficients ="]
    lines += [f"    {fmt(c.real)} {fmt(c.imag)}" for c in x.coefficients]
    return "\n".join(lines) + "\n"


def signal_from_text(text):
    cp = configparser.ConfigParser()
    cp.read_string(text)
    sec = cp["signal"]
    coeffs = parse_complex_list(sec["coefficients"])
    J = sec.getint("J")
    if coeffs.size != 2 * J + 1:
        raise ValueError(f"expected {2 * J + 1} coefficients, got {coeffs.size}")
    return TimeLimitedSignal(sec.getfloat("T"), coeffs)


def parse_complex_list(text):
    """Whitespace/newline separated ``re im`` pairs (commas allowed)."""
    nums = [float(tok) for tok in text.replace(",", " ").split()]
    if len(nums) % 2:
        raise ValueError("odd number of reals in a complex list")
    return np.array(nums[0::2]) + 1j * np.array(nums[1::2])


def frame_to_text(frame):
    rows = [" ".join(f"{fmt(v.real)} {fmt(v.imag)}" for v in vec) for vec in frame.vectors]
    return f"# frame K={frame.dim} M={frame.count}; each line: re im per component\n" + "\n".join(rows) + "\n"


def frame_from_text(text):
    """One vector per line as ``re im`` pairs; ``#`` starts a comment.

    Raises:
        ValueError: odd entry counts or vectors of differing length.
    """
    vectors = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        nums = [float(tok) for tok in line.replace(",", " ").split()]
        if len(nums) % 2:
            raise ValueError(f"odd number of reals in frame line: {raw!r}")
        vectors.append(np.array(nums[0::2]) + 1j * np.array(nums[1::2]))
    if not vectors:
        raise ValueError("empty frame file")
    if len({v.size for v in vectors}) != 1:
        raise ValueError("frame vectors have differing dimensions")
    return FrameFamily(np.array(vectors))


def grid_to_csv(grid):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "k", "re", "im"])
    for n in grid.blocks:
        for k, lam in enumerate(n * grid.block_spacing + grid.offsets, start=1):
            w.writerow([n, k, fmt(lam.real), fmt(lam.imag)])
    return out.getvalue()


def _grid_meta(grid):
    return {"offsets": _pairs(grid.offsets), "block_spacing": grid.block_spacing,
            "overlap": grid.overlap, "n_min": grid.n_min, "n_max": grid.n_max}


def measurements_to_csv(ms):
    meta = {
        "grid": _grid_meta(ms.grid),
        "frame": _pairs(ms.frame.vectors.reshape(-1)),
        "frame_dim": ms.frame.dim,
        "noise": ms.noise,
        "augmented": ms.augmented,
        "interval_length": ms.interval_length,
    }
    out = io.StringIO()
    for key, val in meta.items():
        out.write(f"# {key}: {json.dumps(val)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "m", "c"])
    for n in ms.grid.blocks:
        for m, c in enumerate(ms.block(n), start=1):
            w.writerow([n, m, fmt(c)])
    return out.getvalue()


def measurements_from_csv(text):
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, val = line[2:].split(": ", 1)
            meta[key] = json.loads(val)
        elif line.strip():
            body.append(line)
    g = meta["grid"]
    grid = InterpolationGrid(_complex(g["offsets"]), g["block_spacing"], g["overlap"],
                             g["n_min"], g["n_max"])
    frame = FrameFamily(_complex(meta["frame"]).reshape(-1, meta["frame_dim"]))
    samples = np.zeros((grid.n_max - grid.n_min + 1, frame.count))
    for row in csv.DictReader(body):
        samples[int(row["n"]) - grid.n_min, int(row["m"]) - 1] = float(row["c"])
    return MeasurementSet(samples, grid, frame, noise=meta["noise"],
                          augmented=meta["augmented"], interval_length=meta["interval_length"])


def fourier_values_to_csv(points, values):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["lambda_re", "lambda_im", "value_re", "value_im"])
    for lam, v in zip(points, values):
        w.writerow([fmt(lam.real), fmt(lam.imag), fmt(v.real), fmt(v.imag)])
    return out.getvalue()


def jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def result_record(result, config, error=None, timestamp=None):
    """Structured result text; the timestamp lives alone on the first line."""
    stamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    body = {
        "status": result.status,
        "failed_block": result.failed_block,
        "phase_aligned_error": error,
        "global_phase_note": "recovered up to one unknown global phase",
        "coefficients": None if result.signal is None else _pairs(result.signal.coefficients),
        "diagnostics": result.diagnostics,
        "config": config,
    }
    return f"# generated: {stamp}\n" + json.dumps(jsonable(body), indent=2, sort_keys=True) + "\n"
