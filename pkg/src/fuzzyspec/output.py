"""Deterministic CSV/JSON writers and gnuplot script generation."""

from __future__ import annotations

import csv
import json
from pathlib import Path

SCHEMA = "fuzzyspec/1"


def fmt(x) -> str:
    return format(float(x), ".17g")


def to_jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return to_jsonable(obj.tolist())
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def write_json(path: Path, payload: dict, meta: dict) -> Path:
    body = {"schema": SCHEMA, **meta, **to_jsonable(payload)}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path: Path, header: list[str], rows, meta: dict) -> Path:
    with path.open("w", newline="") as fh:
        fh.write(f"# schema={SCHEMA} config_hash={meta['config_hash']} seed={meta['seed']}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else (str(v) if isinstance(v, int)
                                                          else fmt(v)) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[float]]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    if not lines:
        return [], []
    reader = csv.reader(lines)
    header = next(reader)
    return header, [[float(v) for v in row] for row in reader if row]


def emit_plot_script(csv_paths, title: str = "", ycol: int = 2, xcol: int = 1) -> str:
    """Gnuplot commands overlaying column ``ycol`` against ``xcol`` of each CSV."""
    paths = [Path(p) for p in csv_paths]
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        raise FileNotFoundError(", ".join(missing))
    out = ["set datafile separator ','", "set key autotitle columnhead"]
    if title:
        out.append(f"set title '{title}'")
    series = []
    for p in paths:
        header, rows = read_csv(p)
        if not rows:
            out.append(f"# empty data range in {p.name}: nothing to plot")
            continue
        if header:
            out.append(f"set xlabel '{header[xcol - 1]}'")
            out.append(f"set ylabel '{header[ycol - 1]}'")
        series.append(f"'{p.name}' using {xcol}:{ycol} with linespoints title '{p.stem}'")
    if series:
        out.append("plot " + ", \\\n     ".join(series))
    return "\n".join(out) + "\n"
