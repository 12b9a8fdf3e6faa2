"""Deterministic CSV/JSON serialization of results.

Floats are written with 9 significant digits; JSON keys are sorted and
files use UTF-8 with LF line endings, so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from mubsorter.sorter import CrosstalkRow, CrosstalkTable, ZmaxResult

SIG_DIGITS = 9


def fmt(x: float) -> str:
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if x == 0:
        return "0"  # folds -0.0
    return format(x, f".{SIG_DIGITS}g")


def rounded(obj):
    """Recursively round floats to the printed precision for JSON output."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"refusing to serialize non-finite value {obj}")
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {str(k): rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return rounded(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(rounded(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(obj))
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


CROSSTALK_HEADER = ("state", "p_r1", "p_r2", "p_r3", "p_residual")
TRAJECTORY_HEADER = ("z_m", "p_r1", "p_r2", "p_r3", "p_sa", "p_sb", "p_sc")


def crosstalk_rows(table: CrosstalkTable) -> list[list]:
    return [[r.state, *r.reference, r.residual] for r in table.rows]


def crosstalk_to_dict(table: CrosstalkTable) -> dict:
    return {
        "mub_index": table.mub_index,
        "z_eval_m": table.z_eval,
        "rows": [dict(zip(CROSSTALK_HEADER, row)) for row in crosstalk_rows(table)],
    }


def crosstalk_from_dict(doc: dict) -> CrosstalkTable:
    """Inverse of :func:`crosstalk_to_dict` (accepts any number of p_rN columns)."""
    try:
        rows = []
        for r in doc["rows"]:
            refs = []
            k = 1
            while f"p_r{k}" in r:
                refs.append(float(r[f"p_r{k}"]))
                k += 1
            rows.append(CrosstalkRow(str(r["state"]), tuple(refs), float(r.get("p_residual", 0.0))))
        return CrosstalkTable(float(doc.get("z_eval_m", 0.0)), tuple(rows), int(doc.get("mub_index", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed crosstalk table: {exc}") from exc


def zmax_to_dict(result: ZmaxResult) -> dict:
    return {
        "per_state_mm": [z * 1e3 for z in result.per_state],
        "common_mm": result.common * 1e3,
        "efficiency": list(result.efficiency_at_common),
    }


def trajectory_rows(traj, z_scale: float = 1.0, columns: int = 3) -> list[list]:
    return [[z * z_scale, *p[:columns]] for z, p in zip(traj.z, traj.probabilities)]


def svg_line_chart(z_mm, series, title: str = "", width: int = 320, height: int = 240) -> str:
    """Static line chart of probability (0..1) against depth."""
    pad = 32
    z0, z1 = float(z_mm[0]), float(z_mm[-1])
    span = (z1 - z0) or 1.0

    def xy(z, p):
        x = pad + (width - 2 * pad) * (z - z0) / span
        y = height - pad - (height - 2 * pad) * p
        return f"{x:.2f},{y:.2f}"

    dashes = ("", ' stroke-dasharray="6,3"', ' stroke-dasharray="2,3"')
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="#888"/>',
        f'<text x="{width / 2:.0f}" y="{pad - 10}" text-anchor="middle" font-size="12">{title}</text>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" font-size="10">'
        f"z (mm), 0 to {fmt(z1)}</text>",
    ]
    for k, p in enumerate(series):
        pts = " ".join(xy(z, v) for z, v in zip(z_mm, p))
        lines.append(
            f'<polyline fill="none" stroke="black"{dashes[k % 3]} points="{pts}"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
