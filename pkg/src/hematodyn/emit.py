"""CSV/JSON serialization with fixed float formatting."""
from __future__ import annotations

import json
import math

from .chareq import StabilityChart


def _round(x: float) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def normalize(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, float):
        return _round(obj)
    if isinstance(obj, dict):
        return {k: normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(normalize(obj), indent=2) + "\n"


def chart_to_dict(chart: StabilityChart) -> dict:
    return {
        "tau_bar": chart.tau_bar,
        "tau_star": chart.tau_star,
        "crossings": [
            {
                "k": c.k,
                "tau_c": c.tau_c,
                "omega": c.omega,
                "trans_sign": c.trans_sign,
                "expr_value": c.expr_value,
            }
            for c in chart.crossings
        ],
        "intervals": [
            {"lo": iv.lo, "hi": iv.hi, "class": iv.region.value, "unstable_pairs": iv.unstable_pairs}
            for iv in chart.intervals
        ],
    }


def csv_text(header: list[str], columns) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(f"{float(v):.10g}" for v in row))
    return "\n".join(lines) + "\n"


def trajectory_csv(traj, stride: int = 1) -> str:
    return csv_text(["t", "S", "N"], (traj.t[::stride], traj.S[::stride], traj.N[::stride]))
