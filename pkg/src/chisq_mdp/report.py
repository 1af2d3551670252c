"""Flat result rows and their CSV/JSON serialisation.

Floats are written with 17 significant digits so that reading a file back
reproduces every value bit for bit; a tail estimate with no hits has
``empirical_rate = inf``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from typing import Dict, Iterable, List, Optional, Sequence

from .montecarlo import RateCurvePoint, SimConfig, TailEstimate
from .regimes import ConditionReport, Distribution, RegimeFamily, SchedulePoint

TAIL_FIELDS = ("n", "m", "b", "family", "seed", "r", "hits", "reps", "p_hat",
               "ci_lo", "ci_hi", "empirical_rate", "reference_rate")
CONDITION_RATIOS = ("ratio_bn_logn", "ratio_m_bn", "ratio_nmp2_bn4",
                    "implied_n_over_mbn4", "implied_npmin_bn4")
RATE_CURVE_FIELDS = TAIL_FIELDS + CONDITION_RATIOS
CONDITION_FIELDS = ("n", "m", "b", "family", "p_min") + CONDITION_RATIOS
BOUNDS_FIELDS = ("check", "family", "m", "size", "param", "epsilon", "exact", "seed",
                 "reps", "threshold", "bound", "empirical", "stderr", "holds")
VERIFY_FIELDS = ("identity", "config", "max_error", "tolerance", "passed")

SCHEMAS = {
    "simulate": TAIL_FIELDS,
    "rate-curve": RATE_CURVE_FIELDS,
    "check-conditions": CONDITION_FIELDS,
    "bounds": BOUNDS_FIELDS,
    "verify": VERIFY_FIELDS,
}

Row = Dict[str, object]


def tail_row(config: SimConfig, est: TailEstimate) -> Row:
    p = config.point
    return {
        "n": p.n, "m": p.m, "b": p.b, "family": config.family.label, "seed": config.seed,
        "r": est.r, "hits": est.hits, "reps": est.reps, "p_hat": est.p_hat,
        "ci_lo": est.ci_lo, "ci_hi": est.ci_hi, "empirical_rate": est.empirical_rate,
        "reference_rate": est.reference_rate,
    }


def rate_curve_row(family: RegimeFamily, seed: int, pt: RateCurvePoint) -> Row:
    cfg = SimConfig(pt.point, family, pt.estimate.reps, seed, (pt.r,))
    row = tail_row(cfg, pt.estimate)
    row.update(pt.condition_report.as_dict())
    return row


def condition_row(point: SchedulePoint, family: RegimeFamily, dist: Distribution,
                  report: ConditionReport) -> Row:
    row = {"n": point.n, "m": point.m, "b": point.b, "family": family.label, "p_min": dist.p_min}
    row.update(report.as_dict())
    return row


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    return value


def emit(rows: Sequence[Row], fmt: str = "csv", path: Optional[str] = None,
         fields: Optional[Sequence[str]] = None) -> str:
    """Serialise ``rows`` and write them to ``path`` (stdout when ``None``).

    Returns the text written. Raises ``ValueError`` for empty input and
    ``OSError`` when the file cannot be written.
    """
    if not rows:
        raise ValueError("no rows to emit")
    fields = list(fields or rows[0].keys())
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([format_value(row.get(f)) for f in fields])
        text = buf.getvalue()
    elif fmt == "json":
        objs = [{f: _json_value(row.get(f)) for f in fields} for row in rows]
        text = json.dumps(objs, indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def parse_value(text: str):
    if text in ("true", "false"):
        return text == "true"
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path_or_text: str, is_text: bool = False) -> List[Row]:
    """Inverse of :func:`emit` for CSV output."""
    if is_text:
        fh = io.StringIO(path_or_text)
    else:
        fh = open(path_or_text, encoding="utf-8", newline="")
    with fh:
        return [{k: parse_value(v) for k, v in rec.items()} for rec in csv.DictReader(fh)]


def read_json(path: str) -> List[Row]:
    with open(path, encoding="utf-8") as fh:
        objs = json.load(fh)
    return [{k: (parse_value(v) if isinstance(v, str) and v.endswith("inf") else v)
             for k, v in obj.items()} for obj in objs]


def rows_to_table(rows: Iterable[Row], fields: Sequence[str]) -> str:
    """Aligned plain-text table for terminal summaries."""
    rows = list(rows)
    cells = [[format_value(r.get(f)) if not isinstance(r.get(f), float)
              else f"{r.get(f):.4g}" for f in fields] for r in rows]
    widths = [max(len(f), *(len(c[i]) for c in cells)) for i, f in enumerate(fields)]
    lines = ["  ".join(f.ljust(w) for f, w in zip(fields, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(cell, widths)) for cell in cells]
    return "\n".join(lines)
