"""JSON and CSV writers and readers for everything the command line emits."""
import csv
import dataclasses
import json
import logging
import math
from enum import Enum
from pathlib import Path

import numpy as np

from merosin.errors import OutputError, ValidationError
from merosin.paramlab import BifurcationConstants

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 15

WITNESS_FIELDS = {
    "x_star": "witness_x_star",
    "p_2star": "witness_p_2star",
    "y1": "witness_y1",
    "y2": "witness_y2",
    "t_hat": "witness_t_hat",
}


def round_float(x):
    """Round to 15 significant digits; non-finite values become None"""
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def to_jsonable(obj):
    """Convert records, enums, complex numbers and numpy values to JSON-ready structures"""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Enum):
        return obj.value if not isinstance(obj.value, int) else obj.name
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": round_float(obj.real), "im": round_float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Path):
        return str(obj)
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [to_jsonable(v) for v in obj]
    return str(obj)


def dumps(obj):
    return json.dumps(to_jsonable(obj), indent=2, ensure_ascii=False)


def write_json(obj, path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(dumps(obj))
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e
    logger.info(f"Wrote {path}")


def read_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def constants_to_json(c):
    """The `params` report: the five constants plus a witnesses block"""
    report = {name: round_float(value) for name, value in c.ladder() if name != "one"}
    report["witnesses"] = {key: round_float(getattr(c, attr)) for key, attr in WITNESS_FIELDS.items()}
    return report


def constants_from_json(data):
    """Rebuild BifurcationConstants from a `params` report"""
    try:
        witnesses = data["witnesses"]
        return BifurcationConstants(
            lambda_2star=float(data["lambda_2star"]),
            lambda_star=float(data["lambda_star"]),
            lambda_hat=float(data["lambda_hat"]),
            lambda_1=float(data["lambda_1"]),
            lambda_2=float(data["lambda_2"]),
            **{attr: float(witnesses[key]) for key, attr in WITNESS_FIELDS.items() if key in witnesses},
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed constants report: {e}") from e


def write_bifurcation_csv(table, path):
    """Header lambda,ordinate; a row with no ordinates keeps one line with an empty field"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["lambda", "ordinate"])
            for lam, y in table.samples():
                writer.writerow([repr(round_float(lam)), "" if y is None else repr(round_float(y))])
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e
    logger.info(f"Wrote {len(table.rows)} scan rows to {path}")


def read_bifurcation_csv(path):
    """
    Read a scan CSV back.

    Returns:
        dict: lambda -> list of ordinates (empty for escaped or pole rows),
            in file order
    """
    rows = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != ["lambda", "ordinate"]:
            raise ValidationError(f"{path} is not a scan table: header {reader.fieldnames}")
        for row in reader:
            ordinates = rows.setdefault(float(row["lambda"]), [])
            if row["ordinate"]:
                ordinates.append(float(row["ordinate"]))
    return rows
