"""Instance / results file formats (JSON) and the sweep CSV schema.

Conventions: complex numbers serialize as two-element [re, im] arrays;
matrices are row-major flat lists with explicit ``dims``; every document
carries a ``format_version``.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .config import Config, config_from_dict
from .dynamics import MeasurementSet, Spectrum
from .experiments import TrialResult

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed instance or results document."""


def _matrix(arr: np.ndarray) -> dict:
    return {"dims": list(arr.shape), "data": [float(v) for v in arr.ravel()]}


def _unmatrix(doc: dict) -> np.ndarray:
    try:
        return np.asarray(doc["data"], dtype=np.float64).reshape(doc["dims"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad matrix field: {exc}") from exc


def _complex_list(values) -> list:
    return [[float(np.real(v)), float(np.imag(v))] for v in values]


def instance_to_dict(spec: Spectrum, ms: MeasurementSet,
                     config: Config) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "instance",
        "config": config.as_dict(),
        "truth_spectrum": [float(v) for v in spec.values],
        "clean": _matrix(ms.clean),
        "corrupted": _matrix(ms.corrupted),
        "outliers": _matrix(ms.outliers),
        "noise": _matrix(ms.noise),
        "outlier_support": [int(v) for v in ms.outlier_support],
    }


def instance_from_dict(doc: dict):
    if doc.get("kind") != "instance":
        raise FormatError("not an instance document")
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {doc.get('format_version')}")
    cfg_doc = dict(doc["config"])
    cfg_doc.pop("J", None)
    cfg_doc.pop("K", None)  # re-derived; instance keeps explicit K only via L
    config = config_from_dict(cfg_doc)
    spec = Spectrum(d=config.d, values=np.asarray(doc["truth_spectrum"]))
    ms = MeasurementSet(
        clean=_unmatrix(doc["clean"]),
        corrupted=_unmatrix(doc["corrupted"]),
        outlier_support=np.asarray(doc["outlier_support"], dtype=np.int64),
        outliers=_unmatrix(doc["outliers"]),
        noise=_unmatrix(doc["noise"]),
    )
    if ms.clean.shape != (config.J, config.L):
        raise FormatError("measurement dims do not match config")
    return spec, ms, config


def result_to_dict(res: TrialResult) -> dict:
    doc = dataclasses.asdict(res)
    doc["channel_roots"] = {str(j): _complex_list(roots)
                            for j, roots in res.channel_roots.items()}
    doc["format_version"] = FORMAT_VERSION
    doc["kind"] = "result"
    return _jsonable(doc)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and np.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def write_json(doc: dict, path: str):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc


# --- sweep CSV -------------------------------------------------------------

CSV_COLUMNS = ["alpha", "c", "sigma", "method", "trial", "seed", "RE",
               "snr_spec", "snr_outlier", "snr_gauss", "wall_time_s",
               "failed", "median_RE"]


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if np.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def sweep_csv_lines(results, aggregates) -> list[str]:
    """Trial rows followed by aggregate rows (trial = -1, median_RE set).

    wall_time_s is left empty so re-runs with the same seed are
    byte-identical; per-trial timings live in the results JSON.
    """
    lines = [",".join(CSV_COLUMNS)]
    for r in results:
        row = [r.config["alpha"], r.config["c"], r.config["sigma"], r.method,
               r.trial, r.seed, r.re, r.snr_spec, r.snr_outlier, r.snr_gauss,
               "", r.failed, ""]
        lines.append(",".join(_fmt(v) for v in row))
    for agg in aggregates:
        row = [agg["alpha"], agg["c"], agg["sigma"], agg.get("method", ""),
               -1, "", "", agg.get("snr_spec", ""),
               agg.get("snr_outlier", ""), agg.get("snr_gauss", ""), "", "",
               agg.get("median_re", "")]
        lines.append(",".join(_fmt(v) for v in row))
    return lines


def write_sweep_csv(path: str, results, aggregates):
    with open(path, "w") as fh:
        fh.write("\n".join(sweep_csv_lines(results, aggregates)) + "\n")
