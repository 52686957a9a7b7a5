"""Result records and their CSV / JSON persistence.

A verdict row passes when ``statistic <relation> tolerance`` holds; rows with
``passed`` empty are informational. Floats are written with 17 significant
digits so CSV bytes are reproducible; wall-clock times go only to the JSON
manifest for the same reason.
"""
from __future__ import annotations

import csv
import json
import math
import operator
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

COLUMNS = ["experiment", "check", "t", "eps", "xi", "lam", "n_samples",
           "estimate_re", "estimate_im", "stderr", "oracle_re", "oracle_im", "oracle_source",
           "statistic", "relation", "tolerance", "z", "passed", "seed", "note"]
ORACLE_SOURCES = ("quadrature", "closed-form", "MC-oracle", "none")
_RELATIONS = {"<=": operator.le, "<": operator.lt, ">=": operator.ge, ">": operator.gt}


@dataclass
class ResultRecord:
    experiment: str
    check: str
    estimate: complex | float | None = None
    stderr: float | None = None
    oracle: complex | float | None = None
    oracle_source: str = "none"
    statistic: float | None = None
    relation: str = "<="
    tolerance: float | None = None
    z: float | None = None
    t: float | None = None
    eps: float | None = None
    xi: float | None = None
    lam: float | None = None
    n_samples: int | None = None
    seed: int | None = None
    note: str = ""
    wall_time: float = 0.0
    passed: bool | None = field(default=None)

    def __post_init__(self):
        if self.oracle_source not in ORACLE_SOURCES:
            raise ValueError(f"unknown oracle source {self.oracle_source!r}")
        if self.relation not in _RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.passed is None and self.statistic is not None and self.tolerance is not None:
            self.passed = bool(_RELATIONS[self.relation](self.statistic, self.tolerance))

    @property
    def is_verdict(self) -> bool:
        return self.passed is not None

    def row(self) -> dict:
        est = None if self.estimate is None else complex(self.estimate)
        orc = None if self.oracle is None else complex(self.oracle)
        row = {
            "experiment": self.experiment, "check": self.check,
            "t": self.t, "eps": self.eps, "xi": self.xi, "lam": self.lam, "n_samples": self.n_samples,
            "estimate_re": None if est is None else est.real,
            "estimate_im": None if est is None else est.imag,
            "stderr": self.stderr,
            "oracle_re": None if orc is None else orc.real,
            "oracle_im": None if orc is None else orc.imag,
            "oracle_source": self.oracle_source,
            "statistic": self.statistic, "relation": self.relation, "tolerance": self.tolerance,
            "z": self.z, "passed": self.passed, "seed": self.seed, "note": self.note,
        }
        return {k: _plain(v) for k, v in row.items()}

    def summary(self) -> str:
        verdict = {True: "PASS", False: "FAIL", None: "info"}[self.passed]
        if self.statistic is None:
            stat = ""
        elif self.tolerance is None:
            stat = f"{self.statistic:.4g}"
        else:
            stat = f"{self.statistic:.4g} {self.relation} {self.tolerance:.4g}"
        return f"[{verdict}] {self.experiment}/{self.check} {stat} {self.note}".rstrip()


def _plain(v):
    """numpy scalars to built-in Python numbers."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def all_passed(records) -> bool:
    return all(r.passed for r in records if r.is_verdict)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return fmt_value(v)
    return v


def emit_results(records, out_dir, fmt: str = "csv", config=None, stem: str = "results") -> list[Path]:
    """Write records (CSV or JSON) plus a JSON manifest; returns the written paths."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    records = list(records)
    written = []
    if fmt == "csv":
        path = out / f"{stem}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for r in records:
                row = r.row()
                w.writerow([fmt_value(row[c]) for c in COLUMNS])
    else:
        path = out / f"{stem}.json"
        rows = [{k: _json_value(v) for k, v in r.row().items()} for r in records]
        path.write_text(json.dumps(rows, indent=1) + "\n")
    written.append(path)
    manifest = {
        "records": len(records),
        "verdicts": sum(r.is_verdict for r in records),
        "all_passed": all_passed(records),
        "format": fmt,
        "wall_time": [[r.experiment, r.check, r.wall_time] for r in records],
    }
    if config is not None:
        manifest["config_hash"] = config.hash()
        manifest["seed"] = config.rng_seed
        manifest["config"] = config.to_flat()
    mpath = out / f"{stem}_manifest.json"
    mpath.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    written.append(mpath)
    return written


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())


def records_as_dicts(records) -> list[dict]:
    return [asdict(r) for r in records]
