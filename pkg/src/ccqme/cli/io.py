"""CSV and manifest files; CSV is written at full double precision so it round-trips bitwise."""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping

import numpy as np
import pandas as pd

from ccqme.errors import ConfigError, NoOverlap, OutOfDomain

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_csv(path: str | Path, columns: Mapping[str, Any] | Iterable[Mapping[str, Any]]) -> Path:
    """Write a column mapping or a list of rows: header row, comma separated, UNIX newlines."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(dict(columns)) if isinstance(columns, Mapping) else pd.DataFrame(list(columns))
    frame.to_csv(out, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("wrote %s (%d rows)", out, len(frame))
    return out


def read_csv(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Externally supplied observables on a time grid, e.g. published benchmark curves."""

    t: np.ndarray
    columns: Dict[str, np.ndarray]

    def __post_init__(self):
        if self.t.ndim != 1 or self.t.size == 0 or np.any(np.diff(self.t) <= 0):
            raise OutOfDomain("reference times must be strictly increasing")
        for name, values in {"t": self.t, **self.columns}.items():
            if not np.all(np.isfinite(values)):
                raise OutOfDomain(f"reference column {name!r} has non-finite values")

    def observable(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise ConfigError(f"reference has no column {name!r}; columns are {sorted(self.columns)}") from None


def load_reference(path: str | Path) -> ReferenceTrajectory:
    frame = read_csv(path)
    if "t" not in frame.columns:
        raise ConfigError(f"{path}: reference CSV needs a 't' column")
    numeric = frame.select_dtypes(include="number")
    return ReferenceTrajectory(
        t=numeric["t"].to_numpy(dtype=float),
        columns={c: numeric[c].to_numpy(dtype=float) for c in numeric.columns if c != "t"},
    )


def compare_observable(run: ReferenceTrajectory, reference: ReferenceTrajectory, observable: str):
    """Reference interpolated linearly onto the run grid where the two overlap.

    Returns the difference table and a max/mean summary.
    """
    lo, hi = max(run.t[0], reference.t[0]), min(run.t[-1], reference.t[-1])
    if lo > hi:
        raise NoOverlap(
            f"run covers [{run.t[0]:.6g}, {run.t[-1]:.6g}], reference [{reference.t[0]:.6g}, {reference.t[-1]:.6g}]"
        )
    mask = (run.t >= lo) & (run.t <= hi)
    t = run.t[mask]
    ours = run.observable(observable)[mask]
    theirs = np.interp(t, reference.t, reference.observable(observable))
    diff = np.abs(ours - theirs)
    table = {"t": t, "run": ours, "reference": theirs, "abs_diff": diff}
    summary = {"observable": observable, "points": int(t.size), "max_abs_diff": float(diff.max()),
               "mean_abs_diff": float(diff.mean())}
    return table, summary


def write_manifest(out_dir: str | Path, payload: Dict[str, Any]) -> Path:
    """manifest.json goes last: its presence marks a complete run."""
    out = Path(out_dir) / "manifest.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")
    return out


def _jsonable(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, tuple)):
        return list(value)
    return str(value)
