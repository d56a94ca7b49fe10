"""Parameter sweeps: independent cells on a grid, gathered in grid order."""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Sequence, Tuple

from tqdm import tqdm

from ccqme.errors import CcqmeError, OutOfDomain

logger = logging.getLogger(__name__)

CellExperiment = Callable[[Dict[str, float]], Mapping[str, float]]


@dataclass(frozen=True)
class SweepCell:
    index: Tuple[int, ...]
    params: Dict[str, float]
    metrics: Dict[str, float] = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    axes: Tuple[Tuple[str, Tuple[float, ...]], ...]
    cells: Tuple[SweepCell, ...]

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(values) for _, values in self.axes)

    @property
    def metric_names(self) -> List[str]:
        names: List[str] = []
        for cell in self.cells:
            names += [k for k in cell.metrics if k not in names]
        return names

    def failed(self) -> List[SweepCell]:
        return [c for c in self.cells if not c.ok]

    def to_rows(self) -> List[Dict[str, Any]]:
        """One row per cell: grid indices, axis values, every metric (NaN when missing) and the error."""
        names = self.metric_names
        rows = []
        for cell in self.cells:
            row: Dict[str, Any] = {}
            for (axis, _), i in zip(self.axes, cell.index):
                row[f"{axis}_index"] = i
            row.update(cell.params)
            for name in names:
                row[name] = cell.metrics.get(name, math.nan)
            row["error"] = cell.error or ""
            rows.append(row)
        return rows


def _run_cell(experiment: CellExperiment, index, params) -> SweepCell:
    try:
        metrics = {k: float(v) for k, v in experiment(dict(params)).items()}
    except CcqmeError as exc:
        logger.warning("cell %s failed: %s: %s", params, type(exc).__name__, exc)
        return SweepCell(index, params, error=f"{type(exc).__name__}: {exc}")
    return SweepCell(index, params, metrics)


def sweep(
    axes: Sequence[Tuple[str, Sequence[float]]],
    experiment: CellExperiment,
    workers: int = 1,
    progress: bool = False,
) -> SweepResult:
    axes = tuple((name, tuple(float(v) for v in values)) for name, values in axes)
    for name, values in axes:
        if not values or not all(math.isfinite(v) for v in values):
            raise OutOfDomain(f"sweep axis {name!r} must hold finite values")

    grid = [
        (index, {name: values[i] for (name, values), i in zip(axes, index)})
        for index in itertools.product(*(range(len(values)) for _, values in axes))
    ]
    cells: List[SweepCell | None] = [None] * len(grid)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor, tqdm(
        total=len(grid), desc="sweep cells", unit="cell", disable=not progress
    ) as pbar:
        futures = {
            executor.submit(_run_cell, experiment, index, params): k
            for k, (index, params) in enumerate(grid)
        }
        for future in as_completed(futures):
            cells[futures[future]] = future.result()
            pbar.update(1)

    result = SweepResult(axes=axes, cells=tuple(cells))
    if result.failed():
        logger.warning("%d of %d sweep cells failed", len(result.failed()), len(grid))
    return result
