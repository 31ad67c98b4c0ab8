# symbench/utils/reports.py

"""Report writers and readers for benchmarking campaigns.

Every writer produces byte-identical output for identical inputs: JSON keys
are sorted, floats are written with repr precision, and no timestamps are
recorded.

Key functionalities:
- Curve CSV (length, mean, stderr, n_sequences, shots) via pandas
- Fit, verification and campaign reports as JSON
- Two-column plot data readable by gnuplot
- Environment metadata (package and library versions)
"""

from __future__ import annotations

import json
import platform
from importlib import metadata
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import scipy

from symbench.core.protocol import CSV_COLUMNS, DecayCurve
from symbench.utils.exceptions import ReportError
from symbench.utils.logging import get_logger

log = get_logger(__name__)


def _ensure_parent(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportError(f"Cannot create output directory {path.parent}: {e}") from e


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


def to_json(payload: Any, indent: int | None = 2) -> str:
    return json.dumps(_jsonable(payload), indent=indent, sort_keys=True)


def save_curve_csv(curve: DecayCurve, path: str | Path) -> Path:
    """Write a curve with the fixed column order.

    Raises:
        ReportError: If the file cannot be written
    """
    path = Path(path)
    _ensure_parent(path)
    try:
        curve.to_frame().to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        log.error("curve_write_failed", path=str(path), error=str(e))
        raise ReportError(f"Cannot write curve to {path}: {e}") from e
    log.debug("curve_saved", path=str(path), points=len(curve.lengths))
    return path


def load_curve_csv(path: str | Path, label: str | None = None) -> DecayCurve:
    """Read a curve CSV; only ``length`` and ``mean`` are required.

    A missing ``stderr`` column means the fit falls back to uniform weights,
    which is logged as a warning.

    Raises:
        ReportError: If the file is unreadable or malformed
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        log.error("curve_read_failed", path=str(path), error=str(e))
        raise ReportError(f"Cannot read curve CSV {path}: {e}") from e
    unknown = [c for c in frame.columns if c not in CSV_COLUMNS]
    if unknown:
        raise ReportError(f"{path}: unexpected columns {unknown}")
    if "stderr" not in frame.columns:
        log.warning("curve_without_stderr", path=str(path), fallback="uniform_weights")
    if frame.isna().any().any():
        raise ReportError(f"{path}: curve contains empty or non-numeric cells")
    return DecayCurve.from_frame(frame, label or path.stem.removesuffix("_curve"))


def save_json(payload: Any, path: str | Path) -> Path:
    """Write a JSON report.

    Raises:
        ReportError: If the file cannot be written
    """
    path = Path(path)
    _ensure_parent(path)
    try:
        path.write_text(to_json(payload) + "\n", encoding="utf-8")
    except OSError as e:
        log.error("report_write_failed", path=str(path), error=str(e))
        raise ReportError(f"Cannot write report to {path}: {e}") from e
    return path


def save_plot_data(curve: DecayCurve, path: str | Path) -> Path:
    """Two whitespace-separated columns (length, mean) with a comment header.

    Plot with gnuplot: ``plot "D.dat" using 1:2 with linespoints``.
    """
    path = Path(path)
    _ensure_parent(path)
    lines = [f"# {curve.label}", "# length mean"]
    lines += [f"{y} {m!r}" for y, m in zip(curve.lengths, curve.means)]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise ReportError(f"Cannot write plot data to {path}: {e}") from e
    return path


def load_plot_data(path: str | Path) -> tuple[list[int], list[float]]:
    """Inverse of :func:`save_plot_data`."""
    try:
        table = np.loadtxt(path, comments="#", ndmin=2)
    except (OSError, ValueError) as e:
        raise ReportError(f"Cannot read plot data {path}: {e}") from e
    return [int(v) for v in table[:, 0]], [float(v) for v in table[:, 1]]


def environment_metadata() -> dict[str, str]:
    """Versions that influence numerical results; deliberately timestamp-free."""
    try:
        package = metadata.version("symbench")
    except metadata.PackageNotFoundError:
        from symbench import __version__

        package = __version__
    return {
        "package": package,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }
