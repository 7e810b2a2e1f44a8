"""Report, draws and manifest files.

draws.bin layout: 8-byte magic ``OBDRAWS1``, little-endian uint64 draw count,
then that many little-endian float64 values.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from cli import __version__
from inference.summary import IntervalEstimate, PosteriorDraws
from simulation.mc_orchestrator import REPORT_COLUMNS, McReport
from utils.errors import EmptyInput, ReportIoError

logger = logging.getLogger(__name__)

DRAWS_MAGIC = b"OBDRAWS1"
HEADER_BYTES = 16
INTERVAL_COLUMNS = ("term", "point", "se", "lower", "upper", "level")
FLOAT_FORMAT = "%.17g"

Report = Union[McReport, IntervalEstimate, Sequence[IntervalEstimate]]


def _frame(report: Report) -> pd.DataFrame:
    if isinstance(report, McReport):
        if len(report) == 0:
            raise EmptyInput("report has no rows")
        return report.to_frame()
    intervals = [report] if isinstance(report, IntervalEstimate) else list(report)
    if not intervals:
        raise EmptyInput("report has no rows")
    return pd.DataFrame([i.to_dict() for i in intervals], columns=list(INTERVAL_COLUMNS))


class ReportWriter:
    """Every file a run produces goes through one writer bound to the output directory."""

    def __init__(self, out_dir: Union[str, Path], fmt: str = "csv"):
        if fmt not in ("csv", "jsonl"):
            raise ReportIoError(f"unknown report format {fmt!r}")
        self.out_dir = Path(out_dir)
        self.fmt = fmt
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ReportIoError(f"cannot create output directory {self.out_dir}: {str(e)}") from e
        self.written: List[Path] = []

    def _record(self, path: Path) -> Path:
        self.written.append(path)
        logger.info(f"Wrote {path}")
        return path

    def report(self, report: Report, stem: str = "report") -> Path:
        frame = _frame(report)
        path = self.out_dir / f"{stem}.{self.fmt}"
        try:
            if self.fmt == "csv":
                frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
            else:
                with path.open("w", encoding="utf-8") as handle:
                    for record in frame.to_dict(orient="records"):
                        handle.write(json.dumps(_plain(record)) + "\n")
        except OSError as e:
            raise ReportIoError(f"cannot write {path}: {str(e)}") from e
        return self._record(path)

    def draws(self, draws: PosteriorDraws) -> List[Path]:
        if draws.levels == 1:
            return [self._record(_write_draws_file(self.out_dir / "draws.bin", draws.draws))]
        return [
            self._record(_write_draws_file(self.out_dir / f"draws_level{j + 1}.bin", draws.draws[:, j]))
            for j in range(draws.levels)
        ]

    def manifest(self, seed: int, config_digest: str, extra: Optional[Dict[str, Any]] = None) -> Path:
        payload = {"version": __version__, "seed": seed, "config_digest": config_digest}
        payload.update(extra or {})
        payload["files"] = [p.name for p in self.written]
        path = self.out_dir / "manifest.json"
        try:
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            raise ReportIoError(f"cannot write {path}: {str(e)}") from e
        return self._record(path)


def _plain(record: Dict[str, Any]) -> Dict[str, Any]:
    # numpy scalars from the frame are not JSON serializable
    return {k: v.item() if isinstance(v, np.generic) else v for k, v in record.items()}


def _write_draws_file(path: Path, values: np.ndarray) -> Path:
    values = np.ascontiguousarray(values, dtype="<f8")
    header = DRAWS_MAGIC + np.array([values.shape[0]], dtype="<u8").tobytes()
    try:
        path.write_bytes(header + values.tobytes())
    except OSError as e:
        raise ReportIoError(f"cannot write {path}: {str(e)}") from e
    return path


def emit_report(report: Report, out_dir: Union[str, Path], fmt: str = "csv") -> Path:
    return ReportWriter(out_dir, fmt).report(report)


def read_report(path: Union[str, Path]) -> McReport:
    path = Path(path)
    try:
        if path.suffix == ".jsonl":
            with path.open(encoding="utf-8") as handle:
                records = [json.loads(line) for line in handle if line.strip()]
        else:
            records = pd.read_csv(path, float_precision="round_trip").to_dict(orient="records")
    except (OSError, ValueError, pd.errors.ParserError) as e:
        raise ReportIoError(f"cannot read report {path}: {str(e)}") from e
    if records and list(records[0]) != list(REPORT_COLUMNS):
        raise ReportIoError(f"{path} does not have the Monte Carlo report columns")
    return McReport.from_records(records)


def write_draws(draws: PosteriorDraws, out_dir: Union[str, Path]) -> List[Path]:
    return ReportWriter(out_dir).draws(draws)


def read_draws(path: Union[str, Path]) -> PosteriorDraws:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise ReportIoError(f"cannot read draws {path}: {str(e)}") from e
    if len(blob) < HEADER_BYTES or blob[:8] != DRAWS_MAGIC:
        raise ReportIoError(f"{path} is not a draws file (bad magic)")
    count = int(np.frombuffer(blob[8:HEADER_BYTES], dtype="<u8")[0])
    if len(blob) != HEADER_BYTES + 8 * count:
        raise ReportIoError(f"{path} declares {count} draws but holds {(len(blob) - HEADER_BYTES) // 8}")
    values = np.frombuffer(blob[HEADER_BYTES:], dtype="<f8").astype(float)
    return PosteriorDraws(draws=values, meta={"source": str(path)})


def write_manifest(
    out_dir: Union[str, Path], seed: int, config_digest: str, extra: Optional[Dict[str, Any]] = None
) -> Path:
    return ReportWriter(out_dir).manifest(seed, config_digest, extra)
