"""
Reporting - Run reports for every subcommand
Collects graph statistics, probabilities, timings and host information and
writes them as JSON or CSV with 12 significant digits
"""

import csv
import io
import json
import logging
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import psutil

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


def format_number(value: float, digits: int = SIGNIFICANT_DIGITS) -> str:
    return f"{value:.{digits}g}"


def host_info() -> Dict[str, Any]:
    """Host and process information recorded with every report"""
    try:
        memory = psutil.virtual_memory()
        process = psutil.Process()
        return {
            'system': platform.system(),
            'machine': platform.machine(),
            'python': platform.python_version(),
            'cpu_count': psutil.cpu_count(),
            'memory_total': f"{memory.total / (1024**3):.2f} GB",
            'rss_mb': round(process.memory_info().rss / (1024**2), 1),
        }
    except Exception as e:
        logger.error(f"Error getting host info: {e}")
        return {}


@dataclass
class RunReport:
    """
    Result of one subcommand

    probs maps vertex labels to probabilities; rows holds tabular output such as
    benchmark timings, greedy traces or per-trial verification deltas.
    """

    command: str
    n: int = 0
    m: int = 0
    omega: Optional[int] = None
    pathwidth: Optional[int] = None
    seeds: List[str] = field(default_factory=list)
    probs: Dict[str, float] = field(default_factory=dict)
    sigma: Optional[float] = None
    include_seeds_sigma: Optional[float] = None
    peak_states: Dict[str, int] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    deltas: Dict[str, float] = field(default_factory=dict)
    stderr: Dict[str, float] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)
    host: Dict[str, Any] = field(default_factory=dict)

    def _rounded(self, value):
        if isinstance(value, float):
            return float(format_number(value))
        if isinstance(value, dict):
            return {k: self._rounded(v) for k, v in value.items()}
        if isinstance(value, list):
            return [self._rounded(v) for v in value]
        return value

    def to_dict(self) -> Dict[str, Any]:
        return self._rounded(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """
        CSV with a 'section,key,value' layout

        Tabular rows, when present, follow as a second table under a 'rows'
        header line.
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['section', 'key', 'value'])
        scalars = {
            'command': self.command, 'n': self.n, 'm': self.m, 'omega': self.omega,
            'pathwidth': self.pathwidth, 'seeds': ' '.join(self.seeds),
            'sigma': self.sigma, 'include_seeds_sigma': self.include_seeds_sigma,
        }
        for key, value in scalars.items():
            if value is not None:
                writer.writerow(['run', key, self._cell(value)])
        for section in ('probs', 'stderr', 'peak_states', 'timings', 'deltas', 'meta', 'host'):
            for key, value in getattr(self, section).items():
                writer.writerow([section, key, self._cell(value)])
        if self.rows:
            columns = list(self.rows[0].keys())
            writer.writerow([])
            writer.writerow(['rows'] + columns)
            for row in self.rows:
                writer.writerow([''] + [self._cell(row.get(c)) for c in columns])
        return buffer.getvalue()

    @staticmethod
    def _cell(value) -> str:
        if isinstance(value, float):
            return format_number(value)
        if value is None:
            return ''
        return str(value)

    def render(self, fmt: str = 'json') -> str:
        if fmt == 'csv':
            return self.to_csv()
        if fmt != 'json':
            raise ValueError(f"unknown report format {fmt!r}")
        return self.to_json()

    def write(self, path: Optional[str], fmt: str = 'json') -> str:
        """Write to path, or return the text when path is None"""
        text = self.render(fmt)
        if path:
            Path(path).write_text(text)
            logger.info(f"Report written to {path}")
        return text


def read_csv_probs(text: str) -> Dict[str, float]:
    """Probabilities section of a CSV report"""
    probs = {}
    for row in csv.reader(io.StringIO(text)):
        if len(row) == 3 and row[0] == 'probs':
            probs[row[1]] = float(row[2])
    return probs


def summary_lines(report: RunReport) -> List[str]:
    """Short human-readable summary for the console"""
    lines = [f"{report.command}: n={report.n} m={report.m} omega={report.omega}"]
    if report.sigma is not None:
        lines.append(f"sigma(S) = {format_number(report.sigma)}  (with seeds: "
                     f"{format_number(report.include_seeds_sigma)})")
    for key, value in report.deltas.items():
        lines.append(f"{key} = {format_number(value)}")
    if report.timings:
        total = sum(report.timings.values())
        lines.append(f"wall time {total:.4f}s")
    return lines
