"""
Report storage: exact JSON encoding of lab results and the outputs directory
"""
import dataclasses
import json
import logging
import os
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List

from mpmath import mpf

from tools.arith import ConfigError

logger = logging.getLogger(__name__)


def encode_rational(x: Fraction) -> Dict[str, str]:
    return {'num': str(x.numerator), 'den': str(x.denominator)}


def decode_rational(data: Dict[str, str]) -> Fraction:
    """Inverse of encode_rational"""
    try:
        return Fraction(int(data['num']), int(data['den']))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not an encoded rational: {data!r}") from e


def encode(obj: Any) -> Any:
    """
    Convert a result into JSON-ready data

    Fractions become {"num", "den"} string pairs and reals become
    {"value", "abs_error"}. Dataclass fields declared with repr=False are left out.
    """
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return encode_rational(obj)
    if isinstance(obj, mpf):
        value = float(obj)
        return {'value': value, 'abs_error': float(abs(obj - value))}
    if isinstance(obj, float):
        return {'value': obj, 'abs_error': 0.0}
    if isinstance(obj, Enum):
        return obj.value
    if hasattr(obj, 'to_json'):
        return obj.to_json()
    if dataclasses.is_dataclass(obj):
        return {f.name: encode(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, frozenset, set)):
        items = sorted(obj) if isinstance(obj, (frozenset, set)) else obj
        return [encode(v) for v in items]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(data: Any) -> str:
    """Canonical JSON text: sorted keys, fixed separators"""
    return json.dumps(encode(data), sort_keys=True, separators=(',', ':'), ensure_ascii=False)


class ReportStore:
    def __init__(self, outputs_dir: str, format_version: str):
        """
        Initialize the report store

        Args:
            outputs_dir: Directory receiving report files
            format_version: Version tag written into every report
        """
        self.outputs_dir = outputs_dir
        self.format_version = format_version

    def envelope(self, command: str, config: Dict[str, Any], body: Dict[str, Any]) -> Dict[str, Any]:
        """Top-level report with format version and config echo"""
        return {'format_version': self.format_version, 'command': command, 'config': config, **body}

    def _path(self, name: str) -> str:
        if os.path.isabs(name) or os.path.dirname(name):
            return name
        return os.path.join(self.outputs_dir, name)

    def write_report(self, name: str, report: Dict[str, Any]) -> str:
        """
        Write one JSON report

        Args:
            name: File name, relative to the outputs directory unless it has a directory part
            report: Report data

        Returns:
            Path written
        """
        path = self._path(name)
        os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(dumps(report) + '\n')
        logger.info(f"Wrote report {path}")
        return path

    def write_lines(self, name: str, records: Iterable[Any]) -> str:
        """Write JSON lines, one record per line"""
        path = self._path(name)
        os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
        count = 0
        with open(path, 'w', encoding='utf-8') as f:
            for record in records:
                f.write(dumps(record) + '\n')
                count += 1
        logger.info(f"Wrote {count} records to {path}")
        return path

    def read_report(self, name: str) -> Dict[str, Any]:
        with open(self._path(name), encoding='utf-8') as f:
            return json.load(f)

    def read_lines(self, name: str) -> List[Dict[str, Any]]:
        with open(self._path(name), encoding='utf-8') as f:
            return [json.loads(line) for line in f if line.strip()]
