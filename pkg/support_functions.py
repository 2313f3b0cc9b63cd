import hashlib
import json
import logging
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple

import jsonschema
import numpy as np
import pandas as pd

from config import (
    CSV_FLOAT_FORMAT,
    JOBS_ENV,
    LOGGER_NAME,
    SCHEMA_VERSION,
    TOOL_NAME,
    TOOL_VERSION,
)

logger = logging.getLogger(LOGGER_NAME)


class LabError(Exception):
    """Base class for every error the lab raises on purpose."""


class ConfigError(LabError, ValueError):
    """Invalid model, grid or run configuration."""


class ResourceLimitError(LabError, RuntimeError):
    """A problem too large for the dense desk-scale machinery."""


class SpectralConditionError(LabError, ValueError):
    """A spectral admissibility condition is violated."""


class EnsembleError(LabError, RuntimeError):
    """A single realization of an ensemble failed."""

    def __init__(self, message: str, seed: int):
        super().__init__(message)
        self.seed = seed

    def __reduce__(self):
        return type(self), (self.args[0], self.seed)


@dataclass(frozen=True)
class CheckReport:
    """
    Outcome of one numerical inequality check.

    worst_violation is max(0, lhs - rhs) over every comparison of the check,
    slack is min(rhs - lhs) (negative when violated).
    """
    name: str
    instance: dict
    worst_violation: float
    slack: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    @classmethod
    def from_margins(cls, name: str, instance: dict, lhs: np.ndarray, rhs: np.ndarray,
                     tolerance: float, details: Optional[dict] = None) -> 'CheckReport':
        differences = np.asarray(rhs, dtype=float) - np.asarray(lhs, dtype=float)
        slack = float(differences.min()) if differences.size else 0.0
        worst = max(0.0, -slack)
        return cls(name=name, instance=instance, worst_violation=worst, slack=slack,
                   tolerance=tolerance, passed=bool(worst <= tolerance), details=details or {})

    def with_tolerance(self, tolerance: float) -> 'CheckReport':
        """The report judged against an overriding tolerance; overrides are strict, so 0 always fails."""
        return CheckReport(self.name, self.instance, self.worst_violation, self.slack,
                           tolerance, bool(self.worst_violation < tolerance), self.details)

    def to_json_line(self) -> str:
        return canonical_json({
            'name': self.name,
            'params': self.instance,
            'margin': {'worst_violation': self.worst_violation, 'slack': self.slack},
            'tolerance': self.tolerance,
            'pass': self.passed,
        })


def sample_statistics(values: Sequence[float]) -> Tuple[float, float]:
    """
    Mean and standard error of a sample, reduced in index order.

    Args:
        values: per-realization values

    Returns:
        Tuple[float, float]: the sample mean and stdev / sqrt(R) (0 for R = 1)
    """
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise ValueError('Cannot summarise an empty sample.')
    mean = float(data.mean())
    if data.size == 1:
        return mean, 0.0
    return mean, float(data.std(ddof=1) / np.sqrt(data.size))


def _to_plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_plain(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def canonical_json(payload: Any) -> str:
    """
    Serializes a payload to compact JSON with sorted keys.

    Args:
        payload: dicts, lists, tuples, numpy scalars and arrays nest freely

    Returns:
        str: the canonical text; equal payloads give equal strings
    """
    return json.dumps(_to_plain(payload), sort_keys=True, separators=(',', ':'))


def digest(payload: Any) -> str:
    """
    SHA-256 hex digest of raw bytes or of a payload's canonical JSON.

    Args:
        payload: bytes are hashed as they are, anything else through canonical_json

    Returns:
        str: 64 hex characters
    """
    if isinstance(payload, (bytes, bytearray)):
        return hashlib.sha256(payload).hexdigest()
    return hashlib.sha256(canonical_json(payload).encode('utf-8')).hexdigest()


def array_digest(array: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(array).tobytes()).hexdigest()


def write_csv(frame: pd.DataFrame, path: Path, metadata: dict) -> str:
    """
    Writes a DataFrame as CSV preceded by '#'-prefixed metadata lines.

    Args:
        frame   : the table to write (column order is kept)
        path    : destination file
        metadata: key/value pairs for the header; must include 'manifest'

    Returns:
        str: the SHA-256 digest of the written bytes
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # Sorted metadata keeps the header byte-stable
    header = ''.join(f'# {key}: {metadata[key]}\n' for key in sorted(metadata))
    body = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    data = (header + body).encode('utf-8')
    path.write_bytes(data)
    file_digest = digest(data)
    logger.info(f'Wrote {path} ({len(frame)} rows, sha256 {file_digest[:12]})')
    return file_digest


def read_csv(path: Path) -> pd.DataFrame:
    """
    Reads a CSV written by write_csv, skipping the metadata lines.

    Args:
        path: the CSV file

    Returns:
        pd.DataFrame: the table without its '#' header
    """
    return pd.read_csv(path, comment='#')


def write_jsonl(reports: Iterable[CheckReport], path: Path, manifest_digest: str) -> str:
    """
    Writes check reports as JSON lines after a '# manifest: <digest>' line.

    Args:
        reports        : the reports, one line each in the given order
        path           : destination file (parent directories are created)
        manifest_digest: digest of the run manifest

    Returns:
        str: the SHA-256 digest of the written bytes
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f'# manifest: {manifest_digest}'] + [report.to_json_line() for report in reports]
    data = ('\n'.join(lines) + '\n').encode('utf-8')
    path.write_bytes(data)
    return digest(data)


def reports_frame(reports: Sequence[CheckReport]) -> pd.DataFrame:
    return pd.DataFrame({
        'name': [r.name for r in reports],
        'worst_violation': [r.worst_violation for r in reports],
        'slack': [r.slack for r in reports],
        'tolerance': [r.tolerance for r in reports],
        'pass': [r.passed for r in reports],
    })


@dataclass
class RunManifest:
    """Everything needed to reproduce one CLI run."""
    command: str
    config: dict
    seeds: List[int]
    tool_version: str = TOOL_VERSION
    outputs: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def digest(self) -> str:
        return digest({'command': self.command, 'config': self.config,
                       'seeds': self.seeds, 'tool': TOOL_NAME,
                       'tool_version': self.tool_version})

    def write(self, path: Path) -> None:
        payload = asdict(self)
        payload['digest'] = self.digest
        payload['python'] = platform.python_version()
        Path(path).write_text(json.dumps(_to_plain(payload), indent=2, sort_keys=True) + '\n')


_NUMBER = {'type': 'number'}
_POSITIVE = {'type': 'number', 'exclusiveMinimum': 0}

CONFIG_SCHEMA = {
    'type': 'object',
    'required': ['schema_version'],
    'properties': {
        'schema_version': {'const': SCHEMA_VERSION},
        'field': {
            'type': 'object',
            'required': ['kind'],
            'properties': {
                'kind': {'enum': ['alloy', 'gaussian', 'none']},
                'dimension': {'enum': [1, 2, 3]},
                'law': {'enum': ['uniform', 'laplace', 'fixed']},
                'c0': _POSITIVE,
                'tau': _POSITIVE,
                'alpha': _POSITIVE,
                'gmax': _POSITIVE,
                'value': _NUMBER,
                'support': {'type': 'array', 'items': _NUMBER, 'minItems': 2, 'maxItems': 2},
                'single_site': {
                    'oneOf': [
                        {'const': 'cube'},
                        {'type': 'object', 'required': ['spacing', 'values'],
                         'properties': {'spacing': _POSITIVE, 'values': {'type': 'array'}}},
                    ],
                },
                'height': _POSITIVE,
                'v1': _POSITIVE,
                'v2': _POSITIVE,
                'covariance_table': {
                    'type': 'object', 'required': ['r', 'c'],
                    'properties': {'r': {'type': 'array', 'items': _NUMBER},
                                   'c': {'type': 'array', 'items': _NUMBER}},
                },
            },
        },
        'grid': {
            'type': 'object',
            'required': ['dimension', 'cells', 'spacing'],
            'properties': {
                'dimension': {'enum': [1, 2, 3]},
                'cells': {'type': 'integer', 'minimum': 1},
                'spacing': _POSITIVE,
                'origin': {'oneOf': [_NUMBER, {'type': 'array', 'items': _NUMBER}]},
            },
        },
        'gauge': {
            'type': 'object',
            'properties': {'B': {'oneOf': [_NUMBER, {'type': 'array'}]}},
        },
        'boundary': {'type': 'array', 'items': {'enum': ['D', 'N']}, 'minItems': 1},
        'ensemble': {
            'type': 'object',
            'properties': {'realizations': {'type': 'integer', 'minimum': 1},
                           'base_seed': {'type': 'integer', 'minimum': 0}},
        },
        'ids': {
            'type': 'object',
            'properties': {
                'sizes': {'type': 'array', 'items': {'type': 'integer', 'minimum': 1}},
                'energies': {'type': 'array', 'items': _NUMBER, 'minItems': 3, 'maxItems': 3},
                'staircase': {'type': 'boolean'},
            },
        },
        'wegner': {
            'type': 'object',
            'properties': {
                'family': {'enum': ['alloy-uniform', 'alloy-laplace', 'gauss']},
                'energies': {'type': 'array', 'items': _NUMBER, 'minItems': 3, 'maxItems': 3},
                'beta': _POSITIVE,
                'ell': _POSITIVE,
                's': {'type': 'number', 'minimum': 0},
                'gamma': _POSITIVE,
            },
        },
    },
}


def validate_config(config: dict) -> dict:
    """
    Validates a run configuration against the versioned schema.

    Raises:
        ConfigError: if the document violates the schema
    """
    try:
        jsonschema.validate(instance=config, schema=CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        # Point at the offending key, e.g. grid/dimension
        location = '/'.join(str(part) for part in exc.absolute_path) or '<root>'
        raise ConfigError(f'Config invalid at {location}: {exc.message}') from exc
    return config


def load_config(path: Path) -> dict:
    """Reads a JSON run config and validates it; unreadable files are config errors."""
    try:
        config = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f'Cannot read config {path}: {exc}') from exc
    return validate_config(config)


def resolve_jobs(flag: Optional[int]) -> int:
    """
    Worker count: the --jobs flag wins, then the environment, then 1.
    """
    if flag is not None:
        jobs = flag
    else:
        try:
            jobs = int(os.environ.get(JOBS_ENV, '1'))
        except ValueError as exc:
            raise ConfigError(f'{JOBS_ENV} must be an integer') from exc
    if jobs < 1:
        raise ConfigError('The worker count must be at least 1.')
    return jobs


def parallel_map(func: Callable, items: Sequence, jobs: int = 1) -> list:
    """
    Maps func over items, returning results in item order.

    Results never depend on the worker count: each item carries everything
    it needs (its own seed) and the reduction happens in index order.
    """
    # Serial for a single worker or a single item
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    chunksize = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=chunksize))
