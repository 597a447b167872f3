from __future__ import annotations

import csv
import hashlib

from collections.abc import Iterable, Sequence
from typing import Any

import msgpack  # type: ignore
import numpy as np


def _canonical(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _canonical(value[k]) for k in sorted(value, key=str)}
    if isinstance(value, (list, tuple)):
        return [_canonical(x) for x in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def config_hash(config: dict[str, Any]) -> str:
    """sha256 of the msgpack packing of the key-sorted configuration."""
    packed = msgpack.packb(_canonical(config), use_bin_type=True)
    return hashlib.sha256(packed).hexdigest()


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 20), b''):
            digest.update(chunk)
    return digest.hexdigest()


def parse_float_list(line: str) -> list[float]:
    values = [x.strip() for x in line.split(',') if x.strip()]
    if not values:
        raise ValueError('Empty list of numbers.')
    return [float(x) for x in values]


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(x) for x in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value
