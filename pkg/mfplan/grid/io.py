from __future__ import annotations

import os
import json

from typing import Any, Literal, Optional, Union

import numpy as np

from mfplan.grid.grid import GridSpec, Momentum
from mfplan.grid.exceptions import FieldFormatError, GridSpecError
from mfplan.utils import write_csv


FieldKind = Literal['density', 'momentum', 'scalar']
KINDS = ('density', 'momentum', 'scalar')
DTYPE = '<f8'


class FieldHeader:
    __slots__ = (
        'kind',
        'd',
        'nt',
        'nx',
        'R',
    )

    def __init__(self, kind: str, d: int, nt: int, nx: int, R: float) -> None:
        self.kind = kind
        self.d = d
        self.nt = nt
        self.nx = nx
        self.R = R

    def __repr__(self) -> str:
        return f'FieldHeader({self.to_dict()})'

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FieldHeader:
        return cls(str(data['kind']), int(data['d']), int(data['nt']), int(data['nx']), float(data['R']))

    def to_dict(self) -> dict[str, Any]:
        return {'kind': self.kind, 'd': self.d, 'nt': self.nt, 'nx': self.nx, 'R': self.R}

    @property
    def is_slice(self) -> bool:
        return self.nt == 0

    def grid(self, nt: Optional[int] = None) -> GridSpec:
        return GridSpec(self.d, nt if nt is not None else self.nt, self.nx, self.R)

    def shapes(self) -> list[tuple[int, ...]]:
        cells = (self.nx,) * self.d
        if self.kind == 'momentum':
            out = []
            for i in range(self.d):
                shape = [self.nt, *cells]
                shape[1 + i] += 1
                out.append(tuple(shape))
            return out
        if self.is_slice:
            return [cells]
        if self.kind == 'density':
            return [(self.nt + 1, *cells)]
        return [(self.nt, *cells)]


def sidecar_path(path: str) -> str:
    return path + '.json'


def _header_for(grid: GridSpec, kind: FieldKind, data: Union[np.ndarray, Momentum]) -> FieldHeader:
    if kind not in KINDS:
        raise ValueError(f'Unknown field kind: {kind}.')
    if kind == 'momentum':
        grid.check_momentum(data)  # type: ignore
        return FieldHeader(kind, grid.d, grid.nt, grid.nx, grid.R)
    array = np.asarray(data)
    if array.shape == grid.cells:
        return FieldHeader(kind, grid.d, 0, grid.nx, grid.R)
    if kind == 'density':
        grid.check_density(array)
    else:
        grid.check_scalar(array)
    return FieldHeader(kind, grid.d, grid.nt, grid.nx, grid.R)


def write_field(path: str, grid: GridSpec, data: Union[np.ndarray, Momentum], kind: FieldKind) -> FieldHeader:
    """Write a little-endian float64 row-major payload and its JSON sidecar.

    A spatial slice (endpoint density, coefficient map) is stored with nt = 0.
    """
    header = _header_for(grid, kind, data)
    parts = data if kind == 'momentum' else (data,)

    with open(path, 'wb') as f:
        for part in parts:
            f.write(np.ascontiguousarray(part, dtype=DTYPE).tobytes(order='C'))
        f.flush()
        os.fsync(f.fileno())

    with open(sidecar_path(path), 'w', encoding='utf-8') as f:
        json.dump(header.to_dict(), f, indent=4, sort_keys=True)
        f.flush()
        os.fsync(f.fileno())

    return header


def read_header(path: str) -> FieldHeader:
    try:
        with open(sidecar_path(path), encoding='utf-8') as f:
            header = FieldHeader.from_dict(json.load(f))
    except FileNotFoundError:
        raise FieldFormatError(path, 'the JSON sidecar is missing.')
    except (KeyError, TypeError, ValueError) as error:
        raise FieldFormatError(path, f'bad header ({error}).')

    if header.kind not in KINDS:
        raise FieldFormatError(path, f'unknown kind "{header.kind}".')
    if header.kind == 'momentum' and header.is_slice:
        raise FieldFormatError(path, 'momentum fields need time cells.')
    try:
        header.grid(nt=header.nt or 2)
    except GridSpecError as error:
        raise FieldFormatError(path, error.reason)
    return header


def read_field(path: str) -> tuple[FieldHeader, Union[np.ndarray, Momentum]]:
    header = read_header(path)
    shapes = header.shapes()
    expected = sum(int(np.prod(s)) for s in shapes)

    try:
        payload = np.fromfile(path, dtype=DTYPE)
    except OSError as error:
        raise FieldFormatError(path, str(error))

    if payload.size != expected:
        raise FieldFormatError(path, f'payload holds {payload.size} values, header implies {expected}.')

    payload = payload.astype(float)
    parts = []
    offset = 0
    for shape in shapes:
        size = int(np.prod(shape))
        parts.append(payload[offset : offset + size].reshape(shape))
        offset += size

    if header.kind == 'momentum':
        return header, tuple(parts)
    return header, parts[0]


def export_csv(path: str, grid: GridSpec, data: np.ndarray) -> None:
    if grid.d != 1:
        raise GridSpecError('CSV export is available for d = 1 only.')
    data = np.asarray(data, dtype=float)
    x = grid.centers

    if data.shape == grid.cells:
        write_csv(path, ('x', 'value'), zip(x.tolist(), data.tolist()))
        return

    if data.shape == grid.density_shape:
        times = grid.time_nodes
    elif data.shape == grid.scalar_shape:
        times = grid.time_centers
    else:
        raise GridSpecError(f'cannot export a field of shape {data.shape}.')

    rows = ((float(t), float(xi), float(data[k, j])) for k, t in enumerate(times) for j, xi in enumerate(x))
    write_csv(path, ('t', 'x', 'value'), rows)
