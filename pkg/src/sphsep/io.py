"""
Reading and writing grid fields, scattered datasets and separation results.

Grid fields are stored as CSV with header ``theta_deg,phi_deg,v1[,v2,v3]``
in row-major order with latitude outer, plus a JSON sidecar of the same
stem holding the radius, the declared quadrature degree and the grid size.
The ``json`` format stores everything in one file. Every writer is
deterministic: the same data produce the same bytes.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InputFormatError
from .ingest import ScatteredDataset
from .quadrature import GridField, build_grid

__all__ = [
    "FORMATS",
    "SCATTERED_COLUMNS",
    "write_field",
    "read_field",
    "read_scattered",
    "write_scattered",
    "is_scattered",
    "write_json",
    "field_path",
]

FORMATS = ("csv", "json")
SCATTERED_COLUMNS = ("colat_deg", "lon_deg", "radius_km", "b1", "b2", "b3")
_FLOAT_FMT = "%.17g"


def write_json(path, obj):
    """Write ``obj`` as sorted, indented JSON with a trailing newline."""
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def field_path(directory, stem, fmt="csv"):
    return Path(directory) / f"{stem}.{fmt}"


def _metadata(field):
    g = field.grid
    return {"radius": g.radius, "degree": g.degree, "n_lat": g.n_lat, "n_lon": g.n_lon}


def _columns(field):
    return ["v1"] if field.kind == "scalar" else ["v1", "v2", "v3"]


def write_field(path, field, fmt=None):
    """Write a :class:`GridField`; the format defaults to the file suffix."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".") or "csv"
    if fmt not in FORMATS:
        raise InputFormatError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    th, ph = field.grid.theta_phi
    theta, phi = np.degrees(th), np.degrees(ph)
    vals = field.values.reshape(field.grid.size, -1)
    if fmt == "json":
        obj = dict(_metadata(field), columns=_columns(field))
        obj["theta_deg"] = theta.tolist()
        obj["phi_deg"] = phi.tolist()
        obj["values"] = vals.tolist()
        write_json(path, obj)
        return path
    header = ",".join(["theta_deg", "phi_deg"] + _columns(field))
    np.savetxt(path, np.column_stack([theta, phi, vals]), fmt=_FLOAT_FMT, delimiter=",",
               header=header, comments="")
    write_json(path.with_suffix(".json"), _metadata(field))
    return path


def _grid_from(meta, theta, phi, path):
    n_lat = meta.get("n_lat") or np.unique(np.round(theta, 9)).size
    n_lon = meta.get("n_lon") or theta.size // max(n_lat, 1)
    try:
        grid = build_grid(n_lat, n_lon, meta.get("radius", 1.0))
    except ValueError as exc:
        raise InputFormatError(f"{path}: {exc}") from None
    if grid.size != theta.size:
        raise InputFormatError(f"{path}: {theta.size} rows do not fill a {n_lat}x{n_lon} grid")
    th, ph = grid.theta_phi
    if not (np.allclose(np.degrees(th), theta, atol=1e-9) and np.allclose(np.degrees(ph), phi, atol=1e-9)):
        raise InputFormatError(f"{path}: node coordinates do not match a {n_lat}x{n_lon} equiangular grid")
    return grid


def read_field(path):
    """Read a grid field written by :func:`write_field`.

    Without a sidecar the grid size is inferred from the coordinates and
    the radius defaults to 1.
    """
    path = Path(path)
    try:
        if path.suffix == ".json":
            obj = json.loads(path.read_text())
            theta = np.asarray(obj["theta_deg"], float)
            phi = np.asarray(obj["phi_deg"], float)
            vals = np.asarray(obj["values"], float)
            meta = obj
        else:
            with open(path, newline="") as fh:
                header = next(csv.reader(fh))
            if header[:3] != ["theta_deg", "phi_deg", "v1"] or len(header) not in (3, 5):
                raise InputFormatError(f"{path}: unexpected header {header}")
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
            theta, phi, vals = data[:, 0], data[:, 1], data[:, 2:]
            side = path.with_suffix(".json")
            meta = json.loads(side.read_text()) if side.exists() else {}
    except (KeyError, ValueError, StopIteration) as exc:
        raise InputFormatError(f"{path}: cannot parse grid field ({exc})") from None
    if vals.ndim == 2 and vals.shape[1] == 1:
        vals = vals[:, 0]
    grid = _grid_from(meta, theta, phi, path)
    try:
        return GridField(grid, vals)
    except ValueError as exc:
        raise InputFormatError(f"{path}: {exc}") from None


def _header(path):
    with open(path, newline="") as fh:
        try:
            return [h.strip() for h in next(csv.reader(fh))]
        except StopIteration:
            raise InputFormatError(f"{path}: empty file") from None


def is_scattered(path):
    """True if ``path`` is a CSV with the scattered-dataset header."""
    path = Path(path)
    return path.suffix != ".json" and tuple(_header(path)) == SCATTERED_COLUMNS


def read_scattered(path):
    """Read a CSV with columns ``colat_deg,lon_deg,radius_km,b1,b2,b3``."""
    header = _header(path)
    if tuple(header) != SCATTERED_COLUMNS:
        raise InputFormatError(f"{path}: expected header {','.join(SCATTERED_COLUMNS)}, got {header}")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise InputFormatError(f"{path}: cannot parse records ({exc})") from None
    if data.shape[0] == 0 or data.shape[1] != 6:
        raise InputFormatError(f"{path}: expected at least one record with 6 columns")
    try:
        return ScatteredDataset(data[:, 0], data[:, 1], data[:, 2], data[:, 3:6])
    except ValueError as exc:
        raise InputFormatError(f"{path}: {exc}") from None


def write_scattered(path, data):
    np.savetxt(
        path,
        np.column_stack([data.colat_deg, data.lon_deg, data.radius_km, data.values]),
        fmt=_FLOAT_FMT,
        delimiter=",",
        header=",".join(SCATTERED_COLUMNS),
        comments="",
    )
    return Path(path)
