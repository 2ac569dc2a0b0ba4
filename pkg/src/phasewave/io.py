"""CSV serialization for fields and diagnostics.

One format family: a `# grid ...` header line carrying the lattice, then
one row per x with comma-separated columns.  Floats are written with 17
significant digits so a write/read round trip is exact and re-runs are
byte-identical.
"""
from __future__ import annotations

import os
from typing import Iterable, Sequence

import numpy as np

from .grid import Grid1D, KSpaceField, MomentFields, ParticleParams, PhaseSpaceField
from .errors import DataError, StructuralError


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _grid_header(grid: Grid1D) -> str:
    return (
        f"# grid x_min={_fmt(grid.x_min)} x_max={_fmt(grid.x_max)} "
        f"n_x={grid.n_x} p_max={_fmt(grid.p_max)} n_p={grid.n_p}"
    )


def _parse_grid_header(line: str) -> Grid1D:
    if not line.startswith("# grid "):
        raise DataError(f"expected a '# grid' header, got {line[:40]!r}")
    kv = {}
    for tok in line[len("# grid "):].split():
        key, _, val = tok.partition("=")
        kv[key] = val
    try:
        return Grid1D(
            x_min=float(kv["x_min"]),
            x_max=float(kv["x_max"]),
            n_x=int(kv["n_x"]),
            p_max=float(kv["p_max"]),
            n_p=int(kv["n_p"]),
        )
    except KeyError as exc:
        raise DataError(f"grid header missing key {exc}") from exc


def _write_lines(path: str, lines: Iterable[str]) -> None:
    with open(path, "w", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def _read_lines(path: str) -> list[str]:
    with open(path, "r") as fh:
        return [ln.rstrip("\n") for ln in fh]


def write_field_csv(field: PhaseSpaceField, path: str) -> None:
    lines = [_grid_header(field.grid)]
    for row in field.values:
        lines.append(",".join(_fmt(v) for v in row))
    _write_lines(path, lines)


def read_field_csv(path: str) -> PhaseSpaceField:
    lines = _read_lines(path)
    grid = _parse_grid_header(lines[0])
    rows = [ln for ln in lines[1:] if ln and not ln.startswith("#")]
    if len(rows) != grid.n_x:
        raise DataError(f"{path}: expected {grid.n_x} rows, found {len(rows)}")
    values = np.array([[float(tok) for tok in ln.split(",")] for ln in rows])
    return PhaseSpaceField(grid, values)


def write_moments_csv(mf: MomentFields, path: str) -> None:
    lines = [_grid_header(mf.grid), "# columns n,j,eps,chi"]
    for i in range(mf.grid.n_x):
        lines.append(",".join(_fmt(v) for v in (mf.n[i], mf.j[i], mf.eps[i], mf.chi[i])))
    _write_lines(path, lines)


def read_moments_csv(path: str) -> MomentFields:
    lines = _read_lines(path)
    grid = _parse_grid_header(lines[0])
    rows = [ln for ln in lines[1:] if ln and not ln.startswith("#")]
    if len(rows) != grid.n_x:
        raise DataError(f"{path}: expected {grid.n_x} rows, found {len(rows)}")
    cols = np.array([[float(tok) for tok in ln.split(",")] for ln in rows])
    if cols.shape[1] != 4:
        raise StructuralError(f"{path}: moment rows need 4 columns, found {cols.shape[1]}")
    return MomentFields(grid, cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3])


def write_wavefunction_csv(grid: Grid1D, psi: np.ndarray, params: ParticleParams, path: str) -> None:
    """Columns: x, Re psi, Im psi. Grid and params ride in header comments."""
    if np.asarray(psi).shape != (grid.n_x,):
        raise StructuralError("wave function length must match grid.n_x")
    lines = [
        _grid_header(grid),
        f"# params m={_fmt(params.m)} sigma={_fmt(params.sigma)}",
        "# columns x,re_psi,im_psi",
    ]
    for xi, v in zip(grid.x, psi):
        lines.append(f"{_fmt(xi)},{_fmt(v.real)},{_fmt(v.imag)}")
    _write_lines(path, lines)


def read_wavefunction_csv(path: str):
    lines = _read_lines(path)
    grid = _parse_grid_header(lines[0])
    params = ParticleParams()
    for ln in lines[1:3]:
        if ln.startswith("# params "):
            kv = dict(tok.partition("=")[::2] for tok in ln[len("# params "):].split())
            params = ParticleParams(m=float(kv["m"]), sigma=float(kv["sigma"]))
    rows = [ln for ln in lines[1:] if ln and not ln.startswith("#")]
    cols = np.array([[float(tok) for tok in ln.split(",")] for ln in rows])
    psi = cols[:, 1] + 1j * cols[:, 2]
    return grid, psi, params


def write_action_csv(grid: Grid1D, n: np.ndarray, S: np.ndarray, path: str) -> None:
    lines = [_grid_header(grid), "# columns n,S"]
    for i in range(grid.n_x):
        lines.append(f"{_fmt(n[i])},{_fmt(S[i])}")
    _write_lines(path, lines)


def write_columns_csv(path: str, names: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    """Plain named-column CSV for diagnostics (times, defects, stats...)."""
    cols = [np.asarray(c) for c in columns]
    if len(names) != len(cols):
        raise StructuralError("one name per column required")
    n_rows = len(cols[0])
    for c in cols:
        if len(c) != n_rows:
            raise StructuralError("diagnostic columns must share a length")
    lines = [",".join(names)]
    for i in range(n_rows):
        lines.append(",".join(_fmt(c[i]) for c in cols))
    _write_lines(path, lines)


def write_checks_csv(path: str, rows: Sequence[tuple]) -> None:
    """Rows of (check, value, tolerance, passed)."""
    lines = ["check,value,tolerance,pass"]
    for name, value, tol, ok in rows:
        lines.append(f"{name},{_fmt(value)},{_fmt(tol)},{'true' if ok else 'false'}")
    _write_lines(path, lines)


def write_history(
    snapshots: Sequence[PhaseSpaceField | MomentFields],
    times: Sequence[float],
    out_dir: str,
    stem: str,
) -> list[str]:
    """One CSV per snapshot plus an index CSV of (t, filename).

    Returns the relative names of every file written, index included.
    """
    if len(snapshots) != len(times):
        raise StructuralError("one time per snapshot required")
    written = []
    names = []
    for i, (snap, _t) in enumerate(zip(snapshots, times)):
        name = f"{stem}_{i:04d}.csv"
        full = os.path.join(out_dir, name)
        if isinstance(snap, PhaseSpaceField):
            write_field_csv(snap, full)
        else:
            write_moments_csv(snap, full)
        names.append(name)
        written.append(name)
    index = f"{stem}_index.csv"
    lines = ["t,filename"]
    for t, name in zip(times, names):
        lines.append(f"{_fmt(t)},{name}")
    _write_lines(os.path.join(out_dir, index), lines)
    written.append(index)
    return written
