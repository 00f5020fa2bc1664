"""Mesh and table output: OBJ through a 3D chart, CSV with the full 4D data."""

import csv
import io
import warnings

import numpy as np

from .errors import UnsupportedChart

CHARTS = ("none", "poincare", "stereographic")
CSV_COLUMNS = ("u", "v", "x1", "x2", "x3", "x4", "k1", "k2", "umbilic")


class ChartWarning(UserWarning):
    """The chosen chart is a plain coordinate drop, not an isometry or conformal map."""


def default_chart(space):
    if space.name == "H3":
        return "poincare"
    if space.name == "S3":
        return "stereographic"
    return "none"


def chart_points(space, X, chart=None):
    """Map (4, ...) quadric points to (3, ...) chart coordinates."""
    chart = chart or default_chart(space)
    X = np.asarray(X, dtype=float)
    if chart not in CHARTS:
        raise UnsupportedChart(f"unknown chart {chart!r}; pick one of {CHARTS}")
    if chart == "poincare":
        if space.name != "H3":
            raise UnsupportedChart(f"the Poincare ball chart needs H3, not {space.name}")
        return X[1:4] / (1 + X[0])
    if chart == "stereographic":
        if space.name != "S3":
            raise UnsupportedChart(f"stereographic projection needs S3, not {space.name}")
        return X[0:3] / (1 - X[3])
    if space.eps != 0:
        warnings.warn(f"chart 'none' keeps the first three coordinates; on {space.name} this is not isometric", ChartWarning, stacklevel=2)
    return X[0:3]


def grid_faces(nu, nv, v_periodic):
    """Quad faces of an ij-ordered nu x nv grid (0-based), closing the band in v when periodic."""
    idx = np.arange(nu * nv).reshape(nu, nv)
    cols = nv if v_periodic else nv - 1
    faces = []
    for i in range(nu - 1):
        for j in range(cols):
            jn = (j + 1) % nv
            faces.append((idx[i, j], idx[i + 1, j], idx[i + 1, jn], idx[i, jn]))
    return np.asarray(faces, dtype=int).reshape(-1, 4)


def mesh_from_analysis(sp, grid, data):
    """Vertices, faces and per-vertex scalars for a periodic-aware grid.

    A periodic grid in v samples [v0, v0 + 2 pi) so the band closes with no
    duplicated seam.
    """
    X = np.asarray(data["jet"].phi, dtype=float).reshape(4, -1)
    faces = grid_faces(grid.nu, grid.nv, grid.v_periodic)
    return {
        "X": X,
        "faces": faces,
        "u": np.asarray(data["u"], dtype=float).ravel(),
        "v": np.asarray(data["v"], dtype=float).ravel(),
        "k1": np.asarray(data["k1"], dtype=float).ravel(),
        "k2": np.asarray(data["k2"], dtype=float).ravel(),
        "umbilic": np.asarray(data["umbilic"], dtype=bool).ravel(),
    }


def write_obj(mesh, space, chart=None):
    """OBJ text: one ``v`` line per grid node in the chart, one ``f`` line per quad."""
    P = chart_points(space, mesh["X"], chart)
    out = io.StringIO()
    out.write(f"# {space.name} surface, chart {chart or default_chart(space)}\n")
    for x, y, z in P.T:
        out.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
    for quad in mesh["faces"] + 1:
        out.write("f " + " ".join(str(i) for i in quad) + "\n")
    return out.getvalue()


def read_obj(text):
    """(vertices (n, 3), faces (m, k) 1-based) from OBJ text with v and f lines."""
    verts, faces = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(x.split("/")[0]) for x in parts[1:]])
    return np.asarray(verts), np.asarray(faces, dtype=int)


def _fmt(x):
    return f"{float(x):.17g}" if np.isfinite(x) else ("nan" if np.isnan(x) else ("inf" if x > 0 else "-inf"))


def write_csv(mesh):
    """CSV text with a header row; floats are written to round-trip exactly."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    X = mesh["X"]
    for n in range(X.shape[1]):
        w.writerow(
            [_fmt(mesh["u"][n]), _fmt(mesh["v"][n])]
            + [_fmt(x) for x in X[:, n]]
            + [_fmt(mesh["k1"][n]), _fmt(mesh["k2"][n]), int(mesh["umbilic"][n])]
        )
    return out.getvalue()


def read_csv(text):
    """Inverse of :func:`write_csv`: a dict of column arrays, with X as (4, n)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"expected header {','.join(CSV_COLUMNS)}")
    body = np.asarray([[float(x) for x in row] for row in rows[1:]], dtype=float).reshape(-1, len(CSV_COLUMNS))
    return {
        "u": body[:, 0],
        "v": body[:, 1],
        "X": body[:, 2:6].T.copy(),
        "k1": body[:, 6],
        "k2": body[:, 7],
        "umbilic": body[:, 8].astype(bool),
    }


def curvature_residual(mesh, declared_r):
    """max |k2 - 1/r| over the finite entries of a mesh or CSV table."""
    k2 = np.asarray(mesh["k2"], dtype=float)
    k2 = k2[np.isfinite(k2)]
    return float(np.max(np.abs(k2 - 1.0 / declared_r))) if k2.size else float("inf")


def write_curve_csv(u, curve, home):
    """Reconstructed generating-curve samples, with the home space in a comment line."""
    out = io.StringIO()
    out.write(f"# home: {home}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("u", "x1", "x2", "x3", "x4"))
    for t, x in zip(u, np.asarray(curve, dtype=float)):
        w.writerow([_fmt(t)] + [_fmt(c) for c in x])
    return out.getvalue()
