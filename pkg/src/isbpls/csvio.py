"""CSV readers and writers for streams, selections and aggregate curves.

All files carry a header, use '.' decimals and list rows in time order.
Time steps, components and variable indices are 1-based on disk.
"""
from __future__ import annotations

import csv

import numpy as np

from .errors import ParseError


def fmt(v) -> str:
    return repr(float(v))


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_stream(path, X, Y, t=None) -> None:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float).reshape(X.shape[0], -1)
    t = np.arange(1, X.shape[0] + 1) if t is None else t
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["t", *(f"x{i + 1}" for i in range(X.shape[1])), *(f"y{j + 1}" for j in range(Y.shape[1]))])
        for ti, x, y in zip(t, X, Y):
            w.writerow([int(ti), *map(fmt, x), *map(fmt, y)])


def read_stream(path):
    """Return ``(t, X, Y)`` from a ``t,x1..xp,y1..yq`` file."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty stream file")
    header = rows[0]
    if not header or header[0] != "t":
        raise ParseError("stream header must start with 't'", row=1, column=1)
    xcols = [j for j, h in enumerate(header) if h.startswith("x")]
    ycols = [j for j, h in enumerate(header) if h.startswith("y")]
    if not xcols or not ycols or len(xcols) + len(ycols) + 1 != len(header):
        raise ParseError("stream header must be t,x1..xp,y1..yq", row=1)
    data = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=i)
        try:
            data.append([float(c) for c in row])
        except ValueError as exc:
            raise ParseError(str(exc), row=i) from None
    if not data:
        raise ParseError(f"{path}: no data rows")
    A = np.array(data)
    return A[:, 0].astype(int), A[:, xcols], A[:, ycols]


def write_truth(path, sim) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["t", "group_role", "indices"])
        for t in range(sim.X.shape[0]):
            large, small = sim.truth(t)
            w.writerow([t + 1, "large", " ".join(str(i + 1) for i in large)])
            w.writerow([t + 1, "small", " ".join(str(i + 1) for i in small)])


class SelectionWriter:
    """Incremental writer for the long-format ``t,component,variable_index,weight`` file."""

    def __init__(self, fh):
        self._w = _writer(fh)
        self._w.writerow(["t", "component", "variable_index", "weight"])

    def write(self, t: int, U: np.ndarray) -> None:
        for r in range(U.shape[1]):
            for i in np.flatnonzero(U[:, r]):
                self._w.writerow([t, r + 1, int(i) + 1, fmt(U[i, r])])


def read_selection(path) -> dict:
    """Map ``(t, component)`` to the sorted 0-based indices selected."""
    out: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            key = (int(row["t"]), int(row["component"]))
            out.setdefault(key, []).append(int(row["variable_index"]) - 1)
    return {k: sorted(v) for k, v in out.items()}


def write_aggregate(path, curve) -> None:
    T, R = curve.mean.shape
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["t", "component", "mean", "std"])
        for t in range(T):
            for r in range(R):
                w.writerow([t + 1, r + 1, fmt(curve.mean[t, r]), fmt(curve.std[t, r])])


def read_aggregate(path):
    """Return ``(mean, std)`` arrays of shape (T, R)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    T = max(int(r["t"]) for r in rows)
    R = max(int(r["component"]) for r in rows)
    mean, std = np.full((T, R), np.nan), np.full((T, R), np.nan)
    for r in rows:
        t, c = int(r["t"]) - 1, int(r["component"]) - 1
        mean[t, c], std[t, c] = float(r["mean"]), float(r["std"])
    return mean, std
