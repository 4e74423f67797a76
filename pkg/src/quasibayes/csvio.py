"""Headerless matrix CSV and ``row,col,value`` observation CSV."""

import csv

import numpy as np

from .datagen import ObservationMode, ObservationSet


class CSVFormatError(ValueError):
    pass


def write_matrix_csv(path, A):
    # %.17g round-trips every float64 exactly
    np.savetxt(path, np.atleast_2d(np.asarray(A, dtype=float)), delimiter=",", fmt="%.17g")


def read_matrix_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(csv.reader(fh), start=1):
            if not line or all(not c.strip() for c in line):
                continue
            try:
                rows.append([float(c) for c in line])
            except ValueError:
                raise CSVFormatError(f"{path}:{lineno}: cannot parse {','.join(line)!r} as numbers")
            if len(rows[-1]) != len(rows[0]):
                raise CSVFormatError(f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(rows[-1])}")
    if not rows:
        raise CSVFormatError(f"{path}: no data")
    A = np.array(rows)
    if not np.all(np.isfinite(A)):
        raise CSVFormatError(f"{path}: non-finite entries")
    return A


def write_observations_csv(path, obs):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "value"])
        for i, j, v in zip(obs.rows, obs.cols, obs.values):
            w.writerow([int(i), int(j), repr(float(v))])


def read_observations_csv(path, shape):
    """Read an observation CSV for an ``(n, q)`` response.

    The mode is inferred: repeated cells mean sampling with replacement, a
    complete set of distinct cells is the full response.
    """
    rows, cols, vals = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, line in enumerate(reader, start=1):
            if not line:
                continue
            if lineno == 1 and [c.strip() for c in line] == ["row", "col", "value"]:
                continue
            if len(line) != 3:
                raise CSVFormatError(f"{path}:{lineno}: expected 3 fields row,col,value")
            try:
                i, j, v = int(line[0]), int(line[1]), float(line[2])
            except ValueError:
                raise CSVFormatError(f"{path}:{lineno}: cannot parse {','.join(line)!r}")
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise CSVFormatError(f"{path}:{lineno}: index ({i}, {j}) outside response shape {tuple(shape)}")
            rows.append(i)
            cols.append(j)
            vals.append(v)
    if not rows:
        raise CSVFormatError(f"{path}: no observations")
    flat = np.asarray(rows) * shape[1] + np.asarray(cols)
    if np.unique(flat).size < flat.size:
        mode = ObservationMode.IID
    elif flat.size == shape[0] * shape[1]:
        mode = ObservationMode.FULL
    else:
        mode = ObservationMode.MASKED
    return ObservationSet(rows, cols, vals, mode, tuple(shape))
