"""Minimal reader for the legacy ASCII VTK snapshots of the solver.

Whitespace-tokenizing parser for exactly the UNSTRUCTURED_GRID layout the
solver writes: POINTS, CELLS, CELL_TYPES, then POINT_DATA with a `phi`
scalar and `u_bar`/`u_hat` vectors.  Parse errors report the byte offset of
the offending token.
"""

import numpy as np


class VtkFormatError(ValueError):
    pass


class _Tokens:
    def __init__(self, text, path):
        self.path = path
        self.tokens = []
        self.offsets = []
        offset = 0
        for line in text.splitlines(keepends=True):
            column = 0
            for token in line.split():
                column = line.index(token, column)
                self.tokens.append(token)
                self.offsets.append(offset + column)
                column += len(token)
            offset += len(line)
        self.pos = 0

    def error(self, message):
        offset = (self.offsets[self.pos] if self.pos < len(self.offsets)
                  else self.offsets[-1] if self.offsets else 0)
        raise VtkFormatError(f"{self.path}: byte {offset}: {message}")

    def next(self):
        if self.pos >= len(self.tokens):
            self.error("unexpected end of file")
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, word):
        token = self.next()
        if token.lower() != word.lower():
            self.pos -= 1
            self.error(f"expected {word!r}, found {token!r}")
        return token

    def seek(self, word):
        while self.pos < len(self.tokens):
            if self.tokens[self.pos].lower() == word.lower():
                return
            self.pos += 1
        self.error(f"section {word!r} not found")

    def integer(self, what):
        token = self.next()
        try:
            return int(token)
        except ValueError:
            self.pos -= 1
            self.error(f"expected integer {what}, found {token!r}")

    def floats(self, count, what):
        if self.pos + count > len(self.tokens):
            self.error(f"truncated {what}")
        chunk = self.tokens[self.pos:self.pos + count]
        try:
            values = np.array(chunk, dtype=float)
        except ValueError:
            for k, token in enumerate(chunk):
                try:
                    float(token)
                except ValueError:
                    self.pos += k
                    self.error(f"bad number in {what}: {token!r}")
        self.pos += count
        return values


def read_snapshot(path):
    """Points, cells, and the phi/u_bar/u_hat point data of a snapshot."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    tk = _Tokens(text, str(path))

    tk.seek("DATASET")
    tk.expect("DATASET")
    grid = tk.next()
    if grid.upper() != "UNSTRUCTURED_GRID":
        tk.pos -= 1
        tk.error(f"unsupported dataset {grid!r}")

    tk.seek("POINTS")
    tk.expect("POINTS")
    n = tk.integer("point count")
    tk.next()  # dtype
    points = tk.floats(3 * n, "points").reshape(n, 3)

    tk.expect("CELLS")
    m = tk.integer("cell count")
    total = tk.integer("cell list size")
    k = total // m - 1 if m else 0
    raw = tk.floats(total, "cells").astype(np.int64).reshape(m, k + 1)
    if m and not np.all(raw[:, 0] == k):
        tk.error("inhomogeneous cell sizes")
    cells = raw[:, 1:]

    tk.expect("CELL_TYPES")
    count = tk.integer("cell type count")
    tk.floats(count, "cell types")

    tk.expect("POINT_DATA")
    if tk.integer("point data count") != n:
        tk.pos -= 1
        tk.error("POINT_DATA count differs from POINTS")
    tk.expect("SCALARS")
    name = tk.next()
    if name != "phi":
        tk.pos -= 1
        tk.error(f"expected scalar field 'phi', found {name!r}")
    tk.next()  # dtype
    tk.next()  # components
    tk.expect("LOOKUP_TABLE")
    tk.next()
    phi = tk.floats(n, "phi values")

    vectors = {}
    for _ in range(2):
        tk.expect("VECTORS")
        vec_name = tk.next()
        tk.next()  # dtype
        vectors[vec_name] = tk.floats(3 * n, f"{vec_name} values").reshape(n, 3)
    missing = {"u_bar", "u_hat"} - set(vectors)
    if missing:
        tk.error(f"missing vector fields {sorted(missing)}")
    return {"points": points, "cells": cells, "phi": phi,
            "u_bar": vectors["u_bar"], "u_hat": vectors["u_hat"]}
