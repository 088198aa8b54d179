"""Matrix Market coordinate I/O and vector file I/O.

Matrices: coordinate format, real field, general or symmetric symmetry
(symmetric files are expanded to full storage on read).  Vectors: either
plain text with one value per line or Matrix Market array format; the
reader auto-detects.  Values are written with 17 significant digits so a
write/read round trip is bit exact.
"""

import numpy as np

from .sparse import SparseMatrix


def read_matrix_market(path):
    """Read a real coordinate Matrix Market file into a SparseMatrix."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        parts = header.strip().split()
        if len(parts) != 5 or parts[0] != "%%MatrixMarket":
            raise ValueError(f"malformed Matrix Market header: {header.strip()!r}")
        _, obj, fmt, field, symmetry = (p.lower() for p in parts)
        if obj != "matrix" or fmt != "coordinate":
            raise ValueError(f"unsupported Matrix Market type: {obj} {fmt}")
        if field != "real":
            raise ValueError(f"non-real field: {field}")
        if symmetry not in ("general", "symmetric"):
            raise ValueError(f"unsupported symmetry: {symmetry}")

        size_line = _next_data_line(fh)
        if size_line is None:
            raise ValueError("missing size line")
        try:
            nrows, ncols, nnz = (int(tok) for tok in size_line.split())
        except ValueError as exc:
            raise ValueError(f"malformed size line: {size_line!r}") from exc

        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        for k in range(nnz):
            line = _next_data_line(fh)
            if line is None:
                raise ValueError(f"unexpected end of file after {k} of {nnz} entries")
            toks = line.split()
            if len(toks) != 3:
                raise ValueError(f"malformed entry line: {line!r}")
            i, j = int(toks[0]) - 1, int(toks[1]) - 1
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise ValueError(f"index out of range in entry: {line!r}")
            rows[k], cols[k], vals[k] = i, j, float(toks[2])

    if symmetry == "symmetric":
        off = rows != cols
        mirrored_rows = np.concatenate([rows, cols[off]])
        mirrored_cols = np.concatenate([cols, rows[off]])
        vals = np.concatenate([vals, vals[off]])
        rows, cols = mirrored_rows, mirrored_cols
    return SparseMatrix.from_coo(nrows, ncols, rows, cols, vals)


def write_matrix_market(a, path):
    """Write a SparseMatrix in general coordinate format, full precision."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{a.nrows} {a.ncols} {a.nnz}\n")
        for i in range(a.nrows):
            lo, hi = a.row_offsets[i], a.row_offsets[i + 1]
            for p in range(lo, hi):
                fh.write(f"{i + 1} {a.col_indices[p] + 1} {a.values[p]:.17g}\n")


def read_vector(path):
    """Read a vector from plain text or Matrix Market array format."""
    with open(path, "r", encoding="ascii") as fh:
        first = fh.readline()
        if first.startswith("%%MatrixMarket"):
            parts = first.strip().split()
            if len(parts) != 5 or parts[1].lower() != "matrix" or parts[2].lower() != "array":
                raise ValueError(f"malformed array header: {first.strip()!r}")
            if parts[3].lower() != "real":
                raise ValueError(f"non-real field: {parts[3]}")
            size_line = _next_data_line(fh)
            nrows, ncols = (int(tok) for tok in size_line.split())
            if ncols != 1:
                raise ValueError("vector files must have a single column")
            vals = []
            while len(vals) < nrows:
                line = _next_data_line(fh)
                if line is None:
                    raise ValueError("unexpected end of vector file")
                vals.append(float(line))
            return np.array(vals)
        vals = []
        for line in [first] + fh.readlines():
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            vals.append(float(stripped))
        return np.array(vals)


def write_vector(x, path, fmt="plain"):
    """Write a vector as plain text (default) or Matrix Market array."""
    x = np.asarray(x, dtype=np.float64)
    with open(path, "w", encoding="ascii") as fh:
        if fmt == "array":
            fh.write("%%MatrixMarket matrix array real general\n")
            fh.write(f"{x.shape[0]} 1\n")
        elif fmt != "plain":
            raise ValueError(f"unknown vector format: {fmt}")
        for v in x:
            fh.write(f"{v:.17g}\n")


def _next_data_line(fh):
    for line in fh:
        stripped = line.strip()
        if stripped and not stripped.startswith("%"):
            return stripped
    return None
