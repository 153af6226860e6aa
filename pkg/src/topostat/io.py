"""Text formats for signal matrices, PSD/coefficient vectors and masks."""

from pathlib import Path

import numpy as np

from .errors import ParseError
from .signals import SignalEnsemble


def _fmt(x):
    return repr(float(x))


def format_signals(ensemble):
    """Header ``m1,...,mM`` then one row per simplex; offsets go in a leading comment."""
    data = np.asarray(ensemble, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    lines = []
    offsets = getattr(ensemble, "offsets", None)
    if offsets is not None:
        lines.append("# offsets: " + ",".join(str(o) for o in offsets))
    lines.append(",".join(f"m{j + 1}" for j in range(data.shape[1])))
    lines.extend(",".join(_fmt(v) for v in row) for row in data)
    return "\n".join(lines) + "\n"


def write_signals(ensemble, path):
    Path(path).write_text(format_signals(ensemble), encoding="utf-8")


def parse_signals(text):
    offsets = None
    header = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("offsets:"):
                try:
                    offsets = tuple(int(v) for v in body.split(":", 1)[1].split(","))
                except ValueError:
                    raise ParseError("bad offsets comment", lineno) from None
            continue
        if header is None:
            header = line.split(",")
            if not all(h.strip().startswith("m") for h in header):
                raise ParseError("expected header 'm1,...,mM'", lineno)
            continue
        try:
            row = [float(v) for v in line.split(",")]
        except ValueError:
            raise ParseError("non-numeric value", lineno) from None
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} values, got {len(row)}", lineno)
        rows.append(row)
    if header is None or not rows:
        raise ParseError("no signal rows found")
    return SignalEnsemble(np.array(rows), offsets=offsets)


def read_signals(path):
    return parse_signals(Path(path).read_text(encoding="utf-8"))


def write_vector(values, path):
    """``index,value`` CSV."""
    lines = ["index,value"] + [f"{i},{_fmt(v)}" for i, v in enumerate(np.ravel(values))]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_vector(path):
    lines = [l.strip() for l in Path(path).read_text(encoding="utf-8").splitlines()]
    lines = [l for l in lines if l and not l.startswith("#")]
    if not lines or lines[0] != "index,value":
        raise ParseError("expected header 'index,value'", 1)
    values = {}
    for lineno, line in enumerate(lines[1:], 2):
        try:
            i, v = line.split(",")
            values[int(i)] = float(v)
        except ValueError:
            raise ParseError(f"bad row {line!r}", lineno) from None
    if sorted(values) != list(range(len(values))):
        raise ParseError("indices must run 0..n-1")
    return np.array([values[i] for i in range(len(values))])


def write_matrix(matrix, path):
    np.savetxt(path, np.asarray(matrix, dtype=float), delimiter=",", fmt="%.17g")


def read_matrix(path):
    return np.atleast_2d(np.loadtxt(path, delimiter=",", comments="#"))


def write_mask(mask, path):
    Path(path).write_text("".join(f"{i}\n" for i in mask.observed), encoding="utf-8")


def read_mask_indices(path):
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(int(line))
        except ValueError:
            raise ParseError(f"bad mask index {line!r}", lineno) from None
    return out
