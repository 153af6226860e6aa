"""Simplicial complexes: data model, incidence matrices, random generation, SCF files."""

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import (
    DuplicateSimplex,
    MissingFace,
    OrderOutOfRange,
    ParseError,
    UnsortedSimplex,
    VertexOutOfRange,
)


@dataclass(frozen=True)
class SimplicialComplex:
    """Simplices of every order, each a tuple of ascending vertex indices.

    ``simplices[k]`` lists the k-simplices in lexicographic order. The
    constructor stores what it is given; call :func:`validate` (or build
    through :meth:`from_simplices`) to enforce the invariants.
    """

    simplices: tuple
    _index: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        simplices = tuple(tuple(tuple(int(v) for v in s) for s in level) for level in self.simplices)
        if not simplices:
            simplices = ((),)
        object.__setattr__(self, "simplices", simplices)
        object.__setattr__(self, "_index", tuple({s: i for i, s in enumerate(level)} for level in simplices))

    @classmethod
    def from_simplices(cls, simplices, order=None):
        """Canonical complex generated by ``simplices`` and all their faces.

        Vertex lists are sorted, duplicates dropped and missing faces added.
        Vertices are taken to be ``0..max_vertex``.
        """
        simplices = [tuple(sorted(int(v) for v in s)) for s in simplices]
        top = max((len(s) - 1 for s in simplices), default=0)
        if order is None:
            order = top
        if order < top:
            raise OrderOutOfRange(f"order {order} below largest simplex dimension {top}")
        n0 = max((max(s) for s in simplices if s), default=-1) + 1
        levels = [set() for _ in range(order + 1)]
        levels[0] = {(v,) for v in range(n0)}
        for s in simplices:
            for k in range(1, len(s)):
                levels[k].update(combinations(s, k + 1))
        complex_ = cls(tuple(tuple(sorted(level)) for level in levels))
        validate(complex_)
        return complex_

    @property
    def order(self):
        return len(self.simplices) - 1

    @property
    def counts(self):
        return tuple(len(level) for level in self.simplices)

    @property
    def size(self):
        """Total number of simplices N over all orders, vertices included."""
        return sum(self.counts)

    @property
    def offsets(self):
        """Row offsets of each order in a stacked multiorder signal (length K+2)."""
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.counts)]))

    def index(self, simplex):
        simplex = tuple(simplex)
        return self._index[len(simplex) - 1][simplex]

    def __contains__(self, simplex):
        simplex = tuple(simplex)
        k = len(simplex) - 1
        return 0 <= k <= self.order and simplex in self._index[k]

    def __repr__(self):
        return f"SimplicialComplex(order={self.order}, counts={self.counts})"


def validate(complex_):
    """Raise a :class:`ComplexValidationError` subclass if any invariant fails."""
    levels = complex_.simplices
    n0 = len(levels[0]) if levels else 0
    if n0 < 1:
        raise VertexOutOfRange("a complex needs at least one vertex")
    for k, level in enumerate(levels):
        previous = None
        for s in level:
            if len(s) != k + 1:
                raise UnsortedSimplex(f"order-{k} entry {s} does not have {k + 1} vertices")
            if any(a >= b for a, b in zip(s, s[1:])):
                raise UnsortedSimplex(f"simplex {s} is not strictly ascending")
            if any(v < 0 or v >= n0 for v in s):
                raise VertexOutOfRange(f"simplex {s} references a vertex outside 0..{n0 - 1}")
            if previous is not None:
                if s == previous:
                    raise DuplicateSimplex(f"simplex {s} listed more than once")
                if s < previous:
                    raise UnsortedSimplex(f"order-{k} simplices are not in lexicographic order at {s}")
            previous = s
    for k in range(1, len(levels)):
        faces = complex_._index[k - 1]
        for s in levels[k]:
            for face in combinations(s, k):
                if face not in faces:
                    raise MissingFace(s, face)


def build_incidence(complex_, k):
    """Signed incidence matrix B_k between (k-1)- and k-simplices.

    Entry (n, m) is (-1)**i when face n is simplex m with its i-th vertex
    removed. Returned as an integer CSC matrix.
    """
    if not 1 <= k <= complex_.order:
        raise OrderOutOfRange(f"incidence order {k} outside 1..{complex_.order}")
    rows, cols, vals = [], [], []
    faces = complex_._index[k - 1]
    for m, s in enumerate(complex_.simplices[k]):
        for i in range(k + 1):
            rows.append(faces[s[:i] + s[i + 1:]])
            cols.append(m)
            vals.append(1 if i % 2 == 0 else -1)
    shape = (len(complex_.simplices[k - 1]), len(complex_.simplices[k]))
    return sp.csc_matrix(
        (np.array(vals, dtype=np.int64), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=shape,
    )


def random_complex(n0, p_edge, p_tri, seed):
    """Order-2 random complex: Bernoulli edges, then Bernoulli-filled 3-cliques."""
    if n0 < 1:
        raise ValueError("n0 must be at least 1")
    for name, p in (("p_edge", p_edge), ("p_tri", p_tri)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(n0), 2))
    keep = rng.random(len(pairs)) < p_edge
    edges = [e for e, kept in zip(pairs, keep) if kept]
    neighbours = [set() for _ in range(n0)]
    for a, b in edges:
        neighbours[a].add(b)
        neighbours[b].add(a)
    cliques = [
        (a, b, c)
        for a, b in edges
        for c in sorted(neighbours[a] & neighbours[b])
        if c > b
    ]
    cliques.sort()
    keep = rng.random(len(cliques)) < p_tri
    triangles = [t for t, kept in zip(cliques, keep) if kept]
    return SimplicialComplex((tuple((v,) for v in range(n0)), tuple(edges), tuple(triangles)))


def write_scf(complex_, path):
    validate(complex_)
    lines = ["#SCF v1", f"order {complex_.order}"]
    for k, level in enumerate(complex_.simplices):
        lines.append(f"k {k} {len(level)}")
        lines.extend(" ".join(str(v) for v in s) for s in level)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_scf(path):
    return parse_scf(Path(path).read_text(encoding="utf-8"))


def parse_scf(text):
    """Parse SCF v1 text into a validated complex."""
    raw = text.splitlines()
    if not raw or raw[0].strip() != "#SCF v1":
        raise ParseError("expected '#SCF v1' header", 1)
    body = [(i + 1, line.strip()) for i, line in enumerate(raw) if i > 0]
    body = [(n, line) for n, line in body if line and not line.startswith("#")]
    it = iter(body)

    def next_line(what):
        try:
            return next(it)
        except StopIteration:
            raise ParseError(f"unexpected end of file while reading {what}", len(raw)) from None

    n, line = next_line("order line")
    parts = line.split()
    if len(parts) != 2 or parts[0] != "order":
        raise ParseError("expected 'order <K>'", n)
    try:
        order = int(parts[1])
    except ValueError:
        raise ParseError(f"bad order value {parts[1]!r}", n) from None
    if order < 0:
        raise ParseError("order must be nonnegative", n)

    levels = []
    for k in range(order + 1):
        n, line = next_line(f"header for order {k}")
        parts = line.split()
        if len(parts) != 3 or parts[0] != "k":
            raise ParseError(f"expected 'k {k} <count>'", n)
        try:
            kk, count = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError("non-integer order header", n) from None
        if kk != k or count < 0:
            raise ParseError(f"expected header for order {k} with nonnegative count", n)
        level = []
        for _ in range(count):
            n, line = next_line(f"order-{k} simplex")
            try:
                simplex = tuple(int(v) for v in line.split())
            except ValueError:
                raise ParseError(f"non-integer vertex in {line!r}", n) from None
            if len(simplex) != k + 1:
                raise ParseError(f"order-{k} simplex needs {k + 1} vertices, got {len(simplex)}", n)
            level.append(simplex)
        levels.append(tuple(level))
    leftover = next(it, None)
    if leftover is not None:
        raise ParseError("unexpected content after last order", leftover[0])
    complex_ = SimplicialComplex(tuple(levels))
    validate(complex_)
    return complex_
