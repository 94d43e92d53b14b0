"""Finite-dimensional algebras given by structure constants.

Indices are 0-based internally; the JSON form and the catalog constructors
use the 1-based labels e1..en. Omitted products are zero.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exactla import (Matrix, Scalar, SparseRow, Subspace, Vector, _exact,
                      format_scalar, nullspace, parse_scalar)

Table = Dict[Tuple[int, int], SparseRow]


class Algebra:
    """An algebra [e_i, e_j] = sum_k c[i][j][k] e_k with exact constants.

    Instances are treated as immutable; every operation returns new objects.
    """

    __slots__ = ("dim", "table", "labels", "field", "name", "leibniz_checked")

    def __init__(self, dim: int, table: Mapping[Tuple[int, int], Mapping[int, Scalar]],
                 labels: Optional[Sequence[str]] = None, field: str = "Q", name: str = "",
                 leibniz_checked: bool = False):
        if field not in ("Q", "Q(i)"):
            raise ValueError(f"unknown field {field!r}")
        clean: Table = {}
        for (i, j), val in table.items():
            if not (0 <= i < dim and 0 <= j < dim):
                raise ValueError(f"product index ({i + 1},{j + 1}) outside 1..{dim}")
            row = {}
            for k, c in val.items():
                if not 0 <= k < dim:
                    raise ValueError(f"output index {k + 1} outside 1..{dim}")
                c = _exact(c)
                if c:
                    row[k] = c
            if row:
                clean[(i, j)] = row
        self.dim = dim
        self.table = clean
        self.labels = tuple(labels) if labels else tuple(f"e{i + 1}" for i in range(dim))
        if len(self.labels) != dim:
            raise ValueError("need one label per basis vector")
        self.field = field
        self.name = name
        self.leibniz_checked = leibniz_checked

    @classmethod
    def from_brackets(cls, dim: int, brackets: Mapping[Tuple[int, int], Mapping[int, Scalar]],
                      **kw) -> "Algebra":
        """Build from 1-based brackets {(i, j): {k: c}}; repeated keys are not merged."""
        table = {(i - 1, j - 1): {k - 1: c for k, c in val.items()} for (i, j), val in brackets.items()}
        return cls(dim, table, **kw)

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"<Algebra{tag} dim={self.dim} nnz={len(self.table)}>"

    def __eq__(self, other):
        return (isinstance(other, Algebra) and self.dim == other.dim
                and self.table == other.table)

    def __hash__(self):
        return hash((self.dim, tuple(sorted((k, tuple(sorted(v.items()))) for k, v in self.table.items()))))

    def bracket(self, i: int, j: int) -> SparseRow:
        return self.table.get((i, j), {})

    def basis_vector(self, i: int) -> Vector:
        return tuple(Fraction(1) if k == i else Fraction(0) for k in range(self.dim))

    def right_matrix(self, x: Sequence[Scalar]) -> Matrix:
        """Matrix of R_x : y -> [y, x]; column j is [e_j, x]."""
        cols = [multiply(self, self.basis_vector(j), x) for j in range(self.dim)]
        return Matrix.from_columns(cols, self.dim)

    def left_matrix(self, x: Sequence[Scalar]) -> Matrix:
        """Matrix of L_x : y -> [x, y]."""
        cols = [multiply(self, x, self.basis_vector(j)) for j in range(self.dim)]
        return Matrix.from_columns(cols, self.dim)

    def with_name(self, name: str) -> "Algebra":
        return Algebra(self.dim, self.table, self.labels, self.field, name, self.leibniz_checked)

    def describe(self) -> List[str]:
        """Human-readable multiplication table, one bracket per line."""
        out = []
        for (i, j) in sorted(self.table):
            terms = []
            for k, c in sorted(self.table[(i, j)].items()):
                coef = format_scalar(c)
                terms.append(self.labels[k] if coef == "1" else
                             f"-{self.labels[k]}" if coef == "-1" else f"({coef}){self.labels[k]}")
            out.append(f"[{self.labels[i]},{self.labels[j]}] = " + " + ".join(terms).replace("+ -", "- "))
        return out

    # -- JSON ---------------------------------------------------------------

    def to_dict(self) -> dict:
        products = []
        for (i, j) in sorted(self.table):
            products.append({
                "left": i + 1,
                "right": j + 1,
                "value": [[k + 1, format_scalar(c)] for k, c in sorted(self.table[(i, j)].items())],
            })
        out = {"dim": self.dim, "field": self.field, "basis": list(self.labels), "products": products}
        if self.name:
            out["name"] = self.name
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Algebra":
        try:
            dim = int(data["dim"])
            field = data.get("field", "Q")
            table: Dict[Tuple[int, int], Dict[int, Scalar]] = {}
            for p in data.get("products", []):
                i, j = int(p["left"]) - 1, int(p["right"]) - 1
                row = table.setdefault((i, j), {})
                for k, c in p["value"]:
                    k = int(k) - 1
                    row[k] = row.get(k, 0) + parse_scalar(c, field)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed algebra JSON: {exc}") from exc
        return cls(dim, table, data.get("basis"), field, data.get("name", ""))

    @classmethod
    def from_json(cls, text: str) -> "Algebra":
        return cls.from_dict(json.loads(text))


def abelian(n: int) -> Algebra:
    return Algebra(n, {}, name=f"abelian{n}")


# ---------------------------------------------------------------------------
# products


def _check_vec(alg: Algebra, v: Sequence[Scalar]) -> None:
    if len(v) != alg.dim:
        raise ValueError(f"vector of length {len(v)} for an algebra of dimension {alg.dim}")


def sparse_bracket(alg: Algebra, x: SparseRow, y: SparseRow) -> SparseRow:
    out: SparseRow = {}
    for i, a in x.items():
        for j, b in y.items():
            row = alg.table.get((i, j))
            if not row:
                continue
            ab = a * b
            for k, c in row.items():
                out[k] = out.get(k, 0) + ab * c
    return {k: v for k, v in out.items() if v}


def multiply(alg: Algebra, x: Sequence[Scalar], y: Sequence[Scalar]) -> Vector:
    """Bilinear extension of the structure constants: [x, y]."""
    _check_vec(alg, x)
    _check_vec(alg, y)
    xs = {i: v for i, v in enumerate(x) if v}
    ys = {i: v for i, v in enumerate(y) if v}
    prod = sparse_bracket(alg, xs, ys)
    return tuple(_exact(prod.get(k, 0)) for k in range(alg.dim))


@dataclass
class LeibnizReport:
    """LI(e_i, e_j, e_k) = [e_i,[e_j,e_k]] - [[e_i,e_j],e_k] + [[e_i,e_k],e_j] on basis triples."""

    dim: int
    residuals: Dict[Tuple[int, int, int], SparseRow] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.residuals

    @property
    def worst(self) -> Optional[Tuple[Tuple[int, int, int], Scalar]]:
        best = None
        for t, r in self.residuals.items():
            size = max(_magnitude(v) for v in r.values())
            if best is None or size > best[1]:
                best = (t, size)
        return best

    def summary(self) -> str:
        if self.ok:
            return f"Leibniz identity holds on all {self.dim ** 3} basis triples"
        (i, j, k), size = self.worst
        return (f"{len(self.residuals)} violating triples; worst LI(e{i + 1},e{j + 1},e{k + 1}) "
                f"with max coefficient {format_scalar(size)}")


def _magnitude(v: Scalar) -> Fraction:
    if hasattr(v, "im"):
        return v.re * v.re + v.im * v.im
    return abs(v)


def leibniz_residual(alg: Algebra) -> LeibnizReport:
    n = alg.dim
    tab = alg.table
    report = LeibnizReport(n)
    for i in range(n):
        ei = {i: 1}
        for j in range(n):
            ij = tab.get((i, j))
            for k in range(n):
                jk = tab.get((j, k))
                ik = tab.get((i, k))
                if not (ij or jk or ik):
                    continue
                acc: SparseRow = {}
                if jk:
                    _axpy(acc, 1, sparse_bracket(alg, ei, jk))
                if ij:
                    _axpy(acc, -1, sparse_bracket(alg, ij, {k: 1}))
                if ik:
                    _axpy(acc, 1, sparse_bracket(alg, ik, {j: 1}))
                acc = {m: v for m, v in acc.items() if v}
                if acc:
                    report.residuals[(i, j, k)] = acc
    return report


def is_leibniz(alg: Algebra) -> bool:
    return leibniz_residual(alg).ok


def _axpy(acc: SparseRow, a, x: SparseRow) -> None:
    for k, v in x.items():
        acc[k] = acc.get(k, 0) + a * v


# ---------------------------------------------------------------------------
# subspaces, series, annihilators


def product_subspace(alg: Algebra, s1: Subspace, s2: Subspace) -> Subspace:
    """span{[v, w] : v in basis(s1), w in basis(s2)}."""
    if s1.ambient != alg.dim or s2.ambient != alg.dim:
        raise ValueError("ambient dimension mismatch")
    vecs = []
    for v in s1.basis:
        vs = {i: c for i, c in enumerate(v) if c}
        for w in s2.basis:
            p = sparse_bracket(alg, vs, {i: c for i, c in enumerate(w) if c})
            if p:
                vecs.append(tuple(p.get(k, 0) for k in range(alg.dim)))
    return Subspace(alg.dim, vecs)


def lower_central_series(alg: Algebra) -> List[Subspace]:
    """[L^1, L^2, ...] up to and including the first repeated term."""
    whole = Subspace.full(alg.dim)
    out = [whole]
    while True:
        nxt = product_subspace(alg, out[-1], whole)
        out.append(nxt)
        if nxt == out[-2] or nxt.dim == 0:
            return out


def derived_series(alg: Algebra) -> List[Subspace]:
    out = [Subspace.full(alg.dim)]
    while True:
        nxt = product_subspace(alg, out[-1], out[-1])
        out.append(nxt)
        if nxt == out[-2] or nxt.dim == 0:
            return out


@dataclass(frozen=True)
class SeriesProfile:
    lower_central: Tuple[int, ...]
    derived: Tuple[int, ...]

    @property
    def nilpotent(self) -> bool:
        return self.lower_central[-1] == 0

    @property
    def solvable(self) -> bool:
        return self.derived[-1] == 0


def _dims(chain: List[Subspace]) -> Tuple[int, ...]:
    dims = [s.dim for s in chain]
    # drop the repeated stabilized term
    if len(dims) >= 2 and dims[-1] == dims[-2] and dims[-1] != 0:
        dims.pop()
    return tuple(dims)


def series(alg: Algebra) -> SeriesProfile:
    return SeriesProfile(_dims(lower_central_series(alg)), _dims(derived_series(alg)))


def is_nilpotent(alg: Algebra) -> bool:
    return lower_central_series(alg)[-1].dim == 0


def is_solvable(alg: Algebra) -> bool:
    return derived_series(alg)[-1].dim == 0


def _stacked_kernel(alg: Algebra, maps: Iterable[Matrix]) -> Subspace:
    rows: List[SparseRow] = []
    for m in maps:
        rows.extend(r for r in m.sparse_rows() if r)
    return nullspace((alg.dim, rows))


def right_annihilator(alg: Algebra) -> Subspace:
    """{x : [y, x] = 0 for all y} = intersection of ker L_{e_i}."""
    return _stacked_kernel(alg, (alg.left_matrix(alg.basis_vector(i)) for i in range(alg.dim)))


def left_annihilator(alg: Algebra) -> Subspace:
    """{x : [x, y] = 0 for all y} = intersection of ker R_{e_j}."""
    return _stacked_kernel(alg, (alg.right_matrix(alg.basis_vector(j)) for j in range(alg.dim)))


def center(alg: Algebra) -> Subspace:
    return right_annihilator(alg) & left_annihilator(alg)


def symmetric_span(alg: Algebra) -> Subspace:
    """span{[x, y] + [y, x]}; spanned by its values on basis pairs."""
    n = alg.dim
    vecs = []
    for i in range(n):
        for j in range(i, n):
            acc: SparseRow = {}
            _axpy(acc, 1, alg.bracket(i, j))
            _axpy(acc, 1, alg.bracket(j, i))
            if any(acc.values()):
                vecs.append(tuple(acc.get(k, 0) for k in range(n)))
    return Subspace(n, vecs)


# ---------------------------------------------------------------------------
# characteristic sequence


def jordan_type(m: Matrix) -> Tuple[int, ...]:
    """Jordan block sizes of a nilpotent matrix from the ranks of its powers."""
    n = m.nrows
    ranks = [n]
    power = Matrix.identity(n)
    while ranks[-1] > 0:
        power = power @ m
        r = power.rank()
        if r == ranks[-1]:
            raise ValueError("matrix is not nilpotent")
        ranks.append(r)
    # at_least[k] = number of blocks of size >= k
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    sizes = []
    for k in range(len(at_least), 0, -1):
        exact = at_least[k - 1] - (at_least[k] if k < len(at_least) else 0)
        sizes.extend([k] * exact)
    return tuple(sizes)


def characteristic_sequence(alg: Algebra, x: Sequence[Scalar]) -> Tuple[int, ...]:
    """Jordan block sizes of R_x for x outside L^2 with R_x nilpotent."""
    _check_vec(alg, x)
    square = product_subspace(alg, Subspace.full(alg.dim), Subspace.full(alg.dim))
    if square.contains(x):
        raise ValueError("x lies in L^2; the characteristic sequence needs x outside L^2")
    try:
        return jordan_type(alg.right_matrix(x))
    except ValueError:
        raise ValueError("R_x is not nilpotent") from None


# ---------------------------------------------------------------------------
# basis changes and subalgebras


def apply_basis_change(alg: Algebra, p: Matrix) -> Algebra:
    """Rewrite alg in the basis e'_i = sum_k p[i][k] e_k (rows of p)."""
    n = alg.dim
    if (p.nrows, p.ncols) != (n, n):
        raise ValueError("basis change must be an n x n matrix")
    try:
        pinv = p.inverse()
    except ValueError:
        raise ValueError("basis change matrix is singular") from None
    rows = [{k: c for k, c in enumerate(r) if c} for r in p.rows]
    table: Table = {}
    for i in range(n):
        for j in range(n):
            v = sparse_bracket(alg, rows[i], rows[j])
            if not v:
                continue
            new = {}
            for k in range(n):
                c = sum((vm * pinv.rows[m][k] for m, vm in v.items()), Fraction(0))
                if c:
                    new[k] = c
            if new:
                table[(i, j)] = new
    return Algebra(n, table, alg.labels, alg.field, alg.name)


def restrict(alg: Algebra, sub: Subspace, labels: Optional[Sequence[str]] = None) -> Algebra:
    """Structure constants of a subalgebra in the RREF basis of sub."""
    basis = [{k: c for k, c in enumerate(v) if c} for v in sub.basis]
    table: Table = {}
    for a, u in enumerate(basis):
        for b, w in enumerate(basis):
            prod = sparse_bracket(alg, u, w)
            if not prod:
                continue
            vec = tuple(prod.get(k, 0) for k in range(alg.dim))
            try:
                coords = sub.coordinates(vec)
            except ValueError:
                raise ValueError("subspace is not closed under the product") from None
            table[(a, b)] = {k: c for k, c in enumerate(coords) if c}
    if labels is None:
        labels = [_vector_label(alg, v) for v in sub.basis]
    return Algebra(sub.dim, table, labels, alg.field)


def _vector_label(alg: Algebra, v: Sequence[Scalar]) -> str:
    nz = [(k, c) for k, c in enumerate(v) if c]
    if len(nz) == 1 and nz[0][1] == 1:
        return alg.labels[nz[0][0]]
    return "+".join(f"{format_scalar(c)}*{alg.labels[k]}" for k, c in nz)


def is_ideal(alg: Algebra, sub: Subspace) -> bool:
    whole = Subspace.full(alg.dim)
    return (product_subspace(alg, sub, whole) <= sub
            and product_subspace(alg, whole, sub) <= sub)


# ---------------------------------------------------------------------------
# natural gradation


@dataclass
class Grading:
    layer_dims: Tuple[int, ...]
    section: Matrix          # rows: adapted basis vectors in old coordinates, layer by layer
    layer_of: Tuple[int, ...]
    graded: Algebra          # gr(L) in the adapted basis
    original: Algebra        # L rewritten in the adapted basis

    @property
    def is_naturally_graded(self) -> bool:
        return self.graded == self.original


def natural_grading(alg: Algebra) -> Grading:
    """gr(L) = sum L^i / L^(i+1) over the canonical section of the filtration.

    Layer i is spanned by the RREF rows of L^i whose pivots are not pivots
    of L^(i+1); together they form a basis adapted to the filtration.
    """
    chain = lower_central_series(alg)
    if chain[-1].dim != 0:
        raise ValueError("natural grading needs a nilpotent algebra")
    section: List[Vector] = []
    layer_of: List[int] = []
    dims = []
    for depth in range(len(chain) - 1):
        upper, lower = chain[depth], chain[depth + 1]
        keep = set(upper.pivots) - set(lower.pivots)
        picked = [v for p, v in zip(upper.pivots, upper.basis) if p in keep]
        section.extend(picked)
        layer_of.extend([depth + 1] * len(picked))
        dims.append(len(picked))
    p = Matrix(section, alg.dim)
    original = apply_basis_change(alg, p)
    labels = [_vector_label(alg, v) for v in section]
    graded_table: Table = {}
    for (a, b), val in original.table.items():
        target = layer_of[a] + layer_of[b]
        kept = {k: c for k, c in val.items() if layer_of[k] == target}
        if kept:
            graded_table[(a, b)] = kept
    original = Algebra(alg.dim, original.table, labels, alg.field, alg.name)
    graded = Algebra(alg.dim, graded_table, labels, alg.field, f"gr({alg.name})" if alg.name else "")
    return Grading(tuple(dims), p, tuple(layer_of), graded, original)
