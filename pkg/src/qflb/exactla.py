"""Exact scalars and exact linear algebra over Q and Q(i).

Everything here is pure: matrices and subspaces are immutable once built.
Row reduction works on sparse dict rows so that the large, very sparse
systems coming from derivation and extension problems stay cheap.
"""
from __future__ import annotations

import math
import random
import re
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union


class GaussianRational:
    """A number a + b*i with rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _lift(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def inverse(self):
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational(self.re / norm, -self.im / norm)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = GaussianRational(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"GaussianRational({format_scalar(self)!r})"


Scalar = Union[int, Fraction, GaussianRational]
Vector = Tuple[Scalar, ...]

_RAT = r"[+-]?\d+(?:/\d+)?"
_GAUSS_RE = re.compile(rf"^\s*({_RAT})?\s*(?:([+-])\s*(\d+(?:/\d+)?)?\s*\*?\s*i)?\s*$")


def parse_scalar(text, field: str = "Q") -> Scalar:
    """Parse "p/q" (or "p/q+r/s i" when field is Q(i)) into an exact scalar."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, GaussianRational):
        return text
    s = str(text).strip()
    if "i" not in s:
        try:
            return Fraction(s)
        except ValueError:
            raise ValueError(f"not an exact rational: {text!r}") from None
    if field != "Q(i)":
        raise ValueError(f"imaginary scalar {text!r} outside Q(i) mode")
    s = s.replace(" ", "")
    if s in ("i", "+i"):
        return GaussianRational(0, 1)
    if s == "-i":
        return GaussianRational(0, -1)
    m = _GAUSS_RE.match(s)
    if not m:
        # a pure imaginary such as "3/2i" or "-2i"
        m2 = re.match(rf"^({_RAT})\*?i$", s)
        if not m2:
            raise ValueError(f"not a Gaussian rational: {text!r}")
        return GaussianRational(0, Fraction(m2.group(1)))
    re_part = Fraction(m.group(1)) if m.group(1) else Fraction(0)
    sign, mag = m.group(2), m.group(3)
    im_part = Fraction(mag) if mag else Fraction(1)
    if sign == "-":
        im_part = -im_part
    return GaussianRational(re_part, im_part)


def format_scalar(x: Scalar) -> str:
    if isinstance(x, GaussianRational):
        if x.im == 0:
            return str(x.re)
        sign = "-" if x.im < 0 else "+"
        return f"{x.re}{sign}{abs(x.im)} i"
    return str(Fraction(x))


def is_zero(x: Scalar) -> bool:
    return not x


# ---------------------------------------------------------------------------
# sparse elimination core


SparseRow = Dict[int, Scalar]


def _reduce_against(row: SparseRow, pivots: Dict[int, SparseRow]) -> SparseRow:
    """Eliminate every pivot column from row, smallest column first.

    Pivot rows have their pivot as their smallest column, so eliminating
    column c only touches columns > c.
    """
    row = {c: v for c, v in row.items() if v}
    while True:
        hit = [c for c in row if c in pivots]
        if not hit:
            return row
        c = min(hit)
        f = row[c]
        for cc, vv in pivots[c].items():
            nv = row.get(cc, 0) - f * vv
            if nv:
                row[cc] = nv
            else:
                row.pop(cc, None)


def _integer_row(row: SparseRow) -> Optional[Dict[int, int]]:
    """Primitive integer multiple of a rational row; None for Gaussian entries."""
    if not all(type(v) is Fraction or type(v) is int for v in row.values()):
        return None
    den = 1
    for v in row.values():
        d = v.denominator if type(v) is Fraction else 1
        den = den * d // math.gcd(den, d)
    out = {c: (v.numerator * (den // v.denominator) if type(v) is Fraction else v * den)
           for c, v in row.items() if v}
    g = 0
    for v in out.values():
        g = math.gcd(g, v)
    return {c: v // g for c, v in out.items()} if g > 1 else out


def _primitive(row: Dict[int, int]) -> Dict[int, int]:
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
    return {k: v // g for k, v in row.items()} if g > 1 else row


def _forward_integers(rows: Iterable[Dict[int, int]]) -> Dict[int, Dict[int, int]]:
    # fraction-free forward pass: pivot rows stay primitive integer vectors
    pivots: Dict[int, Dict[int, int]] = {}
    for row in rows:
        row = dict(row)
        steps = 0
        while row:
            hit = [c for c in row if c in pivots]
            if not hit:
                break
            c = min(hit)
            prow = pivots[c]
            a, b = prow[c], row[c]
            g = math.gcd(a, b)
            ma, mb = a // g, b // g
            new = {k: v * ma for k, v in row.items()}
            for k, v in prow.items():
                nv = new.get(k, 0) - mb * v
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            steps += 1
            # strip the content now and then to keep the integers short
            row = _primitive(new) if steps % 4 == 0 else new
        if row:
            row = _primitive(row)
            pivots[min(row)] = row
    return pivots


def _back_substitute(pivots: Dict[int, Dict[int, int]]) -> Dict[int, SparseRow]:
    # integer rows, last pivot first; divide by the leading entry at the end
    done: Dict[int, Dict[int, int]] = {}
    for p in sorted(pivots, reverse=True):
        row = dict(pivots[p])
        for q in [c for c in row if c != p and c in done]:
            b = row.get(q)
            if not b:
                continue
            qrow = done[q]
            a = qrow[q]
            g = math.gcd(a, b)
            ma, mb = a // g, b // g
            new = {k: v * ma for k, v in row.items()}
            for k, v in qrow.items():
                nv = new.get(k, 0) - mb * v
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            row = _primitive(new)
        done[p] = row
    return {p: {c: Fraction(v, r[p]) for c, v in r.items()} for p, r in done.items()}


def _spans_all(rref_rows: Dict[int, SparseRow], rows: List[Dict[int, int]], width: int) -> bool:
    """True iff every row is orthogonal to the null space of rref_rows."""
    for f in range(width):
        if f in rref_rows:
            continue
        vec = {f: Fraction(1)}
        for p, r in rref_rows.items():
            if r.get(f):
                vec[p] = -r[f]
        den = 1
        for v in vec.values():
            den = den * v.denominator // math.gcd(den, v.denominator)
        ivec = {c: int(v * den) for c, v in vec.items()}
        for row in rows:
            if sum(v * ivec.get(c, 0) for c, v in row.items()):
                return False
    return True


def _echelonize_integers(rows: List[Dict[int, int]]) -> Dict[int, SparseRow]:
    rows = [r for r in rows if r]
    width = 1 + max((max(r) for r in rows), default=-1)
    if len(rows) > 2 * width:
        # tall system: eliminate `width` seeded random combinations instead,
        # then certify that they span every row (exact; falls back otherwise)
        rng = random.Random(len(rows) * 1000003 + width)
        per = max(2, 2 * len(rows) // width)
        mixed = []
        for _ in range(width):
            acc: Dict[int, int] = {}
            for r in rng.sample(rows, min(per, len(rows))):
                k = rng.choice((-1, 1))
                for c, v in r.items():
                    nv = acc.get(c, 0) + k * v
                    if nv:
                        acc[c] = nv
                    else:
                        acc.pop(c, None)
            mixed.append(_primitive(acc))
        out = _back_substitute(_forward_integers(mixed))
        if _spans_all(out, rows, width):
            return out
    return _back_substitute(_forward_integers(rows))


def echelonize(rows: Iterable[SparseRow]) -> Dict[int, SparseRow]:
    """Fully reduced echelon form of a stream of sparse rows.

    Returns {pivot column: row}, each row normalized to 1 at its pivot and
    zero in every other pivot column.
    """
    rows = list(rows)
    ints = [_integer_row(r) for r in rows]
    if all(r is not None for r in ints):
        return _echelonize_integers(ints)
    pivots: Dict[int, SparseRow] = {}
    for raw in rows:
        row = _reduce_against(raw, pivots)
        if not row:
            continue
        p = min(row)
        inv = Fraction(1) / row[p]
        row = {c: v * inv for c, v in row.items()}
        # keep every pivot row free of the new pivot column
        for q, prow in pivots.items():
            f = prow.get(p)
            if f:
                for cc, vv in row.items():
                    nv = prow.get(cc, 0) - f * vv
                    if nv:
                        prow[cc] = nv
                    else:
                        prow.pop(cc, None)
        pivots[p] = row
    return pivots


# ---------------------------------------------------------------------------
# dense matrices


class Matrix:
    """Immutable dense matrix with exact entries."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence[Scalar]], ncols: Optional[int] = None):
        self.rows: Tuple[Vector, ...] = tuple(tuple(_exact(v) for v in r) for r in rows)
        self.nrows = len(self.rows)
        if ncols is None:
            if not self.rows:
                raise ValueError("ncols required for a matrix with no rows")
            ncols = len(self.rows[0])
        self.ncols = ncols
        if any(len(r) != ncols for r in self.rows):
            raise ValueError("ragged matrix")

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        return cls([[0] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_sparse(cls, nrows: int, ncols: int, rows: Sequence[SparseRow]) -> "Matrix":
        dense = []
        for r in rows:
            d = [0] * ncols
            for c, v in r.items():
                d[c] = v
            dense.append(d)
        dense.extend([0] * ncols for _ in range(nrows - len(dense)))
        return cls(dense, ncols)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[Scalar]], nrows: int) -> "Matrix":
        return cls([[col[i] for col in cols] for i in range(nrows)], len(cols))

    def sparse_rows(self) -> List[SparseRow]:
        return [{c: v for c, v in enumerate(r) if v} for r in self.rows]

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.rows)

    def transpose(self) -> "Matrix":
        return Matrix([self.column(j) for j in range(self.ncols)], self.nrows)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.ncols == other.ncols
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.ncols, self.rows))

    def __repr__(self):
        body = "; ".join(" ".join(format_scalar(v) for v in r) for r in self.rows)
        return f"Matrix({self.nrows}x{self.ncols}: [{body}])"

    def __add__(self, other: "Matrix") -> "Matrix":
        _check_shape(self, other)
        return Matrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        _check_shape(self, other)
        return Matrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __neg__(self) -> "Matrix":
        return Matrix([[-a for a in r] for r in self.rows], self.ncols)

    def scale(self, c: Scalar) -> "Matrix":
        return Matrix([[c * a for a in r] for r in self.rows], self.ncols)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
            cols = [other.column(j) for j in range(other.ncols)]
            return Matrix([[_dot(r, c) for c in cols] for r in self.rows], other.ncols)
        v = tuple(other)
        if len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        return tuple(_dot(r, v) for r in self.rows)

    def __pow__(self, k: int) -> "Matrix":
        if self.nrows != self.ncols:
            raise ValueError("power of a non-square matrix")
        out = Matrix.identity(self.nrows)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return not any(v for r in self.rows for v in r)

    def rank(self) -> int:
        return len(echelonize(self.sparse_rows()))

    def det(self) -> Scalar:
        if self.nrows != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        m = [list(r) for r in self.rows]
        n = self.nrows
        det: Scalar = Fraction(1)
        for c in range(n):
            p = next((r for r in range(c, n) if m[r][c]), None)
            if p is None:
                return Fraction(0)
            if p != c:
                m[c], m[p] = m[p], m[c]
                det = -det
            det = det * m[c][c]
            inv = Fraction(1) / m[c][c]
            for r in range(c + 1, n):
                f = m[r][c] * inv
                if f:
                    for j in range(c, n):
                        m[r][j] -= f * m[c][j]
        return det

    def inverse(self) -> "Matrix":
        n = self.nrows
        if n != self.ncols:
            raise ValueError("inverse of a non-square matrix")
        aug = [{**{c: v for c, v in enumerate(r) if v}, n + i: 1} for i, r in enumerate(self.rows)]
        piv = echelonize(aug)
        if sorted(piv) != list(range(n)):
            raise ValueError("singular matrix")
        return Matrix([[piv[i].get(n + j, 0) for j in range(n)] for i in range(n)], n)


def _exact(v) -> Scalar:
    if isinstance(v, GaussianRational):
        return v if v.im else v.re
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return parse_scalar(v, "Q(i)")
    raise TypeError(f"inexact scalar {v!r}")


def _dot(a, b):
    s = 0
    for x, y in zip(a, b):
        if x and y:
            s += x * y
    return Fraction(s) if isinstance(s, int) else s


def _check_shape(a: Matrix, b: Matrix) -> None:
    if (a.nrows, a.ncols) != (b.nrows, b.ncols):
        raise ValueError("shape mismatch")


# ---------------------------------------------------------------------------
# operations


def rref(m: Matrix) -> Tuple[Matrix, int, List[int]]:
    """Reduced row-echelon form, padded with zero rows to the input shape."""
    piv = echelonize(m.sparse_rows())
    cols = sorted(piv)
    out = Matrix.from_sparse(m.nrows, m.ncols, [piv[c] for c in cols])
    return out, len(cols), cols


def _nullspace_from_pivots(piv: Dict[int, SparseRow], ncols: int) -> List[Vector]:
    basis = []
    for f in range(ncols):
        if f in piv:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for p, row in piv.items():
            c = row.get(f)
            if c:
                v[p] = -c
        basis.append(tuple(v))
    return basis


def nullspace(m: Union[Matrix, Tuple[int, Sequence[SparseRow]]]) -> "Subspace":
    """Right null space {v : m v = 0}.

    Accepts a Matrix or a pair (ncols, sparse rows) for large sparse systems.
    """
    if isinstance(m, Matrix):
        ncols, rows = m.ncols, m.sparse_rows()
    else:
        ncols, rows = m
    piv = echelonize(rows)
    return Subspace(ncols, _nullspace_from_pivots(piv, ncols))


class Inconsistent(ValueError):
    """Raised by solve_affine when the right-hand side is outside the column space."""


def solve_affine(a: Union[Matrix, Tuple[int, Sequence[SparseRow]]], b: Sequence[Scalar]
                 ) -> Tuple[Vector, "Subspace"]:
    """Solve a x = b. Returns (particular solution, homogeneous solution space).

    The particular solution has every free variable set to zero.
    """
    if isinstance(a, Matrix):
        ncols, rows = a.ncols, a.sparse_rows()
    else:
        ncols, rows = a
        rows = list(rows)
    if len(rows) != len(b):
        raise ValueError("rhs length does not match number of rows")
    aug = []
    for r, bi in zip(rows, b):
        r = dict(r)
        if bi:
            r[ncols] = _exact(bi)
        aug.append(r)
    piv = echelonize(aug)
    if ncols in piv:
        raise Inconsistent("right-hand side is not in the column space")
    x = [Fraction(0)] * ncols
    for p, row in piv.items():
        x[p] = row.get(ncols, Fraction(0))
    hom_piv = {p: {c: v for c, v in row.items() if c != ncols} for p, row in piv.items()}
    return tuple(x), Subspace(ncols, _nullspace_from_pivots(hom_piv, ncols))


# ---------------------------------------------------------------------------
# subspaces


class Subspace:
    """A linear subspace of K^ambient stored as its canonical RREF basis."""

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, vectors: Iterable[Sequence[Scalar]] = ()):
        self.ambient = ambient
        rows = []
        for v in vectors:
            if len(v) != ambient:
                raise ValueError(f"vector of length {len(v)} in ambient dimension {ambient}")
            rows.append({c: _exact(x) for c, x in enumerate(v) if x})
        piv = echelonize(rows)
        self.pivots: Tuple[int, ...] = tuple(sorted(piv))
        self.basis: Tuple[Vector, ...] = tuple(
            tuple(piv[p].get(c, Fraction(0)) for c in range(ambient)) for p in self.pivots)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, Matrix.identity(n).rows)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, ())

    @classmethod
    def span_of_basis_vectors(cls, n: int, indices: Iterable[int]) -> "Subspace":
        return cls(n, [tuple(1 if c == i else 0 for c in range(n)) for i in indices])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self):
        return self.dim

    def matrix(self) -> Matrix:
        return Matrix(self.basis, self.ambient)

    def contains(self, v: Sequence[Scalar]) -> bool:
        r = {c: _exact(x) for c, x in enumerate(v) if x}
        piv = {p: dict((c, x) for c, x in enumerate(row) if x) for p, row in zip(self.pivots, self.basis)}
        return not _reduce_against(r, piv)

    __contains__ = contains

    def coordinates(self, v: Sequence[Scalar]) -> Vector:
        """Coordinates of v in the RREF basis (raises if v is outside)."""
        if not self.contains(v):
            raise ValueError("vector is not in the subspace")
        return tuple(_exact(v[p]) for p in self.pivots)

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace(self.ambient, self.basis + other.basis)

    def annihilator(self) -> "Subspace":
        """{w : <v, w> = 0 for all v here}, the bilinear orthogonal complement."""
        if not self.basis:
            return Subspace.full(self.ambient)
        return nullspace(self.matrix())

    def __and__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        constraints = self.annihilator().basis + other.annihilator().basis
        if not constraints:
            return Subspace.full(self.ambient)
        return nullspace(Matrix(constraints, self.ambient))

    def __le__(self, other: "Subspace") -> bool:
        self._check(other)
        return all(other.contains(v) for v in self.basis)

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.ambient == other.ambient
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.ambient, self.basis))

    def __repr__(self):
        return f"Subspace(ambient={self.ambient}, dim={self.dim})"

    def _check(self, other: "Subspace") -> None:
        if self.ambient != other.ambient:
            raise ValueError("ambient dimensions differ")
