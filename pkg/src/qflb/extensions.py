"""Codimension-one extension completion.

Given a nilpotent algebra N with basis e_1..e_n and a derivation D that is to
be the right action of an adjoined element x (D e_i = [e_i, x]), find the
left products l_i = [x, e_i] and the square q = [x, x], all sought inside N.

Every Leibniz triple of the extended algebra is expanded symbolically with
the unknown coordinates of l_i and q as variables. The triples
(e,e,x), (e,x,e), (x,e,e), (x,e,x), (e,x,x) are linear in the unknowns and
form an affine system; (x,x,e) and (x,x,x) are quadratic and are returned as
explicit polynomial residuals over the free parameters of the affine family.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .algebra import (Algebra, is_ideal, is_nilpotent, leibniz_residual, multiply,
                      restrict, series)
from .derivations import derivation_defect, is_nilpotent_derivation
from .exactla import (Inconsistent, Matrix, Scalar, SparseRow, Subspace, format_scalar,
                      solve_affine)

Monomial = Tuple[int, ...]


class Poly:
    """Sparse polynomial with exact coefficients; monomials are sorted variable tuples."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Monomial, Scalar]] = None):
        self.terms: Dict[Monomial, Scalar] = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, c: Scalar) -> "Poly":
        return cls({(): c})

    @classmethod
    def var(cls, v: int) -> "Poly":
        return cls({(v,): Fraction(1)})

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    def __sub__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) - c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def scale(self, c: Scalar) -> "Poly":
        return Poly({m: c * v for m, v in self.terms.items()}) if c else Poly()

    def __mul__(self, other: "Poly") -> "Poly":
        out: Dict[Monomial, Scalar] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=-1)

    def variables(self) -> set:
        return {v for m in self.terms for v in m}

    def evaluate(self, values: Mapping[int, Scalar]) -> Scalar:
        total: Scalar = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for v in m:
                t = t * values.get(v, 0)
            total += t
        return total

    def substitute(self, images: Mapping[int, "Poly"]) -> "Poly":
        out = Poly()
        for m, c in self.terms.items():
            t = Poly.const(c)
            for v in m:
                t = t * images.get(v, Poly.var(v))
            out = out + t
        return out

    def format(self, names: Sequence[str]) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (len(m), m)):
            mono = "*".join(names[v] for v in m)
            c = format_scalar(self.terms[m])
            parts.append(c if not mono else mono if c == "1" else f"-{mono}" if c == "-1" else f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self, names: Sequence[str]) -> Dict[str, str]:
        """Coefficient map {"name1*name2": "p/q"}; the constant term has key "1"."""
        return {("*".join(names[v] for v in m) or "1"): format_scalar(c)
                for m, c in sorted(self.terms.items())}

    def __repr__(self):
        return f"Poly({self.terms})"


Element = Dict[int, Poly]


def _elem_add(acc: Element, other: Element, sign: int = 1) -> None:
    for k, p in other.items():
        cur = acc.get(k)
        nxt = (cur + p if sign > 0 else cur - p) if cur is not None else (p if sign > 0 else -p)
        if nxt:
            acc[k] = nxt
        else:
            acc.pop(k, None)


class ExtensionProblem:
    """Nilradical N, right action D of the adjoined x, and optional known zeros.

    ann_r_seed: 0-based indices i with e_i known to lie in Ann_r of the
    extension, so [x, e_i] = 0 is imposed before solving.
    pinned: {unknown name: value} fixed before solving.
    """

    def __init__(self, nilradical: Algebra, right_action: Matrix, ann_r_seed: Iterable[int] = (),
                 require_non_nilpotent: bool = True, pinned: Optional[Mapping[str, Scalar]] = None):
        n = nilradical.dim
        if (right_action.nrows, right_action.ncols) != (n, n):
            raise ValueError("right action must be an n x n matrix")
        defect = derivation_defect(nilradical, right_action)
        if defect:
            (i, j), _ = next(iter(defect.items()))
            raise ValueError(f"right action is not a derivation of the nilradical "
                             f"(fails on the pair e{i + 1}, e{j + 1})")
        if require_non_nilpotent and is_nilpotent_derivation(right_action):
            raise ValueError("right action is nilpotent; the extension would be nilpotent")
        self.nilradical = nilradical
        self.n = n
        self.right_action = right_action
        self.ann_r_seed = tuple(sorted(set(ann_r_seed)))
        self.names: List[str] = (
            [f"[x,e{i + 1}]_e{k + 1}" for i in range(n) for k in range(n)]
            + [f"[x,x]_e{k + 1}" for k in range(n)])
        self.index = {name: t for t, name in enumerate(self.names)}
        pins = dict(pinned or {})
        for i in self.ann_r_seed:
            for k in range(n):
                pins.setdefault(self.names[i * n + k], 0)
        self.pinned: Dict[int, Scalar] = {}
        for name, v in pins.items():
            if name not in self.index:
                raise ValueError(f"no unknown named {name!r}")
            self.pinned[self.index[name]] = Fraction(v) if not hasattr(v, "im") else v
        self._table = self._symbolic_table()

    @property
    def num_unknowns(self) -> int:
        return self.n * self.n + self.n

    def left_var(self, i: int, k: int) -> int:
        return i * self.n + k

    def square_var(self, k: int) -> int:
        return self.n * self.n + k

    def _unknown(self, var: int) -> Poly:
        if var in self.pinned:
            return Poly.const(self.pinned[var])
        return Poly.var(var)

    def _symbolic_table(self) -> Dict[Tuple[int, int], Element]:
        n = self.n
        tab: Dict[Tuple[int, int], Element] = {}
        for (i, j), val in self.nilradical.table.items():
            tab[(i, j)] = {k: Poly.const(c) for k, c in val.items()}
        d = self.right_action
        for i in range(n):
            col = {k: Poly.const(d.rows[k][i]) for k in range(n) if d.rows[k][i]}
            if col:
                tab[(i, n)] = col
            left = {k: self._unknown(self.left_var(i, k)) for k in range(n)}
            left = {k: p for k, p in left.items() if p}
            if left:
                tab[(n, i)] = left
        sq = {k: self._unknown(self.square_var(k)) for k in range(n)}
        sq = {k: p for k, p in sq.items() if p}
        if sq:
            tab[(n, n)] = sq
        return tab

    def bracket(self, u: Element, v: Element) -> Element:
        out: Element = {}
        for a, pa in u.items():
            for b, pb in v.items():
                prod = self._table.get((a, b))
                if not prod:
                    continue
                coef = pa * pb
                if not coef:
                    continue
                _elem_add(out, {k: coef * p for k, p in prod.items()})
        return out

    def basis_element(self, i: int) -> Element:
        return {i: Poly.const(Fraction(1))}

    def leibniz(self, i: int, j: int, k: int) -> Element:
        """LI(E_i, E_j, E_k) with E_n = x."""
        u, v, w = self.basis_element(i), self.basis_element(j), self.basis_element(k)
        out: Element = {}
        _elem_add(out, self.bracket(u, self.bracket(v, w)))
        _elem_add(out, self.bracket(self.bracket(u, v), w), -1)
        _elem_add(out, self.bracket(self.bracket(u, w), v))
        return out

    def linear_triples(self) -> List[Tuple[int, int, int]]:
        n, x = self.n, self.n
        out = []
        for i in range(n):
            for j in range(n):
                out += [(i, j, x), (i, x, j), (x, i, j)]
            out += [(x, i, x), (i, x, x)]
        return out

    def quadratic_triples(self) -> List[Tuple[int, int, int]]:
        x = self.n
        return [(x, x, i) for i in range(self.n)] + [(x, x, x)]

    def triple_label(self, t: Tuple[int, int, int]) -> str:
        return "LI(" + ",".join("x" if a == self.n else f"e{a + 1}" for a in t) + ")"


@dataclass
class LinearSystem:
    ncols: int
    rows: List[SparseRow]
    rhs: List[Scalar]
    origins: List[str]

    def matrix(self) -> Matrix:
        return Matrix.from_sparse(len(self.rows), self.ncols, self.rows) if self.rows else Matrix.zeros(1, self.ncols)


def completion_system(p: ExtensionProblem) -> LinearSystem:
    """Affine system A u = b from every Leibniz triple that is linear in the unknowns."""
    rows: List[SparseRow] = []
    rhs: List[Scalar] = []
    origins: List[str] = []
    for t in p.linear_triples():
        li = p.leibniz(*t)
        for k, poly in sorted(li.items()):
            if poly.degree > 1:
                raise AssertionError(f"{p.triple_label(t)} is not linear")
            row = {m[0]: c for m, c in poly.terms.items() if len(m) == 1}
            const = poly.terms.get((), 0)
            rows.append(row)
            rhs.append(-const)
            origins.append(f"{p.triple_label(t)}[e{k + 1}]")
    return LinearSystem(p.num_unknowns, rows, rhs, origins)


@dataclass
class ExtensionSolution:
    problem: ExtensionProblem
    particular: Tuple[Scalar, ...]
    homogeneous: Subspace

    @property
    def free_params(self) -> List[int]:
        """Free unknowns: one coordinate per homogeneous basis vector."""
        return self._free

    def __post_init__(self):
        self._free = self._find_free()

    def _find_free(self) -> List[int]:
        # homogeneous solutions come from the RREF nullspace: for free column f
        # the vector has 1 at f and zero at every other free column
        basis = self.homogeneous.basis
        free = []
        for t in range(self.problem.num_unknowns):
            col = [v[t] for v in basis]
            if sum(1 for c in col if c) == 1 and any(c == 1 for c in col):
                free.append(t)
        if len(free) != len(basis):
            free = _pick_free_columns(basis, self.problem.num_unknowns)
        return free

    @property
    def free_names(self) -> List[str]:
        return [self.problem.names[t] for t in self.free_params]

    def affine_images(self) -> Dict[int, Poly]:
        """Every unknown as an affine polynomial in the free unknowns."""
        free = self.free_params
        coords = _coordinates_on(self.homogeneous.basis, free)
        images: Dict[int, Poly] = {}
        for t in range(self.problem.num_unknowns):
            if t in self.problem.pinned:
                images[t] = Poly.const(self.problem.pinned[t])
                continue
            poly = Poly.const(self.particular[t])
            for f, vec in zip(free, coords):
                if vec[t]:
                    poly = poly + Poly.var(f).scale(vec[t])
            images[t] = poly
        return images

    def values(self, assignment: Mapping[str, Scalar]) -> Dict[int, Scalar]:
        """Full unknown vector for given values of the free parameters (default 0)."""
        free = {self.problem.index[k]: Fraction(v) if not hasattr(v, "im") else v
                for k, v in assignment.items()}
        for t in free:
            if t not in self.free_params:
                raise ValueError(f"{self.problem.names[t]} is not a free parameter")
        images = self.affine_images()
        return {t: poly.evaluate(free) for t, poly in images.items()}

    def contains(self, unknowns: Mapping[int, Scalar]) -> bool:
        """Is the full unknown vector (missing entries zero) in the linear solution set?"""
        vec = [unknowns.get(t, 0) for t in range(self.problem.num_unknowns)]
        diff = [a - b for a, b in zip(vec, self.particular)]
        return self.homogeneous.contains(diff) and all(
            vec[t] == v for t, v in self.problem.pinned.items())

    def algebra(self, assignment: Mapping[str, Scalar] = None, name: str = "") -> Algebra:
        return extension_algebra(self.problem, self.values(assignment or {}), name)

    def complete(self, assignment: Mapping[str, Scalar] = None) -> Dict[int, Scalar]:
        """Pin some free parameters and solve the quadratic residuals for the rest.

        After pinning, residuals that are affine in the remaining parameters
        are solved exactly (remaining freedom set to zero); anything still
        quadratic is evaluated at zero. Raises Inconsistent if no completion
        of that shape exists.
        """
        pins = {self.problem.index[k]: Fraction(v) for k, v in (assignment or {}).items()}
        for t in pins:
            if t not in self.free_params:
                raise ValueError(f"{self.problem.names[t]} is not a free parameter")
        images = {t: Poly.const(v) for t, v in pins.items()}
        residuals = [r.poly.substitute(images) for r in quadratic_residuals(self.problem, self)]
        rest = [t for t in self.free_params if t not in pins]
        linear = [r for r in residuals if r.degree <= 1]
        col = {t: c for c, t in enumerate(rest)}
        rows = [{col[m[0]]: c for m, c in r.terms.items() if m} for r in linear]
        rhs = [-r.terms.get((), 0) for r in linear]
        sol, _ = solve_affine((len(rest), rows), rhs) if rows else ((Fraction(0),) * len(rest), None)
        full = dict(pins)
        full.update({t: sol[c] for t, c in col.items()})
        if any(r.evaluate(full) for r in residuals):
            raise Inconsistent("pinned parameters admit no Leibniz completion")
        images = self.affine_images()
        return {t: poly.evaluate(full) for t, poly in images.items()}


def _pick_free_columns(basis, ncols) -> List[int]:
    # fall back: greedy columns making the coordinate matrix invertible
    chosen: List[int] = []
    for t in range(ncols):
        trial = chosen + [t]
        if Matrix([[v[c] for c in trial] for v in basis], len(trial)).rank() == len(trial):
            chosen = trial
        if len(chosen) == len(basis):
            break
    return chosen


def _coordinates_on(basis, free) -> List[Tuple[Scalar, ...]]:
    """Re-express the basis so that vector f has 1 at free[f] and 0 at the other free columns."""
    if not basis:
        return []
    m = Matrix([[v[c] for c in free] for v in basis], len(free))
    inv = m.inverse()
    # rows of inv^T combine the basis vectors
    out = []
    for f in range(len(free)):
        coeffs = [inv.rows[b][f] for b in range(len(basis))]
        out.append(tuple(sum((c * v[t] for c, v in zip(coeffs, basis)), Fraction(0))
                         for t in range(len(basis[0]))))
    return out


def solve_extension(p: ExtensionProblem) -> ExtensionSolution:
    """Linear stage. Raises Inconsistent when no left products fit."""
    system = completion_system(p)
    rows, rhs = list(system.rows), list(system.rhs)
    for t, v in p.pinned.items():
        rows.append({t: Fraction(1)})
        rhs.append(v)
    particular, hom = solve_affine((system.ncols, rows), rhs)
    return ExtensionSolution(p, particular, hom)


@dataclass
class Residual:
    triple: str
    component: int
    poly: Poly


def quadratic_residuals(p: ExtensionProblem, s: ExtensionSolution) -> List[Residual]:
    """LI(x,x,e_i) and LI(x,x,x) over the free parameters of the linear solution.

    Zero residuals are dropped, so an empty list means every member of the
    affine family is a Leibniz algebra.
    """
    images = s.affine_images()
    out = []
    for t in p.quadratic_triples():
        li = p.leibniz(*t)
        for k, poly in sorted(li.items()):
            r = poly.substitute(images)
            if r:
                if r.degree > 2:
                    raise AssertionError("residual of degree above 2")
                out.append(Residual(p.triple_label(t), k, r))
    return out


def extension_algebra(p: ExtensionProblem, unknowns: Mapping[int, Scalar], name: str = "") -> Algebra:
    """The (n+1)-dimensional algebra N + <x> for concrete unknown values."""
    n = p.n
    table: Dict[Tuple[int, int], Dict[int, Scalar]] = {
        k: dict(v) for k, v in p.nilradical.table.items()}
    d = p.right_action
    for i in range(n):
        col = {k: d.rows[k][i] for k in range(n) if d.rows[k][i]}
        if col:
            table[(i, n)] = col
        left = {k: unknowns.get(p.left_var(i, k), 0) for k in range(n)}
        left = {k: c for k, c in left.items() if c}
        if left:
            table[(n, i)] = left
    sq = {k: unknowns.get(p.square_var(k), 0) for k in range(n)}
    sq = {k: c for k, c in sq.items() if c}
    if sq:
        table[(n, n)] = sq
    labels = list(p.nilradical.labels) + ["x"]
    return Algebra(n + 1, table, labels, p.nilradical.field, name)


def unknowns_from_algebra(p: ExtensionProblem, r: Algebra) -> Dict[int, Scalar]:
    """Read [x, e_i] and [x, x] off an (n+1)-dimensional table whose last vector is x."""
    n = p.n
    if r.dim != n + 1:
        raise ValueError("extension must have dimension n + 1")
    out: Dict[int, Scalar] = {}
    for i in range(n):
        for k, c in r.bracket(n, i).items():
            if k == n:
                raise ValueError("[x, e_i] leaves the nilradical")
            out[p.left_var(i, k)] = c
    for k, c in r.bracket(n, n).items():
        if k == n:
            raise ValueError("[x, x] leaves the nilradical")
        out[p.square_var(k)] = c
    return out


# ---------------------------------------------------------------------------
# certification


class NotAnIdeal(ValueError):
    pass


@dataclass
class ExtensionReport:
    ideal: bool = False
    codim_one: bool = False
    leibniz: bool = False
    nilradical_nilpotent: bool = False
    solvable: bool = False
    non_nilpotent: bool = False
    rx_derivation: bool = False
    rx_non_nilpotent: bool = False
    complement: Optional[int] = None
    notes: List[str] = field(default_factory=list)

    FLAGS = ("ideal", "codim_one", "leibniz", "nilradical_nilpotent", "solvable",
             "non_nilpotent", "rx_derivation", "rx_non_nilpotent")

    @property
    def ok(self) -> bool:
        return all(getattr(self, f) for f in self.FLAGS)

    @property
    def is_nilradical(self) -> bool:
        # a nilpotent ideal of codimension one in a non-nilpotent algebra is maximal
        return self.ideal and self.codim_one and self.nilradical_nilpotent and self.non_nilpotent

    def as_dict(self) -> Dict[str, bool]:
        out = {f: getattr(self, f) for f in self.FLAGS}
        out["is_nilradical"] = self.is_nilradical
        out["ok"] = self.ok
        return out


def verify_solvable_extension(r: Algebra, n_sub: Subspace) -> ExtensionReport:
    """Certify r as a solvable extension of the nilpotent ideal n_sub."""
    if n_sub.ambient != r.dim:
        raise ValueError("subspace ambient dimension differs from the algebra")
    if not is_ideal(r, n_sub):
        raise NotAnIdeal("the candidate nilradical is not a two-sided ideal")
    rep = ExtensionReport(ideal=True)
    rep.codim_one = n_sub.dim == r.dim - 1
    rep.leibniz = leibniz_residual(r).ok
    prof = series(r)
    rep.solvable = prof.solvable
    rep.non_nilpotent = not prof.nilpotent
    nil = restrict(r, n_sub)
    rep.nilradical_nilpotent = is_nilpotent(nil)
    x = next((i for i in range(r.dim) if not n_sub.contains(r.basis_vector(i))), None)
    if x is None:
        rep.notes.append("no complement: the subspace is the whole algebra")
        return rep
    rep.complement = x
    cols = []
    for v in n_sub.basis:
        img = multiply(r, v, r.basis_vector(x))
        cols.append(n_sub.coordinates(img))
    rx = Matrix.from_columns(cols, n_sub.dim)
    rep.rx_derivation = not derivation_defect(nil, rx)
    rep.rx_non_nilpotent = not is_nilpotent_derivation(rx)
    if not rep.rx_non_nilpotent:
        rep.notes.append("R_x restricted to the ideal is nilpotent")
    return rep


def nilradical_subspace(r: Algebra, x_index: Optional[int] = None) -> Subspace:
    """Span of every basis vector except x (default: the last one)."""
    x_index = r.dim - 1 if x_index is None else x_index
    return Subspace.span_of_basis_vectors(r.dim, [i for i in range(r.dim) if i != x_index])
