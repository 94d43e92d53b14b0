"""Derivation spaces, nilpotency of derivations and the diagonal-projection rank.

A derivation D is stored as an n x n matrix whose column j is D(e_j), and is
flattened row-major (entry (k, j) -> k*n + j) when it lives in a Subspace.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import Algebra, sparse_bracket
from .exactla import Matrix, Scalar, SparseRow, Subspace, nullspace

Coord = Tuple[int, int]


@dataclass
class DerivationSpace:
    n: int
    space: Subspace

    @property
    def dim(self) -> int:
        return self.space.dim

    def basis(self) -> List[Matrix]:
        return [unflatten(v, self.n) for v in self.space.basis]

    def contains(self, d: Matrix) -> bool:
        return self.space.contains(flatten(d))

    def combination(self, coeffs: Sequence[Scalar]) -> Matrix:
        vec = [Fraction(0)] * (self.n * self.n)
        for c, v in zip(coeffs, self.space.basis):
            if c:
                for idx, x in enumerate(v):
                    if x:
                        vec[idx] += c * x
        return unflatten(vec, self.n)


def flatten(d: Matrix) -> Tuple[Scalar, ...]:
    return tuple(x for row in d.rows for x in row)


def unflatten(v: Sequence[Scalar], n: int) -> Matrix:
    return Matrix([v[k * n:(k + 1) * n] for k in range(n)], n)


def derivation_equations(alg: Algebra) -> List[SparseRow]:
    """Rows of D([e_i,e_j]) - [D e_i, e_j] - [e_i, D e_j] = 0 in the n^2 unknowns."""
    n = alg.dim
    tab = alg.table
    right_of: Dict[int, List[Tuple[int, SparseRow]]] = {}   # j -> [(a, [e_a, e_j])]
    left_of: Dict[int, List[Tuple[int, SparseRow]]] = {}    # i -> [(b, [e_i, e_b])]
    for (a, b), val in tab.items():
        right_of.setdefault(b, []).append((a, val))
        left_of.setdefault(a, []).append((b, val))
    rows: List[SparseRow] = []
    for i in range(n):
        for j in range(n):
            eq: Dict[int, SparseRow] = {}
            for m, c in tab.get((i, j), {}).items():
                for k in range(n):
                    r = eq.setdefault(k, {})
                    r[k * n + m] = r.get(k * n + m, 0) + c
            for a, val in right_of.get(j, ()):
                for k, c in val.items():
                    r = eq.setdefault(k, {})
                    r[a * n + i] = r.get(a * n + i, 0) - c
            for b, val in left_of.get(i, ()):
                for k, c in val.items():
                    r = eq.setdefault(k, {})
                    r[b * n + j] = r.get(b * n + j, 0) - c
            rows.extend(r for r in eq.values() if any(r.values()))
    return rows


def derivation_space(alg: Algebra) -> DerivationSpace:
    n = alg.dim
    return DerivationSpace(n, nullspace((n * n, derivation_equations(alg))))


def derivation_defect(alg: Algebra, d: Matrix) -> Dict[Coord, SparseRow]:
    """Nonzero values of D([e_i,e_j]) - [D e_i, e_j] - [e_i, D e_j]."""
    n = alg.dim
    cols = [{k: d.rows[k][j] for k in range(n) if d.rows[k][j]} for j in range(n)]
    out = {}
    for i in range(n):
        for j in range(n):
            acc: SparseRow = {}
            for m, c in alg.bracket(i, j).items():
                for k, v in cols[m].items():
                    acc[k] = acc.get(k, 0) + c * v
            for k, v in sparse_bracket(alg, cols[i], {j: 1}).items():
                acc[k] = acc.get(k, 0) - v
            for k, v in sparse_bracket(alg, {i: 1}, cols[j]).items():
                acc[k] = acc.get(k, 0) - v
            acc = {k: v for k, v in acc.items() if v}
            if acc:
                out[(i, j)] = acc
    return out


def is_derivation(alg: Algebra, d: Matrix) -> bool:
    return not derivation_defect(alg, d)


def is_nilpotent_derivation(d: Matrix) -> bool:
    if d.nrows != d.ncols:
        raise ValueError("derivation matrix must be square")
    return (d ** d.nrows).is_zero()


def commutator(d1: Matrix, d2: Matrix) -> Matrix:
    return d1 @ d2 - d2 @ d1


# ---------------------------------------------------------------------------
# diagonal projection


def family_diag_coords(family: str, n: int) -> List[Coord]:
    """Coordinates carrying the semisimple part of a derivation.

    L-family: d(e1).e1 and d(e_{n-1}).e_{n-1};  G-family: d(e1).e1 and d(e3).e3.
    """
    if family == "L":
        return [(0, 0), (n - 2, n - 2)]
    if family == "G":
        return [(0, 0), (2, 2)]
    raise ValueError(f"unknown family {family!r}")


def projection_matrix(der: DerivationSpace, diag_coords: Sequence[Coord]) -> Matrix:
    n = der.n
    idx = [k * n + j for k, j in diag_coords]
    if not der.dim:
        return Matrix.zeros(1, len(idx))
    return Matrix([[v[t] for t in idx] for v in der.space.basis], len(idx))


def nil_independent_rank(alg: Algebra, diag_coords: Sequence[Coord],
                         der: Optional[DerivationSpace] = None) -> int:
    """Rank of the projection of Der(alg) onto the chosen matrix coordinates."""
    der = der or derivation_space(alg)
    return projection_matrix(der, diag_coords).rank()


def zero_projection_subspace(der: DerivationSpace, diag_coords: Sequence[Coord]) -> List[Matrix]:
    """Basis of the derivations whose selected coordinates all vanish."""
    if not der.dim:
        return []
    proj = projection_matrix(der, diag_coords)
    # coefficient vectors c with c . proj = 0
    kernel = nullspace(proj.transpose())
    return [der.combination(c) for c in kernel.basis]


@dataclass
class NilpotencyCheck:
    zero_projection_nilpotent: bool
    nonzero_projection_non_nilpotent: bool
    samples: int

    @property
    def ok(self) -> bool:
        return self.zero_projection_nilpotent and self.nonzero_projection_non_nilpotent


def check_projection_nilpotency(alg: Algebra, diag_coords: Sequence[Coord], samples: int = 5,
                                seed: int = 0, der: Optional[DerivationSpace] = None) -> NilpotencyCheck:
    """Guard for the coordinate choice behind nil_independent_rank.

    Zero-projection derivations (each kernel basis element plus random
    combinations) must be nilpotent; random derivations with nonzero
    projection must not be.
    """
    der = der or derivation_space(alg)
    rng = random.Random(seed)
    kernel = zero_projection_subspace(der, diag_coords)
    zero_ok = all(is_nilpotent_derivation(d) for d in kernel)
    n = der.n
    for _ in range(samples if kernel else 0):
        comb = Matrix.zeros(n, n)
        for d in kernel:
            comb = comb + d.scale(Fraction(rng.randint(-9, 9)))
        zero_ok = zero_ok and is_nilpotent_derivation(comb)
    nonzero_ok = True
    tried = 0
    while tried < samples and der.dim:
        coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(der.dim)]
        d = der.combination(coeffs)
        if all(d.rows[k][j] == 0 for k, j in diag_coords):
            continue
        tried += 1
        nonzero_ok = nonzero_ok and not is_nilpotent_derivation(d)
    return NilpotencyCheck(zero_ok, nonzero_ok, samples)


# ---------------------------------------------------------------------------
# parametric derivation forms of the two families


@dataclass
class ParametricForm:
    """Derivations written as matrices whose entries are linear in named parameters.

    entries[(k, j)] is the coefficient of e_k in d(e_j) as {param index: coeff};
    constraints are linear forms that must vanish.
    """

    n: int
    names: List[str]
    entries: Dict[Coord, Dict[int, Scalar]] = field(default_factory=dict)
    constraints: List[Dict[int, Scalar]] = field(default_factory=list)

    def add(self, k: int, j: int, terms: Dict[int, Scalar]) -> None:
        slot = self.entries.setdefault((k - 1, j - 1), {})
        for p, c in terms.items():
            slot[p] = slot.get(p, 0) + c

    def require(self, terms: Dict[int, Scalar]) -> None:
        terms = {p: c for p, c in terms.items() if c}
        if terms:
            self.constraints.append(terms)

    def matrix(self, values: Sequence[Scalar]) -> Matrix:
        n = self.n
        rows = [[Fraction(0)] * n for _ in range(n)]
        for (k, j), terms in self.entries.items():
            rows[k][j] = sum((c * values[p] for p, c in terms.items()), Fraction(0))
        return Matrix(rows, n)

    def parameter_space(self) -> Subspace:
        """Parameter vectors satisfying every constraint."""
        return nullspace((len(self.names), self.constraints))

    def matrix_space(self) -> Subspace:
        n = self.n
        return Subspace(n * n, [flatten(self.matrix(v)) for v in self.parameter_space().basis])

    def free_parameter_count(self) -> int:
        return self.matrix_space().dim


def _ab_names(n: int) -> Tuple[List[str], callable, callable]:
    names = [f"a{t}" for t in range(1, n + 1)] + [f"b{t}" for t in range(2, n + 1)]

    def a(t):
        return t - 1

    def b(t):
        return n + t - 2

    return names, a, b


def parametric_form_L(n: int, alpha, beta, gamma) -> ParametricForm:
    al, be, ga = Fraction(alpha), Fraction(beta), Fraction(gamma)
    names, a, b = _ab_names(n)
    f = ParametricForm(n, names)
    for t in range(1, n + 1):
        f.add(t, 1, {a(t): 1})
    f.add(2, 2, {a(1): 2, a(n - 1): al})
    for t in range(3, n - 1):
        f.add(t, 2, {a(t - 1): 1})
    f.add(n, 2, {a(n - 1): 1 + be})
    for i in range(3, n - 1):
        f.add(i, i, {a(1): i, a(n - 1): al})
        for t in range(i + 1, n - 1):
            f.add(t, i, {a(t - i + 1): 1})
    for t in range(2, n + 1):
        f.add(t, n - 1, {b(t): 1})
    f.add(n - 2, n, {b(n - 3): 1, a(n - 3): -al})
    f.add(n, n, {b(n - 1): 1, a(1): 1, a(n - 1): ga - al * (1 + be)})
    for i in range(2, n - 3):
        f.require({b(i): 1, a(i): -al})
    f.require({b(n - 3): be, a(n - 3): -al * be})
    f.require({b(n - 3): ga, a(n - 3): -al * ga})
    f.require({b(n - 1): al, a(1): -al, a(n - 1): -al * al})
    f.require({b(n - 1): ga, a(1): -ga, a(n - 1): -ga * (ga - al * (1 + be))})
    f.require({a(n - 1): ga - be * (ga - al * (1 + be))})
    return f


def parametric_form_G(n: int, alpha, beta, gamma, odd_b_vanish: bool = False) -> ParametricForm:
    """Derivation form of G(alpha, beta, gamma).

    odd_b_vanish adds b_(2k+1) = 0 for 2 <= k <= (n-3)/2, the extra relation
    used for the alpha = 1 nilradicals of the solvable classification.
    """
    al, be, ga = Fraction(alpha), Fraction(beta), Fraction(gamma)
    names, a, b = _ab_names(n)
    sgn_n = (-1) ** n
    f = ParametricForm(n, names)
    for t in range(1, n + 1):
        f.add(t, 1, {a(t): 1})
    f.add(2, 2, {a(1): 2, a(3): be})
    for t in range(2, n + 1):
        f.add(t, 3, {b(t): 1})
    f.add(2, 4, {a(3): ga})
    f.add(4, 4, {a(1): 1, b(3): 1})
    for t in range(5, n):
        f.add(t, 4, {b(t - 1): 1})
    f.add(n, 4, {b(n - 1): 1, a(n - 1): -al})
    for i in range(5, n):
        f.add(i, i, {a(1): i - 3, b(3): 1})
        for t in range(i + 1, n):
            f.add(t, i, {b(t - i + 3): 1})
        f.add(n, i, {b(n - i + 3): 1, a(n - i + 3): -((-1) ** i) * al})
    f.add(n, n, {a(1): n - 3, b(3): 1, a(3): -sgn_n * al})
    f.require({a(3): 2 * ga - be * be, b(3): be, a(1): -be})
    f.require({a(n - 1): (1 + sgn_n) * al})
    f.require({b(3): 2 * ga, a(1): -2 * ga, a(3): -ga * be})
    f.require({b(3): al, a(1): -al, a(3): sgn_n * al * al})
    if odd_b_vanish:
        for k in range(2, (n - 3) // 2 + 1):
            f.require({b(2 * k + 1): 1})
    return f


@dataclass
class FormReport:
    family: str
    params: Tuple[Fraction, Fraction, Fraction]
    n: int
    dim_der: int
    free_parameters: int
    inclusion_ok: bool
    witness: Optional[Matrix] = None
    grid_samples: int = 0

    @property
    def ok(self) -> bool:
        return self.inclusion_ok and self.dim_der == self.free_parameters


GRID = (Fraction(-2), Fraction(-1), Fraction(0), Fraction(1), Fraction(2), Fraction(1, 2))


def check_parametric_form(alg: Algebra, family: str, alpha, beta, gamma, samples: int = 12,
                          seed: int = 0, odd_b_vanish: bool = False,
                          der: Optional[DerivationSpace] = None) -> FormReport:
    """Compare Der(alg) with the family's parametric derivation form.

    (a) every sampled instance of the form (free parameters drawn from GRID),
        and every basis element of its span, lies in Der(alg);
    (b) dim Der(alg) equals the number of independent parameters.
    """
    n = alg.dim
    if family == "L":
        form = parametric_form_L(n, alpha, beta, gamma)
    elif family == "G":
        form = parametric_form_G(n, alpha, beta, gamma, odd_b_vanish)
    else:
        raise ValueError(f"unknown family {family!r}")
    der = der or derivation_space(alg)
    pspace = form.parameter_space()
    witness = None
    for v in pspace.basis:
        m = form.matrix(v)
        if not der.contains(m):
            witness = m
            break
    rng = random.Random(seed)
    count = 0
    if witness is None and pspace.dim:
        for _ in range(samples):
            coeffs = [rng.choice(GRID) for _ in range(pspace.dim)]
            vals = [sum((c * v[t] for c, v in zip(coeffs, pspace.basis)), Fraction(0))
                    for t in range(len(form.names))]
            m = form.matrix(vals)
            count += 1
            if not der.contains(m):
                witness = m
                break
    return FormReport(family, (Fraction(alpha), Fraction(beta), Fraction(gamma)), n, der.dim,
                      form.free_parameter_count(), witness is None, witness, count)


# ---------------------------------------------------------------------------
# complement-dimension table


@dataclass(frozen=True)
class Table1Row:
    """One row: family, (alpha, beta, gamma), claimed dim Q and whether it is a bound."""

    label: str
    family: str
    params: Tuple[Fraction, Fraction, Fraction]
    dim_q: int
    upper_bound: bool

    @property
    def needs_odd_n(self) -> bool:
        return self.family == "G" and self.params[0] == 1

    def applies(self, n: int) -> bool:
        return n % 2 == 1 or not self.needs_odd_n


def _row(label, family, params, dim_q, bound):
    return Table1Row(label, family, tuple(Fraction(p) for p in params), dim_q, bound)


# parametric rows are instantiated at one admissible value (beta = 1, gamma = 3)
TABLE1 = (
    _row("L(0,beta,0)", "L", (0, 1, 0), 2, True),
    _row("L(0,0,1)", "L", (0, 0, 1), 1, False),
    _row("L(0,1,1)", "L", (0, 1, 1), 2, True),
    _row("L(1,-1,0)", "L", (1, -1, 0), 2, True),
    _row("L(1,0,0)", "L", (1, 0, 0), 2, True),
    _row("L(1,1,0)", "L", (1, 1, 0), 1, False),
    _row("L(1,0,gamma)", "L", (1, 0, 3), 1, False),
    _row("L(1,1,1)", "L", (1, 1, 1), 1, False),
    _row("L(1,2,4)", "L", (1, 2, 4), 1, False),
    _row("G(0,0,0)", "G", (0, 0, 0), 2, True),
    _row("G(0,1,0)", "G", (0, 1, 0), 2, True),
    _row("G(0,0,1)", "G", (0, 0, 1), 1, False),
    _row("G(0,2,1)", "G", (0, 2, 1), 2, True),
    _row("G(1,0,0)", "G", (1, 0, 0), 2, True),
    _row("G(1,1,0)", "G", (1, 1, 0), 2, True),
    _row("G(1,2,0)", "G", (1, 2, 0), 1, False),
    _row("G(1,0,gamma)", "G", (1, 0, 3), 1, False),
    _row("G(1,-2,1)", "G", (1, -2, 1), 1, False),
    _row("G(1,2,1)", "G", (1, 2, 1), 2, True),
    _row("G(1,4,2)", "G", (1, 4, 2), 1, False),
)


@dataclass
class Table1Result:
    row: Table1Row
    n: int
    rank: int
    nilpotency: NilpotencyCheck

    @property
    def ok(self) -> bool:
        return self.rank == self.row.dim_q and self.nilpotency.ok


def check_table1_row(row: Table1Row, n: int, seed: int = 0) -> Table1Result:
    from .catalog import family_G, family_L
    build = family_L if row.family == "L" else family_G
    alg = build(n, *row.params)
    der = derivation_space(alg)
    coords = family_diag_coords(row.family, n)
    return Table1Result(row, n, nil_independent_rank(alg, coords, der),
                        check_projection_nilpotency(alg, coords, seed=seed, der=der))
