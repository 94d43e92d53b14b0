"""Constructors for the quasi-filiform families, their aliases and solvable extensions."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Tuple

from .algebra import Algebra, leibniz_residual
from .exactla import Scalar, parse_scalar

Brackets = Dict[Tuple[int, int], Dict[int, Scalar]]


class CatalogError(ValueError):
    pass


def _put(br: Brackets, i: int, j: int, terms: Mapping[int, Scalar]) -> None:
    row = br.setdefault((i, j), {})
    for k, c in terms.items():
        row[k] = row.get(k, 0) + c


def _q(v) -> Fraction:
    return parse_scalar(v) if isinstance(v, str) else Fraction(v)


def _need_n(n: int, minimum: int = 6) -> None:
    if not isinstance(n, int) or n < minimum:
        raise CatalogError(f"dimension n={n} must be an integer >= {minimum}")


def _certified(n: int, br: Brackets, name: str) -> Algebra:
    alg = Algebra.from_brackets(n, br, name=name)
    report = leibniz_residual(alg)
    if not report.ok:
        raise CatalogError(f"{name}: {report.summary()}")
    alg.leibniz_checked = True
    return alg


# ---------------------------------------------------------------------------
# nilpotent families


def mu1(n: int) -> Algebra:
    _need_n(n)
    br: Brackets = {}
    for i in range(1, n - 2):
        _put(br, i, 1, {i + 1: 1})
    _put(br, 1, n - 1, {n: 1})
    return _certified(n, br, f"mu1_{n}")


def mu2(n: int) -> Algebra:
    _need_n(n)
    br: Brackets = {}
    for i in range(1, n - 2):
        _put(br, i, 1, {i + 1: 1})
    _put(br, 1, n - 1, {2: 1, n: 1})
    for i in range(2, n - 2):
        _put(br, i, n - 1, {i + 1: 1})
    return _certified(n, br, f"mu2_{n}")


def family_L(n: int, alpha=0, beta=0, gamma=0) -> Algebra:
    """Type I family L(alpha, beta, gamma)."""
    _need_n(n)
    a, b, g = _q(alpha), _q(beta), _q(gamma)
    br: Brackets = {}
    for i in range(1, n - 2):
        _put(br, i, 1, {i + 1: 1})
    _put(br, n - 1, 1, {n: 1, 2: a})
    _put(br, 1, n - 1, {n: b})
    _put(br, n - 1, n - 1, {n: g})
    return _certified(n, br, f"L_{n}({a},{b},{g})")


def family_G(n: int, alpha=0, beta=0, gamma=0) -> Algebra:
    """Type II family G(alpha, beta, gamma); alpha = 1 only in odd dimension."""
    _need_n(n)
    a, b, g = _q(alpha), _q(beta), _q(gamma)
    if n % 2 == 0 and a != 0:
        raise CatalogError(f"G(alpha,beta,gamma) in even dimension n={n} requires alpha=0")
    if n % 2 == 1 and a not in (0, 1):
        raise CatalogError(f"G(alpha,beta,gamma) in odd dimension requires alpha in {{0,1}}, got {a}")
    br: Brackets = {}
    _put(br, 1, 1, {2: 1})
    for i in range(3, n):
        _put(br, i, 1, {i + 1: 1})
    _put(br, 1, 3, {4: -1, 2: b})
    for i in range(4, n):
        _put(br, 1, i, {i + 1: -1})
    _put(br, 3, 3, {2: g})
    for i in range(3, n):
        _put(br, i, n + 2 - i, {n: (-1) ** i * a})
    return _certified(n, br, f"G_{n}({a},{b},{g})")


# ---------------------------------------------------------------------------
# the classification lists written out directly from their own tables


def _type_one_named(index: int, n: int, beta=0, gamma=0) -> Algebra:
    b, g = _q(beta), _q(gamma)
    br: Brackets = {}
    for i in range(1, n - 2):
        _put(br, i, 1, {i + 1: 1})
    if index == 1:
        _put(br, n - 1, 1, {n: 1})
        _put(br, 1, n - 1, {n: b})
    elif index == 2:
        if b not in (0, 1):
            raise CatalogError("L^{2,beta} needs beta in {0,1}")
        _put(br, n - 1, 1, {n: 1})
        _put(br, 1, n - 1, {n: b})
        _put(br, n - 1, n - 1, {n: 1})
    elif index == 3:
        if b not in (-1, 0, 1):
            raise CatalogError("L^{3,beta} needs beta in {-1,0,1}")
        _put(br, n - 1, 1, {n: 1, 2: 1})
        _put(br, 1, n - 1, {n: b})
    elif index == 4:
        if g == 0:
            raise CatalogError("L^{4,gamma} needs gamma != 0")
        _put(br, n - 1, 1, {n: 1, 2: 1})
        _put(br, n - 1, n - 1, {n: g})
    elif index == 5:
        if (b, g) not in ((1, 1), (2, 4)):
            raise CatalogError("L^{5,beta,gamma} needs (beta,gamma) in {(1,1),(2,4)}")
        _put(br, n - 1, 1, {n: 1, 2: 1})
        _put(br, 1, n - 1, {n: b})
        _put(br, n - 1, n - 1, {n: g})
    else:
        raise CatalogError(f"no type I algebra L^{index}")
    return Algebra.from_brackets(n, br, name=f"L^{index}_{n}")


def _type_two_named(index: int, n: int, beta=0, gamma=0) -> Algebra:
    b, g = _q(beta), _q(gamma)
    if index >= 5 and n % 2 == 0:
        raise CatalogError(f"type II algebra L^{index} exists only for odd n")
    br: Brackets = {}
    _put(br, 1, 1, {2: 1})
    for i in range(3, n):
        _put(br, i, 1, {i + 1: 1})
    # index -> (coefficient of e2 in [e1,e3], [e3,e3] coefficient, alternating tail)
    if index == 1:
        e2_13, g33, tail = 0, 0, False
    elif index == 2:
        e2_13, g33, tail = 1, 0, False
    elif index == 3:
        e2_13, g33, tail = 0, 1, False
    elif index == 4:
        e2_13, g33, tail = 2, 1, False
    elif index == 5:
        e2_13, g33, tail = 0, 0, True
    elif index == 6:
        if b not in (1, 2):
            raise CatalogError("L^{6,beta} needs beta in {1,2}")
        e2_13, g33, tail = b, 0, True
    elif index == 7:
        if g == 0:
            raise CatalogError("L^{7,gamma} needs gamma != 0")
        e2_13, g33, tail = 0, g, True
    elif index == 8:
        if (b, g) not in ((-2, 1), (2, 1), (4, 2)):
            raise CatalogError("L^{8,beta,gamma} needs (beta,gamma) in {(-2,1),(2,1),(4,2)}")
        e2_13, g33, tail = b, g, True
    else:
        raise CatalogError(f"no type II algebra L^{index}")
    _put(br, 1, 3, {2: e2_13, 4: -1})
    for i in range(4, n):
        _put(br, 1, i, {i + 1: -1})
    if g33:
        _put(br, 3, 3, {2: g33})
    if tail:
        for i in range(3, n):
            _put(br, i, n + 2 - i, {n: (-1) ** i})
    return Algebra.from_brackets(n, br, name=f"L^{index}_{n}(II)")


# ---------------------------------------------------------------------------
# aliases


@dataclass(frozen=True)
class FamilySpec:
    """A catalog entry: family tag, dimension of the nilradical, parameters."""

    tag: str
    n: int = 0
    params: Tuple = ()
    extra: Mapping[str, Scalar] = field(default_factory=dict)

    def bind(self, **values) -> "FamilySpec":
        """Substitute symbolic 'beta'/'gamma' placeholders."""
        out = []
        for p in self.params:
            if isinstance(p, str):
                if p not in values:
                    raise CatalogError(f"alias parameter {p} is unbound")
                out.append(_q(values[p]))
            else:
                out.append(p)
        return FamilySpec(self.tag, values.get("n", self.n), tuple(out), dict(self.extra))


# name -> (family, (alpha, beta, gamma) with symbolic placeholders), type, index
_ALIASES = {
    "L^{1,beta}": ("L", (0, "beta", 0), 1, 1),
    "L^{2,beta}": ("L", (0, "beta", 1), 1, 2),
    "L^{3,beta}": ("L", (1, "beta", 0), 1, 3),
    "L^{4,gamma}": ("L", (1, 0, "gamma"), 1, 4),
    "L^{5,beta,gamma}": ("L", (1, "beta", "gamma"), 1, 5),
    "L^1": ("G", (0, 0, 0), 2, 1),
    "L^2": ("G", (0, 1, 0), 2, 2),
    "L^3": ("G", (0, 0, 1), 2, 3),
    "L^4": ("G", (0, 2, 1), 2, 4),
    "L^5": ("G", (1, 0, 0), 2, 5),
    "L^{6,beta}": ("G", (1, "beta", 0), 2, 6),
    "L^{7,gamma}": ("G", (1, 0, "gamma"), 2, 7),
    "L^{8,beta,gamma}": ("G", (1, "beta", "gamma"), 2, 8),
}

ALIAS_NAMES = tuple(_ALIASES)


def _normalize_alias(name: str) -> str:
    s = name.replace(" ", "").replace("\\mathcal", "").replace("_n", "")
    s = s.replace("β", "beta").replace("γ", "gamma").replace("\\beta", "beta").replace("\\gamma", "gamma")
    s = re.sub(r"^L\^(\d)$", r"L^\1", s)
    s = re.sub(r"^L\^\{(\d)\}$", r"L^\1", s)
    return s


def alias(name: str, **values) -> FamilySpec:
    """Canonical FamilySpec for one of the 13 classical names.

    Symbolic parameters stay as the strings 'beta'/'gamma' unless values are
    given, e.g. alias("L^{2,beta}", beta=1).
    """
    key = _normalize_alias(name)
    if key not in _ALIASES:
        raise CatalogError(f"unknown alias {name!r}; known: {', '.join(ALIAS_NAMES)}")
    fam, params, _, _ = _ALIASES[key]
    spec = FamilySpec(fam, values.pop("n", 0), params)
    if values:
        spec = spec.bind(**values)
    return spec


def build_named(name: str, n: int, beta=0, gamma=0) -> Algebra:
    """Build a classical algebra straight from its own multiplication table."""
    key = _normalize_alias(name)
    if key not in _ALIASES:
        raise CatalogError(f"unknown alias {name!r}")
    _, _, kind, index = _ALIASES[key]
    _need_n(n)
    if kind == 1:
        return _type_one_named(index, n, beta, gamma)
    return _type_two_named(index, n, beta, gamma)


# ---------------------------------------------------------------------------
# solvable extensions: nilradical e1..en, complement x = e_(n+1)
#
# R(1,-1,0), R^1..R^5(1,0,0) and H^1..H^5(1,1,0) are the final tables of the
# case analyses. R^6(1,0,0) takes its right action from the general
# derivation display with zero left products. H^6(1,1,0) and H^k(1,2,1) are
# completed by the extension solver from a derivation of the nilradical.

_SOLVABLE_RE = re.compile(r"^([RH])\^?(\d)_?\(?(1m10|1,-1,0|100|1,0,0|110|1,1,0|121|1,2,1)\)?$")
_NILRADICAL_CODE = {"1,-1,0": "1m10", "1,0,0": "100", "1,1,0": "110", "1,2,1": "121"}
_NILRADICAL_PARAMS = {"1m10": ("L", (1, -1, 0)), "100": ("L", (1, 0, 0)),
                      "110": ("G", (1, 1, 0)), "121": ("G", (1, 2, 1))}
_SOLVABLE_COUNT = {"1m10": 2, "100": 6, "110": 6, "121": 7}


def parse_solvable_tag(tag: str) -> Tuple[str, int]:
    """'R1_1m10', 'R(1,-1,0)#1', 'H^6(1,1,0)' -> ('1m10', 1)."""
    s = tag.replace(" ", "").replace("−", "-")
    m = re.match(r"^([RH])\((1,-1,0|1,0,0|1,1,0|1,2,1)\)#(\d)$", s)
    if m:
        letter, code, k = m.group(1), _NILRADICAL_CODE[m.group(2)], int(m.group(3))
    else:
        m = _SOLVABLE_RE.match(s)
        if not m:
            raise CatalogError(f"not a solvable family tag: {tag!r}")
        letter, k, code = m.group(1), int(m.group(2)), _NILRADICAL_CODE.get(m.group(3), m.group(3))
    if (letter == "R") != (code in ("1m10", "100")):
        raise CatalogError(f"{tag!r}: R goes with L(1,-1,0)/L(1,0,0), H with G(1,1,0)/G(1,2,1)")
    if not 1 <= k <= _SOLVABLE_COUNT[code]:
        raise CatalogError(f"{tag!r}: index must be 1..{_SOLVABLE_COUNT[code]}")
    return code, k


def solvable_tags() -> List[str]:
    out = []
    for code, count in _SOLVABLE_COUNT.items():
        letter = "R" if code in ("1m10", "100") else "H"
        out += [f"{letter}{k}_{code}" for k in range(1, count + 1)]
    return out


def _nilradical(code: str, n: int) -> Algebra:
    fam, (a, b, g) = _NILRADICAL_PARAMS[code]
    if fam == "G" and n % 2 == 0:
        raise CatalogError(f"G(1,{b},{g}) needs odd n, got n={n}")
    return family_L(n, a, b, g) if fam == "L" else family_G(n, a, b, g)


def _extend(n: int, nil: Algebra, right: Brackets, left: Brackets, square: Mapping[int, Scalar],
            name: str) -> Algebra:
    """Adjoin x = e_(n+1): right[i] = [e_i, x], left[i] = [x, e_i] (1-based dicts)."""
    br: Brackets = {(i + 1, j + 1): {k + 1: c for k, c in v.items()} for (i, j), v in nil.table.items()}
    x = n + 1
    for i, v in right.items():
        _put(br, i, x, v)
    for i, v in left.items():
        _put(br, x, i, v)
    if square:
        _put(br, x, x, square)
    return Algebra.from_brackets(n + 1, br, name=name)


def _from_matrix(n: int, d) -> Brackets:
    """Right action columns of a derivation matrix as 1-based {i: {k: c}}."""
    out: Brackets = {}
    for j in range(n):
        col = {k + 1: d.rows[k][j] for k in range(n) if d.rows[k][j]}
        if col:
            out[j + 1] = col
    return out


def _form_matrix(form, values: Mapping[str, Scalar]):
    vec = [Fraction(0)] * len(form.names)
    for k, v in values.items():
        if k not in form.names:
            raise CatalogError(f"unknown derivation parameter {k}")
        vec[form.names.index(k)] = _q(v)
    for c in form.constraints:
        if sum((co * vec[p] for p, co in c.items()), Fraction(0)):
            raise CatalogError("derivation parameters violate the derivation constraints")
    return form.matrix(vec)


def _extras(spec_extra: Mapping[str, Scalar], allowed: Mapping[str, Scalar]) -> Dict[str, Fraction]:
    unknown = set(spec_extra) - set(allowed)
    if unknown:
        raise CatalogError(f"unknown parameters {sorted(unknown)}; allowed: {sorted(allowed) or 'none'}")
    out = {k: _q(v) for k, v in allowed.items()}
    out.update({k: _q(v) for k, v in spec_extra.items()})
    return out


def _r_1m10(n: int, k: int, extra) -> Algebra:
    _extras(extra, {})
    nil = _nilradical("1m10", n)
    right = {1: {1: 1, n - 1: -1}, n: {n: 1}}
    for i in range(2, n - 1):
        right[i] = {i: i - 1}
    c2 = 0 if k == 1 else 1
    left = {1: {1: -1, 2: c2, n - 1: 1}, n: {n: -1}}
    return _extend(n, nil, right, left, {}, f"R{k}_{n + 1}(1,-1,0)")


def _r_100_table(n: int, a, c, b3, b2, al) -> Tuple[Brackets, Brackets, Dict[int, Scalar]]:
    """Common table of the a_1 = 1 branch: a = a_(n-1), c = c_(n-1),
    b3 = b_(n-3), b2 = b_(n-2), al = alpha_(n-2); requires a (c - 1) = 0."""
    right: Brackets = {1: {1: 1, n - 1: a}, 2: {2: 2 + a, n: a}}
    for i in range(3, n - 1):
        right[i] = {i: i + a}
    right[n - 1] = {n - 3: b3, n - 2: b2, n - 1: 1 + a}
    right[n] = {n - 2: b3, n: 2}
    left: Brackets = {1: {1: -1, n - 1: c}}
    square = {n - 4: c * b3, n - 3: c * b2, n - 2: al}
    return right, left, square


def _r_100(n: int, k: int, extra) -> Algebra:
    nil = _nilradical("100", n)
    name = f"R{k}_{n + 1}(1,0,0)"
    if k == 1:
        a = _extras(extra, {"a": 1})["a"]
        if a in (4 - n, 3 - n, 2 - n, 0):
            raise CatalogError(f"R1(1,0,0) needs a not in {{4-n, 3-n, 2-n, 0}}, got a={a}")
        parts = _r_100_table(n, a, 1, 0, 0, 0)
    elif k == 2:
        c = _extras(extra, {"c": 0})["c"]
        if c == 1:
            raise CatalogError("R2(1,0,0) needs c != 1")
        parts = _r_100_table(n, 0, c, 0, 0, 0)
    elif k == 3:
        _extras(extra, {})
        parts = _r_100_table(n, 4 - n, 1, 1, 0, 0)
    elif k == 4:
        _extras(extra, {})
        parts = _r_100_table(n, 3 - n, 1, 0, 1, 0)
    elif k == 5:
        _extras(extra, {})
        parts = _r_100_table(n, 2 - n, 1, 0, 0, 1)
    else:
        return _r6_100(n, nil, extra, name)
    return _extend(n, nil, *parts, name)


def _r6_100(n: int, nil: Algebra, extra, name: str) -> Algebra:
    from .derivations import parametric_form_L
    allowed = {f"a{t}": 0 for t in range(2, n - 1)}
    allowed.update({f"b{n - 3}": 0, f"b{n - 2}": 0, f"alpha{n}": 0})
    p = _extras(extra, allowed)
    vals = {f"a{n - 1}": 1, f"b{n - 1}": 1, f"b{n - 3}": p[f"b{n - 3}"], f"b{n - 2}": p[f"b{n - 2}"]}
    for t in range(2, n - 1):
        vals[f"a{t}"] = p[f"a{t}"]
        if t <= n - 4:
            vals[f"b{t}"] = p[f"a{t}"]
    d = _form_matrix(parametric_form_L(n, 1, 0, 0), vals)
    return _extend(n, nil, _from_matrix(n, d), {}, {n: p[f"alpha{n}"]}, name)


def _h_110(n: int, k: int, extra) -> Algebra:
    nil = _nilradical("110", n)
    name = f"H{k}_{n + 1}(1,1,0)"
    if k == 6:
        return _solver_completed("110", n, nil, 0, 1, extra, {}, name)
    if k == 1:
        a3 = _extras(extra, {"a3": 1})["a3"]
        if a3 in (-2, 3 - n, Fraction(2 - n, 2), Fraction(3 - n, 2)):
            raise CatalogError("H1(1,1,0) needs a3 not in {-2, 3-n, (2-n)/2, (3-n)/2}")
        bn = al2 = aln = 0
    else:
        _extras(extra, {})
        a3, bn, al2, aln = {2: (-2, 0, 1, 0), 3: (3 - n, 1, 0, 0),
                            4: (Fraction(2 - n, 2), 0, 0, 1), 5: (Fraction(3 - n, 2), 1, 0, 0)}[k]
    a3 = _q(a3)
    right: Brackets = {1: {1: 1, 3: a3}, 2: {2: 2 + a3}, 3: {3: 1 + a3, n: bn}, n: {n: n - 2 + 2 * a3}}
    left: Brackets = {1: {1: -1, 3: -a3}, 3: {3: -(1 + a3), n: -bn}, 4: {2: 1, 4: -(2 + a3)},
                      n: {n: -(n - 2 + 2 * a3)}}
    for i in range(4, n):
        right[i] = {i: i - 2 + a3}
    for i in range(5, n):
        left[i] = {i: -(i - 2 + a3)}
    return _extend(n, nil, right, left, {2: al2, n: aln}, name)


def _h_121(n: int, k: int, extra) -> Algebra:
    nil = _nilradical("121", n)
    name = f"H{k}_{n + 1}(1,2,1)"
    if k == 7:
        return _solver_completed("121", n, nil, 0, 1, extra, {}, name)
    if k == 1:
        a3 = _extras(extra, {"a3": 1})["a3"]
        if a3 in (-1, 3 - n, Fraction(2 - n, 2), Fraction(3 - n, 2)):
            raise CatalogError("H1(1,2,1) needs a3 not in {-1, 3-n, (2-n)/2, (3-n)/2}")
        return _solver_completed("121", n, nil, 1, a3, {}, {}, name)
    _extras(extra, {})
    # case -> (a3, derivation extras, pinned products)
    a3, dextra, pins = {
        2: (-1, {}, {"[x,x]_e2": 1}),
        3: (-1, {"b2": 1}, {}),
        4: (3 - n, {f"b{n}": 1}, {}),
        5: (Fraction(2 - n, 2), {}, {f"[x,x]_e{n}": 1}),
        6: (Fraction(3 - n, 2), {f"b{n}": 1}, {}),
    }[k]
    return _solver_completed("121", n, nil, 1, a3, dextra, pins, name)


def _g_case_derivation(code: str, n: int, a1, a3, dvals: Mapping[str, Scalar]):
    from .derivations import parametric_form_G
    _, (al, be, ga) = _NILRADICAL_PARAMS[code]
    vals = {"a1": a1, "a3": a3, "b3": _q(a1) + _q(a3)}
    vals.update(dvals)
    return _form_matrix(parametric_form_G(n, al, be, ga, odd_b_vanish=True), vals)


def _solver_completed(code: str, n: int, nil: Algebra, a1, a3, extra, pins, name: str) -> Algebra:
    """Right action from the derivation form, left products from the extension solver.

    For the a_1 = 0 branch the even-index b_t (4 <= t <= n-1) and b_n stay
    as parameters; every unpinned free product is completed with zeros where
    the quadratic residuals allow it.
    """
    from .extensions import ExtensionProblem, extension_algebra, solve_extension
    if a1 == 0:
        allowed = {f"b{t}": 0 for t in range(4, n, 2)}
        allowed[f"b{n}"] = 0
        dvals = _extras(extra, allowed)
    else:
        dvals = dict(extra)
    d = _g_case_derivation(code, n, a1, a3, dvals)
    prob = ExtensionProblem(nil, d)
    sol = solve_extension(prob)
    values = sol.complete(pins)
    return extension_algebra(prob, values, name)


def build_solvable(spec) -> Algebra:
    """(n+1)-dimensional solvable extension, certified before it is returned.

    spec is a FamilySpec whose tag is a solvable tag (see parse_solvable_tag)
    or the tag string itself together with keyword n.
    """
    from .extensions import nilradical_subspace, verify_solvable_extension
    if isinstance(spec, str):
        raise CatalogError("build_solvable needs a FamilySpec; use FamilySpec(tag, n)")
    code, k = parse_solvable_tag(spec.tag)
    _need_n(spec.n)
    extra = dict(spec.extra)
    if code == "1m10":
        alg = _r_1m10(spec.n, k, extra)
    elif code == "100":
        alg = _r_100(spec.n, k, extra)
    elif code == "110":
        alg = _h_110(spec.n, k, extra)
    else:
        alg = _h_121(spec.n, k, extra)
    report = verify_solvable_extension(alg, nilradical_subspace(alg))
    if not report.ok:
        failed = [f for f, v in report.as_dict().items() if not v]
        raise CatalogError(f"{alg.name}: certification failed ({', '.join(failed)})")
    alg.leibniz_checked = True
    return alg


def build(spec: FamilySpec) -> Algebra:
    """Dispatch on spec.tag: mu1, mu2, L, G, or any solvable tag."""
    tag = spec.tag
    if tag in ("mu1", "mu2"):
        if spec.params or spec.extra:
            raise CatalogError(f"{tag} takes no parameters")
        return mu1(spec.n) if tag == "mu1" else mu2(spec.n)
    if tag in ("L", "G"):
        params = tuple(spec.params) + (0,) * (3 - len(spec.params))
        if len(params) != 3 or any(isinstance(p, str) for p in params):
            raise CatalogError(f"{tag} needs numeric (alpha, beta, gamma)")
        return (family_L if tag == "L" else family_G)(spec.n, *params)
    return build_solvable(spec)
