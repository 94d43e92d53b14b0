"""Isomorphism-invariant fingerprints and a pairwise distinction report."""
from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import (Algebra, center, characteristic_sequence, left_annihilator,
                      lower_central_series, right_annihilator, series, symmetric_span)
from .derivations import derivation_space
from .exactla import Subspace, format_scalar

# fields that enter the comparison; c_e1 depends on the chosen basis
COMPARED = ("lower_central", "derived", "center", "ann_r", "ann_l", "der", "symmetric",
            "intersections", "generic_ranks", "generic_left_ranks", "generic_char", "spectrum")


@dataclass(frozen=True)
class InvariantProfile:
    dim: int
    lower_central: Tuple[int, ...]
    derived: Tuple[int, ...]
    center: int
    ann_r: int
    ann_l: int
    der: int
    symmetric: int
    intersections: Tuple[int, ...]        # see _intersections
    generic_ranks: Tuple[int, ...]        # rank R_x^k, k = 1..dim, at a generic x
    generic_left_ranks: Tuple[int, ...]   # rank L_x^k at a generic x
    generic_char: Optional[Tuple[int, ...]]  # Jordan type of R_x when it is nilpotent
    spectrum: Optional[Tuple[str, ...]]   # scale-free characteristic polynomial of generic R_x
    c_e1: Optional[Tuple[int, ...]]       # reported only, not compared

    def key(self) -> Tuple:
        return tuple(getattr(self, f) for f in COMPARED)

    def as_dict(self) -> Dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


def _rank_profile(m) -> Tuple[int, ...]:
    # rank m^k = dim m^k(V), computed on images rather than on powers
    out, sub = [], Subspace.full(m.nrows)
    for _ in range(m.nrows):
        image = Subspace(m.nrows, [[sum((a * b for a, b in zip(row, v)), Fraction(0))
                                    for row in m.rows] for v in sub.basis])
        out.append(image.dim)
        if image.dim == sub.dim:
            out += [image.dim] * (m.nrows - len(out))
            break
        sub = image
    return tuple(out)


def _samples(alg: Algebra, samples: int, seed: int) -> List[List[Fraction]]:
    rng = random.Random(seed)
    return [[Fraction(rng.randint(-30, 30)) for _ in range(alg.dim)] for _ in range(samples)]


def generic_rank_profile(alg: Algebra, samples: int = 3, seed: int = 0, left: bool = False
                         ) -> Tuple[int, ...]:
    """Entrywise maximum over seeded random x of the ranks of R_x^k (or L_x^k).

    Each rank is maximal on a dense open set, so a random x attains all of
    them at once with overwhelming probability.
    """
    best = (0,) * alg.dim
    for x in _samples(alg, samples, seed):
        m = alg.left_matrix(x) if left else alg.right_matrix(x)
        best = tuple(max(a, b) for a, b in zip(best, _rank_profile(m)))
    return best


def characteristic_polynomial(m) -> Tuple[Fraction, ...]:
    """Coefficients c_0 = 1, c_1, ..., c_n of det(tI - m) (Faddeev-LeVerrier)."""
    n = m.nrows
    coeffs = [Fraction(1)]
    ident = m.identity(n)
    mk = m.zeros(n, n)
    for k in range(1, n + 1):
        mk = m @ (mk + ident.scale(coeffs[-1]))
        trace = sum((mk.rows[i][i] for i in range(n)), Fraction(0))
        coeffs.append(-trace / k)
    return tuple(coeffs)


def scale_free(coeffs: Sequence[Fraction]) -> Optional[Tuple[Fraction, ...]]:
    """Invariants of c_k under m -> lam*m (c_k -> lam^k c_k): c_k^j / c_j^k for the
    first j >= 1 with c_j != 0. None for a nilpotent matrix."""
    j = next((k for k in range(1, len(coeffs)) if coeffs[k]), None)
    if j is None:
        return None
    return tuple(coeffs[k] ** j / coeffs[j] ** k for k in range(1, len(coeffs)))


def generic_spectrum(alg: Algebra, samples: int = 3, seed: int = 0) -> Optional[Tuple[str, ...]]:
    """Scale-free characteristic polynomial of R_x for random x, if it does not depend on x.

    With a one-dimensional complement to the nilradical, R_x has the spectrum
    of the complement's action up to scaling, so the value is an invariant.
    Samples with nilpotent R_x (x inside the nilradical) carry no spectrum
    and are skipped. Returns None when the rest disagree or none is left.
    """
    seen = {scale_free(characteristic_polynomial(alg.right_matrix(x)))
            for x in _samples(alg, samples, seed)} - {None}
    if len(seen) != 1:
        return None
    (val,) = seen
    return tuple(format_scalar(c) for c in val)


def _intersections(alg: Algebra) -> Tuple[int, ...]:
    """dims of Ann_r & Ann_l, L^2 & Ann_r, L^2 & Ann_l, L^2 & center, [L,L] & symmetric span."""
    ar, al, z, sym = right_annihilator(alg), left_annihilator(alg), center(alg), symmetric_span(alg)
    sq = lower_central_series(alg)[1] if alg.dim else Subspace.zero(0)
    return ((ar & al).dim, (sq & ar).dim, (sq & al).dim, (sq & z).dim, (sq & sym).dim)


def invariant_profile(alg: Algebra, seed: int = 0, samples: int = 3) -> InvariantProfile:
    prof = series(alg)
    ranks = generic_rank_profile(alg, samples, seed)
    generic_char = None
    if ranks[-1] == 0:
        # nilpotent generic R_x: block sizes follow from the rank sequence
        generic_char = jordan_type_from_ranks(alg.dim, ranks)
    try:
        c_e1 = characteristic_sequence(alg, alg.basis_vector(0))
    except ValueError:
        c_e1 = None
    return InvariantProfile(
        dim=alg.dim,
        lower_central=prof.lower_central,
        derived=prof.derived,
        center=center(alg).dim,
        ann_r=right_annihilator(alg).dim,
        ann_l=left_annihilator(alg).dim,
        der=derivation_space(alg).dim,
        symmetric=symmetric_span(alg).dim,
        intersections=_intersections(alg),
        generic_ranks=ranks,
        generic_left_ranks=generic_rank_profile(alg, samples, seed, left=True),
        generic_char=generic_char,
        spectrum=generic_spectrum(alg, samples, seed),
        c_e1=c_e1,
    )


def jordan_type_from_ranks(n: int, ranks: Sequence[int]) -> Tuple[int, ...]:
    """Block sizes of a nilpotent operator from r_k = rank N^k (k >= 1)."""
    r = [n] + list(ranks) + [0, 0]
    # number of blocks of size >= k is r_(k-1) - r_k
    at_least = [r[k - 1] - r[k] for k in range(1, len(r))]
    sizes = []
    for k in range(1, len(at_least) + 1):
        exact = at_least[k - 1] - (at_least[k] if k < len(at_least) else 0)
        sizes += [k] * exact
    return tuple(sorted(sizes, reverse=True))


DIFFER = "DIFFER"
UNRESOLVED = "UNRESOLVED"


@dataclass
class DistinctionReport:
    names: List[str]
    profiles: List[InvariantProfile]
    verdicts: Dict[Tuple[int, int], str]
    witnesses: Dict[Tuple[int, int], List[str]]

    def unresolved(self) -> List[Tuple[str, str]]:
        return [(self.names[i], self.names[j]) for (i, j), v in sorted(self.verdicts.items())
                if v == UNRESOLVED]

    @property
    def all_differ(self) -> bool:
        return all(v == DIFFER for v in self.verdicts.values())

    def as_dict(self) -> Dict:
        return {
            "names": self.names,
            "profiles": {n: p.as_dict() for n, p in zip(self.names, self.profiles)},
            "pairs": [{"a": self.names[i], "b": self.names[j], "verdict": v,
                       "differing": self.witnesses[(i, j)]}
                      for (i, j), v in sorted(self.verdicts.items())],
            "unresolved": [list(p) for p in self.unresolved()],
        }

    def text(self) -> str:
        width = max((len(n) for n in self.names), default=0)
        lines = []
        for (i, j), v in sorted(self.verdicts.items()):
            why = ", ".join(self.witnesses[(i, j)]) or "identical profiles"
            lines.append(f"{self.names[i]:<{width}}  {self.names[j]:<{width}}  {v:<10}  {why}")
        return "\n".join(lines)


def distinguish(algs: Sequence[Algebra], names: Optional[Sequence[str]] = None,
                seed: int = 0) -> DistinctionReport:
    """DIFFER when some compared invariant differs, UNRESOLVED otherwise.

    Identical profiles never count as a proof of isomorphism.
    """
    if len({a.dim for a in algs}) > 1:
        raise ValueError("distinguish needs algebras of one dimension")
    names = list(names) if names else [a.name or f"A{i}" for i, a in enumerate(algs)]
    profiles = [invariant_profile(a, seed) for a in algs]
    verdicts, witnesses = {}, {}
    for i in range(len(algs)):
        for j in range(i + 1, len(algs)):
            diff = [f for f in COMPARED if getattr(profiles[i], f) != getattr(profiles[j], f)]
            verdicts[(i, j)] = DIFFER if diff else UNRESOLVED
            witnesses[(i, j)] = diff
    return DistinctionReport(names, profiles, verdicts, witnesses)
