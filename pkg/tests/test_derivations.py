import random
from fractions import Fraction

import pytest

from qflb.algebra import abelian, apply_basis_change
from qflb.catalog import family_G, family_L
from qflb.derivations import (TABLE1, check_parametric_form, check_projection_nilpotency,
                              check_table1_row, commutator, derivation_defect, derivation_space,
                              family_diag_coords, flatten, is_derivation, is_nilpotent_derivation,
                              nil_independent_rank, parametric_form_L, unflatten)
from qflb.exactla import Matrix


def test_abelian_derivations_are_all_maps():
    assert derivation_space(abelian(3)).dim == 9


def test_l1m10_dimension():
    assert derivation_space(family_L(6, 1, -1, 0)).dim == 8


@pytest.mark.parametrize("alg", [family_L(6, 1, -1, 0), family_G(7, 1, 2, 1), family_L(7, 0, 2, 0)],
                         ids=lambda a: a.name)
def test_basis_satisfies_identity(alg):
    for d in derivation_space(alg).basis():
        assert not derivation_defect(alg, d)


def test_flatten_round_trip():
    m = Matrix([[1, 2], [3, Fraction(1, 2)]])
    assert unflatten(flatten(m), 2) == m


def test_nilpotency_of_matrices():
    assert is_nilpotent_derivation(Matrix([[0, 1, 5], [0, 0, 2], [0, 0, 0]]))
    assert not is_nilpotent_derivation(Matrix.identity(3))


def test_l110_derivation_with_a1_zero_is_nilpotent():
    alg = family_L(7, 1, 1, 0)
    form = parametric_form_L(7, 1, 1, 0)
    space = form.parameter_space()
    rng = random.Random(3)
    a1 = form.names.index("a1")
    hits = 0
    for _ in range(30):
        coeffs = [Fraction(rng.randint(-4, 4)) for _ in range(space.dim)]
        vals = [sum((c * v[t] for c, v in zip(coeffs, space.basis)), Fraction(0))
                for t in range(len(form.names))]
        if vals[a1]:
            continue
        d = form.matrix(vals)
        assert is_derivation(alg, d)
        assert is_nilpotent_derivation(d)
        hits += 1
    assert hits or space.dim == 0


@pytest.mark.parametrize("family,params,n", [
    ("L", (0, 2, 0), 7), ("L", (1, -1, 0), 6), ("L", (1, 2, 4), 8), ("L", (0, 1, 1), 9),
    ("G", (0, 0, 1), 7), ("G", (0, 2, 1), 8), ("G", (1, 2, 1), 9), ("G", (1, 0, 3), 7),
])
def test_parametric_form_matches(family, params, n):
    alg = (family_L if family == "L" else family_G)(n, *params)
    odd = family == "G" and params[0] == 1
    rep = check_parametric_form(alg, family, *params, odd_b_vanish=odd)
    assert rep.inclusion_ok, rep.witness
    assert rep.dim_der == rep.free_parameters


def test_g_alpha_one_needs_odd_b_relation():
    # without b_(2k+1) = 0 the form contains a non-derivation
    rep = check_parametric_form(family_G(7, 1, 0, 3), "G", 1, 0, 3)
    assert not rep.inclusion_ok
    assert rep.free_parameters == rep.dim_der + 1


def test_g001_constraint_respected():
    n = 7
    alg = family_G(n, 0, 0, 1)
    for d in derivation_space(alg).basis():
        # coefficient of e3 in d(e1) vanishes and d(e3)_e3 = d(e1)_e1
        assert d.rows[2][0] == 0
        assert d.rows[2][2] == d.rows[0][0]


def test_zero_matrix_is_a_derivation():
    assert is_derivation(family_G(7, 1, 1, 0), Matrix.zeros(7, 7))


@pytest.mark.parametrize("alg", [family_L(6, 1, 0, 0), family_G(7, 1, 1, 0), family_L(8, 0, 0, 1)],
                         ids=lambda a: a.name)
def test_closed_under_commutator(alg):
    der = derivation_space(alg)
    basis = der.basis()
    for i, d1 in enumerate(basis):
        for d2 in basis[i + 1:]:
            assert der.contains(commutator(d1, d2))


@pytest.mark.parametrize("alg", [family_L(6, 1, -1, 0), family_G(7, 0, 2, 1)], ids=lambda a: a.name)
def test_dimension_invariant_under_change(alg):
    rng = random.Random(11)
    while True:
        p = Matrix([[rng.randint(-2, 2) for _ in range(alg.dim)] for _ in range(alg.dim)])
        if p.det():
            break
    assert derivation_space(apply_basis_change(alg, p)).dim == derivation_space(alg).dim


def test_rank_examples():
    assert nil_independent_rank(family_L(6, 0, 1, 0), family_diag_coords("L", 6)) == 2
    assert nil_independent_rank(family_L(7, 1, 1, 0), family_diag_coords("L", 7)) == 1
    assert nil_independent_rank(family_G(7, 1, 0, 3), family_diag_coords("G", 7)) == 1


def test_projection_nilpotency():
    alg = family_G(9, 1, 2, 1)
    chk = check_projection_nilpotency(alg, family_diag_coords("G", 9))
    assert chk.ok


def test_table_rows_count_and_odd_only():
    assert len(TABLE1) == 20
    assert sum(r.applies(8) for r in TABLE1) == 13
    assert all(r.applies(7) for r in TABLE1)


@pytest.mark.parametrize("row", TABLE1, ids=lambda r: r.label)
def test_table_row_n7(row):
    res = check_table1_row(row, 7)
    assert res.ok, (res.rank, res.nilpotency)
