from fractions import Fraction

import pytest
import sympy

from sqkz.graded import Grading, all_gradings, all_weights, chain_sites, embed_local, local_permutation, make_grading, weight_basis
from sqkz.omega import (
    OmegaError,
    OmegaKind,
    admissible,
    build_omega,
    check_golden,
    golden_grading,
    inversion_count,
    load_goldens,
    validate_omega,
)
from sqkz.rmatrix import RFamily, RParams, g_correction, grading_flip, q_permutation
from sqkz.scalars import FLOAT

from oracles import swap_walk_coefficients

Q = Fraction(2)
PARAMS = RParams.trig(Q)
POINTS = (Fraction(5, 3), Fraction(7))


def test_inversion_count():
    assert inversion_count((1, 2, 3)) == 0
    assert inversion_count((3, 2, 1)) == 3
    assert inversion_count((2, 1, 1)) == 2
    assert inversion_count(()) == 0


def test_kind_mapping():
    assert OmegaKind.for_family(RFamily.TRIG_MINUS) is OmegaKind.Q_MINUS
    assert OmegaKind.SYM_MINUS.sign == -1 and not OmegaKind.SYM_MINUS.quantum
    assert OmegaKind.Q_PLUS.quantum


def test_admissibility_rules():
    g = make_grading(2, [1])
    assert admissible(OmegaKind.SYM_PLUS, g, (2, 1))
    assert not admissible(OmegaKind.SYM_PLUS, g, (1, 2))
    assert admissible(OmegaKind.SYM_MINUS, g, (1, 2))
    assert not admissible(OmegaKind.Q_MINUS, g, (2, 1))


@pytest.mark.parametrize("data", load_goldens(), ids=lambda d: d["name"])
def test_goldens(data):
    report = check_golden(data)
    assert report.passed, report.to_dict()
    assert report.residual == 0


def test_golden_set_is_complete():
    names = {d["name"] for d in load_goldens()}
    assert len(names) == 7
    assert "sym_plus_K3_n4_M211_p011" in names


def test_golden_values_written_out():
    # all-fermionic K=3: the sign is the parity of the permutation
    w = build_omega(OmegaKind.SYM_PLUS, Grading((1, 1, 1)), (1, 1, 1), 3)
    assert w.sorted_items() == [
        ((1, 2, 3), 1),
        ((1, 3, 2), -1),
        ((2, 1, 3), -1),
        ((2, 3, 1), 1),
        ((3, 1, 2), 1),
        ((3, 2, 1), -1),
    ]
    # one fermion among two bosons: fully symmetric
    w2 = build_omega(OmegaKind.SYM_PLUS, make_grading(2, [1]), (2, 1), 3)
    assert set(w2.coeffs.values()) == {1}
    wq = build_omega(OmegaKind.Q_PLUS, Grading((0, 1, 1)), (1, 1, 1), 3, q=Q)
    assert wq[(3, 2, 1)] == -8
    assert wq[(2, 3, 1)] == 4
    assert wq[(1, 3, 2)] == -2


def test_golden_grading_parse():
    assert golden_grading({"grading": "011"}).parity == (0, 1, 1)


def _cases(max_K=3, max_n=4):
    for K in range(2, max_K + 1):
        for n in range(1, max_n + 1):
            for g in all_gradings(K):
                for M in all_weights(K, n):
                    yield g, M, n


@pytest.mark.parametrize("kind", [OmegaKind.SYM_PLUS, OmegaKind.SYM_MINUS])
def test_symmetric_closed_form_matches_swap_walk(kind):
    for g, M, n in _cases(3, 4):
        if not admissible(kind, g, M):
            continue
        states = weight_basis(g, M, n)
        ref, consistent = swap_walk_coefficients(states, g.parity, kind.sign)
        assert consistent
        w = build_omega(kind, g, M, n)
        assert w.coeffs == ref


@pytest.mark.parametrize("kind", [OmegaKind.Q_PLUS, OmegaKind.Q_MINUS])
def test_quantum_closed_form_matches_swap_walk(kind):
    for g, M, n in _cases(3, 4):
        if not admissible(kind, g, M):
            continue
        states = weight_basis(g, M, n)
        ref, consistent = swap_walk_coefficients(states, g.parity, kind.sign, q=Q)
        assert consistent
        assert build_omega(kind, g, M, n, q=Q).coeffs == ref


@pytest.mark.parametrize("kind", list(OmegaKind))
def test_validate_exhaustive(kind):
    count = 0
    for g, M, n in _cases(3, 4):
        if not admissible(kind, g, M):
            continue
        w = build_omega(kind, g, M, n, q=Q)
        report = validate_omega(w, kind, PARAMS, POINTS if n <= 3 else POINTS[:1])
        assert report.residual == 0, (g, M, n, report.to_dict())
        count += 1
    assert count > 50


def _constraint_rows(kind, g, M, n):
    states = weight_basis(g, M, n)
    sites = chain_sites(n)
    rows = []
    ops = []
    for i in range(2, n + 1):
        if kind.quantum:
            ops.append(embed_local(q_permutation(g, Q), (i, i - 1), sites))
        else:
            ops.append(embed_local(local_permutation(g), (i, i - 1), sites))
    for op in ops:
        B = op.block(states)
        # W B = eps W  <=>  sum_r W_r (B[r][c] - eps delta_rc) = 0 for every column c
        for c in range(len(states)):
            rows.append([B[r][c] - (kind.sign if r == c else 0) for r in range(len(states))])
    if kind.quantum:
        for i in range(2, n + 1):
            G = embed_local(g_correction(kind.sign, POINTS[0], PARAMS, g), (i, i - 1), sites).block(states)
            for c in range(len(states)):
                rows.append([G[r][c] for r in range(len(states))])
    return states, rows


@pytest.mark.parametrize("kind", list(OmegaKind))
def test_nullspace_dimension(kind):
    for g, M, n in _cases(3, 3):
        if n < 2:
            continue
        states, rows = _constraint_rows(kind, g, M, n)
        A = sympy.Matrix([[sympy.Rational(int(Fraction(v).numerator), int(Fraction(v).denominator)) for v in r] for r in rows])
        null = A.nullspace()
        if admissible(kind, g, M):
            assert len(null) == 1, (g, M)
            v = null[0] / null[0][0]
            w = build_omega(kind, g, M, n, q=Q)
            assert [w[J] for J in states] == [Fraction(int(x.p), int(x.q)) for x in v]
        else:
            assert len(null) == 0, (g, M)


def test_inadmissible_raises():
    with pytest.raises(OmegaError, match="vector does not exist"):
        build_omega(OmegaKind.SYM_PLUS, make_grading(2, [1]), (1, 2), 3)
    with pytest.raises(OmegaError, match="vector does not exist"):
        build_omega(OmegaKind.Q_MINUS, make_grading(2, [1]), (2, 1), 3, q=Q)
    with pytest.raises(OmegaError, match="needs q"):
        build_omega(OmegaKind.Q_PLUS, make_grading(2, [1]), (2, 1), 3)
    with pytest.raises(OmegaError):
        build_omega(OmegaKind.SYM_PLUS, make_grading(2, [1]), (2, 1, 0), 3)


def test_all_bosonic_symmetric_is_constant():
    g = make_grading(3, [1, 2, 3])
    w = build_omega(OmegaKind.SYM_PLUS, g, (2, 1, 1), 4)
    assert set(w.coeffs.values()) == {1}
    assert len(w.coeffs) == 12


def test_quantum_validation_needs_q():
    g = make_grading(2, [1])
    w = build_omega(OmegaKind.Q_PLUS, g, (2, 1), 3, q=Q)
    with pytest.raises(ValueError):
        validate_omega(w, OmegaKind.Q_PLUS)


def test_q_plus_r_projection_at_example_point():
    g = Grading((0, 1, 1))
    w = build_omega(OmegaKind.Q_PLUS, g, (1, 1, 1), 3, q=Q)
    report = validate_omega(w, OmegaKind.Q_PLUS, PARAMS, [Fraction(5, 3)])
    assert report.residuals["r-projection"] == 0
    assert report.residuals["g-correction"] == 0


def test_wrong_kind_fails_validation():
    g = make_grading(3, [1, 2, 3])
    w = build_omega(OmegaKind.SYM_PLUS, g, (1, 1, 1), 3)
    assert not validate_omega(w, OmegaKind.SYM_MINUS).passed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_flip_duality(n):
    # <Omega_{q+}^p| Q = <Omega_{q-}^{p+1}|
    for g in all_gradings(3):
        for M in all_weights(3, n):
            if not admissible(OmegaKind.Q_PLUS, g, M):
                continue
            plus = build_omega(OmegaKind.Q_PLUS, g, M, n, q=Q)
            minus = build_omega(OmegaKind.Q_MINUS, g.flipped(), M, n, q=Q)
            assert admissible(OmegaKind.Q_MINUS, g.flipped(), M)
            assert (grading_flip(plus) - minus).coeffs == {}


def test_float_backend_omega():
    g = Grading((0, 1, 1))
    params = RParams.trig(2.0, backend=FLOAT)
    w = build_omega(OmegaKind.Q_PLUS, g, (1, 1, 1), 3, q=2.0, backend=FLOAT)
    assert validate_omega(w, OmegaKind.Q_PLUS, params, [5 / 3]).residual < 1e-12
