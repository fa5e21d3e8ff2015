from fractions import Fraction

from hypothesis import assume, given
from hypothesis import strategies as st

from sqkz.graded import (
    Covector,
    Grading,
    chain_sites,
    covector_from_json,
    covector_to_json,
    embed_local,
    identity,
    local_diag,
    local_op,
    local_supertrace,
    local_tensor,
    op_from_json,
    op_to_json,
    partial_supertrace_aux,
    permutation_op,
    weight_basis,
)
from sqkz.omega import OmegaKind, admissible, build_omega
from sqkz.rmatrix import RFamily, RParams, build_r, flip_operator, validate_r_axioms
from sqkz.scalars import SingularParameterError

from oracles import dense, dense_local, swap_walk_coefficients

parities = st.integers(2, 3).flatmap(lambda K: st.tuples(*[st.integers(0, 1)] * K))
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
positive = st.fractions(min_value=Fraction(1, 12), max_value=20, max_denominator=12)


@st.composite
def local_ops(draw, grading, arity, homogeneous=True):
    """Random matrix-unit expansions, homogeneous in parity when asked."""
    K = grading.K
    letters = st.integers(1, K)
    count = draw(st.integers(1, 4))
    parity = draw(st.integers(0, 1))
    terms = []
    for _ in range(count):
        mono = tuple((draw(letters), draw(letters)) for _ in range(arity))
        if homogeneous and sum(grading.p_unit(a, b) for a, b in mono) % 2 != parity:
            continue
        terms.append((mono, draw(rationals)))
    return local_op(grading, arity, terms)


@given(parities, st.data())
def test_embedding_matches_dense_oracle(parity, data):
    g = Grading(parity)
    n = 3 if g.K == 2 else 2
    A = data.draw(local_ops(g, 2))
    assume(A.terms)
    slots = data.draw(st.permutations(range(n)).map(lambda p: tuple(p[:2])))
    got = dense(embed_local(A, tuple(s + 1 for s in slots), chain_sites(n)))
    assert got == dense_local(A, slots, n)


@given(parities, st.data())
def test_graded_tensor_rule(parity, data):
    # (A (x) B)(C (x) D) = (-1)^{|B||C|} AC (x) BD
    g = Grading(parity)
    A, B, C, D = (data.draw(local_ops(g, 1)) for _ in range(4))
    assume(all(x.terms for x in (A, B, C, D)))
    s = chain_sites(2)

    def emb(X, Y):
        return embed_local(local_tensor(X, Y), (1, 2), s)

    def one_site(X):
        return embed_local(X, (1,), chain_sites(1))

    AC, BD = one_site(A) @ one_site(C), one_site(B) @ one_site(D)
    lhs = emb(A, B) @ emb(C, D)
    pB = embed_local(B, (1,), chain_sites(1)).parity()
    pC = embed_local(C, (1,), chain_sites(1)).parity()
    sign = -1 if (pB * pC) % 2 else 1
    rhs = emb(_from_op(AC, g), _from_op(BD, g)) * sign
    assert (lhs - rhs).is_zero()


def _from_op(op, g):
    terms = [(((r + 1, c + 1),), v) for r, c, v in op.items()]
    return local_op(g, 1, terms)


@given(parities, st.integers(1, 3), st.integers(1, 3))
def test_permutation_is_involution(parity, i, j):
    g = Grading(parity)
    assume(i != j)
    P = permutation_op(i, j, 3, g)
    assert (P @ P - identity(g, chain_sites(3))).is_zero()


@given(parities, st.sampled_from(list(RFamily)), st.data())
def test_axioms_at_random_rationals(parity, family, data):
    g = Grading(parity)
    if family.trig:
        x, y = data.draw(positive), data.draw(positive)
        params = RParams.trig(data.draw(positive.filter(lambda q: q != 1)))
    else:
        x, y = data.draw(rationals), data.draw(rationals)
        params = RParams.rational(data.draw(rationals.filter(lambda e: e != 0)))
    try:
        report = validate_r_axioms(family, g, [(x, y)], params)
    except SingularParameterError:
        assume(False)
    assert report.residual == 0


@given(parities, st.data())
def test_r_commutes_with_twist(parity, data):
    g = Grading(parity)
    twist = [data.draw(rationals) for _ in range(g.K)]
    u = data.draw(positive)
    params = RParams.trig(Fraction(3))
    try:
        R = build_r(RFamily.TRIG_MINUS, u, params, g)
    except SingularParameterError:
        assume(False)
    s = chain_sites(2)
    G = embed_local(local_diag(g, twist), (1,), s) @ embed_local(local_diag(g, twist), (2,), s)
    Rop = embed_local(R, (1, 2), s)
    assert G.commutator(Rop).is_zero()


@given(parities, st.integers(1, 4))
def test_flip_operator_squares_to_one(parity, n):
    g = Grading(parity)
    Q = flip_operator(g, chain_sites(n))
    assert (Q @ Q - identity(g, chain_sites(n))).is_zero()


@given(parities, st.integers(1, 4), st.sampled_from(list(OmegaKind)), st.data())
def test_omega_closed_form_matches_recursion(parity, n, kind, data):
    g = Grading(parity)
    weights = data.draw(st.lists(st.integers(0, n), min_size=g.K, max_size=g.K).filter(lambda w: sum(w) == n))
    assume(admissible(kind, g, weights))
    q = data.draw(positive.filter(lambda v: v != 1))
    w = build_omega(kind, g, weights, n, q=q)
    ref, consistent = swap_walk_coefficients(weight_basis(g, weights, n), g.parity, kind.sign, q if kind.quantum else None)
    assert consistent
    assert w.coeffs == ref


@given(parities, st.data())
def test_operator_json_roundtrip(parity, data):
    g = Grading(parity)
    A = data.draw(local_ops(g, 2, homogeneous=True))
    assume(A.terms)
    op = embed_local(A, (2, 1), chain_sites(2))
    assert (op_from_json(op_to_json(op)) - op).is_zero()


@given(parities, st.data())
def test_covector_json_roundtrip(parity, data):
    g = Grading(parity)
    states = weight_basis(g, tuple([2] + [1] * (g.K - 1)), g.K + 1)
    coeffs = {J: data.draw(rationals) for J in states}
    w = Covector(g, g.K + 1, coeffs)
    back = covector_from_json(covector_to_json(w))
    assert (back - w).coeffs == {}


@given(parities, st.data())
def test_partial_supertrace_of_even_tensor(parity, data):
    # str_0(A (x) B) = str(A) B for even A and B (the case met by monodromy matrices)
    g = Grading(parity)
    A = data.draw(local_ops(g, 1))
    B = data.draw(local_ops(g, 1))
    assume(A.terms and B.terms)
    s = chain_sites(1, aux=True)
    if embed_local(A, (0,), s).parity() != 0:
        A = local_diag(g, [Fraction(k + 1) for k in range(g.K)])
    if embed_local(B, (1,), s).parity() != 0:
        B = local_diag(g, [Fraction(2 * k - 3) for k in range(g.K)])
    T = embed_local(local_tensor(A, B), (0, 1), s)
    expected = embed_local(B, (1,), chain_sites(1)) * local_supertrace(A)
    assert (partial_supertrace_aux(T) - expected).is_zero()
