"""Correspondence checks between qKZ/KZ operators and many-body Hamiltonians.

Every statement is reduced to a finite identity between covectors (or
operators) projected on an invariant covector and evaluated exactly.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache
from fractions import Fraction
from typing import List, Optional, Sequence

from .chain import (
    ChainConfig,
    chain_hamiltonian_product,
    gaudin_hamiltonian,
    k_operator,
    k_product,
    ratio_factor,
    sinh_eta,
    transfer_asymptotic,
)
from .checks import CorrespondenceResult, max_residual
from .graded import (
    Covector,
    Grading,
    all_gradings,
    all_weights,
    chain_sites,
    embed_local,
    identity,
    permutation_op,
    weight_basis,
)
from .omega import OmegaKind, admissible, build_omega
from .rmatrix import RFamily, RParams, build_r, build_r_signed, grading_flip, q_permutation
from .scalars import SingularParameterError


def _summary(config: ChainConfig, weights, **extra) -> dict:
    out = {
        "grading": str(config.grading),
        "n": config.n,
        "weights": list(weights),
        "positions": [_fmt(x) for x in config.positions],
        "g": [_fmt(x) for x in config.twist],
    }
    out.update(extra)
    return out


def _fmt(v) -> str:
    if isinstance(v, complex):
        return repr(v.real) if v.imag == 0 else repr(v)
    return str(v)


def elementary_symmetric(values: Sequence, d: int, one=Fraction(1)):
    total = one * 0
    for combo in itertools.combinations(values, d):
        term = one
        for v in combo:
            term = term * v
        total = total + term
    return total


def twist_multiset(config: ChainConfig, weights: Sequence[int]) -> list:
    return [config.twist[a] for a in range(config.grading.K) for _ in range(weights[a])]


def trig_eigenvalue(config: ChainConfig, weights: Sequence[int]):
    q = config.params.q
    E = config.one() * 0
    for a, m in enumerate(weights):
        E = E + config.twist[a] * (q**m - q ** (-m)) / (q - 1 / q)
    return E


# ---------------------------------------------------------------------------
# KZ -> Calogero


def check_kz_calogero(
    weights: Sequence[int],
    config: ChainConfig,
    kind: OmegaKind = OmegaKind.SYM_PLUS,
) -> CorrespondenceResult:
    """``sum_i <W|(H_i^2 + hbar dH_i/dx_i) - c sum_{i!=j} x_ij^-2 <W| = E <W|``.

    ``H_i`` are the Gaudin Hamiltonians, ``c = kappa (kappa - eps hbar)``
    with ``eps = +-1`` for the symmetric/antisymmetric covector, and
    ``E = sum_a M_a g_a^2``.
    """
    if kind not in (OmegaKind.SYM_PLUS, OmegaKind.SYM_MINUS):
        raise ValueError("the Calogero check uses a symmetric or antisymmetric covector")
    if config.kappa is None or config.params.hbar is None:
        raise ValueError("the Calogero check needs kappa and hbar")
    omega = build_omega(kind, config.grading, weights, config.n, backend=config.backend)
    n = config.n
    kappa, hbar = config.kappa, config.params.hbar
    eps = kind.sign
    sites = config.sites
    lhs = omega * 0
    inv_sq = config.one() * 0
    for i in range(1, n + 1):
        H = gaudin_hamiltonian(i, config)
        dH = identity(config.grading, sites, config.one()).zero_like()
        for j in range(1, n + 1):
            if j != i:
                xij = config.x(i) - config.x(j)
                dH = dH - permutation_op(i, j, sites, config.grading) * (kappa / (xij * xij))
                inv_sq = inv_sq + 1 / (xij * xij)
        projected = omega @ H
        lhs = lhs + projected @ H + (omega @ dH) * hbar
    coupling = kappa * (kappa - eps * hbar)
    lhs = lhs - omega * (coupling * inv_sq)
    E = sum((config.twist[a] ** 2 * m for a, m in enumerate(weights)), config.one() * 0)
    residual = (lhs - omega * E).max_abs()
    return CorrespondenceResult(
        name=f"kz-calogero[{kind.value}]",
        config=_summary(config, weights, kappa=_fmt(kappa), hbar=_fmt(hbar)),
        backend=config.backend,
        eigenvalue=E,
        residual=residual,
        probes={"calogero-coupling": coupling},
    )


# ---------------------------------------------------------------------------
# qKZ -> Macdonald-Ruijsenaars


def projected_product(omega: Covector, ops: Sequence) -> Covector:
    out = omega
    for op in ops:
        out = out @ op
    return out


def check_qkz_macdonald(
    family: RFamily,
    d: int,
    weights: Sequence[int],
    config: ChainConfig,
) -> CorrespondenceResult:
    """``sum_{|I|=d} prod_{s in I, r not in I} f(x_s - x_r) <W|K_I^(0) = E_d <W|``.

    ``K_I^(0)`` is the product in ascending index order.  Rational families
    accept any ``1 <= d <= n`` with ``E_d`` the elementary symmetric
    polynomial of the twist multiset; trigonometric families only ``d = 1``.
    """
    n = config.n
    if not 1 <= d <= n:
        raise ValueError(f"order d={d} outside 1..{n}")
    if family.trig and d != 1:
        raise ValueError("higher trigonometric Hamiltonians are not implemented")
    config.check_family(family)
    kind = OmegaKind.for_family(family)
    omega = build_omega(kind, config.grading, weights, n, q=config.params.q, backend=config.backend)
    K0 = {i: k_operator(i, None, config, family) for i in range(1, n + 1)}
    projected = {}
    lhs = omega * 0
    for I in itertools.combinations(range(1, n + 1), d):
        coeff = config.one()
        for s in I:
            for r in range(1, n + 1):
                if r not in I:
                    dx = config.x(s) / config.x(r) if family.trig else config.x(s) - config.x(r)
                    coeff = coeff * ratio_factor(family, dx, config.params)
        projected[I] = projected_product(omega, [K0[i] for i in I])
        lhs = lhs + projected[I] * coeff
    if family.trig:
        E = trig_eigenvalue(config, weights)
    else:
        E = elementary_symmetric(twist_multiset(config, weights), d, config.one())
    details = {"eigen-equation": (lhs - omega * E).max_abs()}
    # the shift drops out after projection: <W|K_i^(hbar) = <W|K_i^(0)
    shift = config.params.w if family.trig else config.params.hbar
    if shift is not None:
        details["shift-independence"] = max_residual(
            *[(omega @ k_operator(i, shift, config, family) - omega @ K0[i]).max_abs() for i in K0]
        )
    if family.trig:
        t_diff = transfer_asymptotic(1, config, family) - transfer_asymptotic(-1, config, family)
        H_sum = chain_hamiltonian_product(1, config, family)
        for i in range(2, n + 1):
            H_sum = H_sum + chain_hamiltonian_product(i, config, family)
        details["transfer-asymptotics"] = (
            omega @ (H_sum * (2 * sinh_eta(config.params))) - omega @ t_diff
        ).max_abs()
    probes = {}
    if d == 2 and n >= 2:
        worst = 0
        for i, j in itertools.combinations(range(1, n + 1), 2):
            worst = max(worst, (projected_product(omega, [K0[j], K0[i]]) - projected[(i, j)]).max_abs())
        probes["order-dependence"] = worst
    return CorrespondenceResult(
        name=f"qkz-macdonald[{family.value},d={d}]",
        config=_summary(config, weights, family=family.value, d=d, omega=kind.value),
        backend=config.backend,
        eigenvalue=E,
        residual=details["eigen-equation"],
        details=details,
        probes=probes,
    )


# ---------------------------------------------------------------------------
# determinant identity


def _mat_mul(A, B):
    m = len(B[0]) if B else 0
    return [[sum((a * B[k][j] for k, a in enumerate(row) if a), A[0][0] * 0) for j in range(m)] for row in A]


def _perm_sign(perm) -> int:
    inv = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
    return -1 if inv % 2 else 1


@lru_cache(maxsize=64)
def hamiltonian_commutator(config: ChainConfig, family: RFamily):
    """Largest entry of ``[H_i, H_j]`` over all pairs."""
    H = [chain_hamiltonian_product(i, config, family) for i in range(1, config.n + 1)]
    return max_residual(*[H[i].commutator(H[j]).max_abs() for i in range(len(H)) for j in range(i + 1, len(H))])


def check_det_identity(weights: Sequence[int], config: ChainConfig) -> CorrespondenceResult:
    """``det(z delta_ij - eta H_i/(x_j - x_i + eta))`` on a weight block equals ``prod_a (z-g_a)^{M_a}``.

    Each Leibniz term is expanded over the rows ``T`` that contribute an
    ``H`` factor; the term is then ``z^{n-|T|}`` times a scalar times the
    row-ordered product ``H_T``, so only ``2^n`` operator products are needed.
    """
    family = RFamily.RATIONAL_PLUS
    config.check_family(family)
    n = config.n
    eta = config.params.eta
    one = config.one()
    zero_s = one * 0
    states = weight_basis(config.grading, weights, n)
    dim = len(states)
    H = [chain_hamiltonian_product(i, config, family) for i in range(1, n + 1)]
    commutator = hamiltonian_commutator(config, family)
    blocks = [h.block(states) for h in H]

    def c(i, j):
        if i == j:
            return one
        return eta / config.backend.nonzero(config.x(j + 1) - config.x(i + 1) + eta, "x_j - x_i + eta = 0")

    coeff = {}
    for perm in itertools.permutations(range(n)):
        moved = frozenset(i for i in range(n) if perm[i] != i)
        fixed = [i for i in range(n) if perm[i] == i]
        sgn = _perm_sign(perm)
        for r in range(len(fixed) + 1):
            for extra in itertools.combinations(fixed, r):
                T = tuple(sorted(moved | set(extra)))
                term = one * sgn
                for i in T:
                    term = term * -c(i, perm[i])
                coeff[T] = coeff.get(T, zero_s) + term

    eye = [[one if r == k else zero_s for k in range(dim)] for r in range(dim)]
    products = {(): eye}
    for size in range(1, n + 1):
        for T in itertools.combinations(range(n), size):
            products[T] = _mat_mul(products[T[:-1]], blocks[T[-1]])
    # det[k] is the coefficient matrix of z^k
    det = [[[zero_s] * dim for _ in range(dim)] for _ in range(n + 1)]
    for T, cT in coeff.items():
        if cT == 0:
            continue
        k = n - len(T)
        M = products[T]
        det[k] = [[x + cT * y for x, y in zip(rx, ry)] for rx, ry in zip(det[k], M)]
    target = [[one]]
    for a, m in enumerate(weights):
        for _ in range(m):
            target = [[c] for c in _scalar_poly_mul([t[0] for t in target], [-config.twist[a], one])]
    residual = abs(one * 0)
    for k in range(n + 1):
        for r in range(dim):
            for col in range(dim):
                expected = target[k][0] if r == col else zero_s
                residual = max(residual, abs(det[k][r][col] - expected))
    probes = {}
    if not config.backend.passes(commutator):
        probes["verdict"] = "non-commuting entries"
    return CorrespondenceResult(
        name="det-identity",
        config=_summary(config, weights, eta=_fmt(eta)),
        backend=config.backend,
        residual=residual,
        details={"polynomial": residual, "entries-commute": commutator},
        probes=probes,
    )


def _scalar_poly_mul(P, Q):
    out = [P[0] * 0] * (len(P) + len(Q) - 1)
    for i, a in enumerate(P):
        for j, b in enumerate(Q):
            out[i + j] = out[i + j] + a * b
    return out


# ---------------------------------------------------------------------------
# grading degeneracy


def sweep_family(grading: Grading, weights: Sequence[int], trig: bool) -> Optional[RFamily]:
    """Family whose invariant covector exists for ``grading``, preferring the plus kind."""
    plus, minus = (
        (RFamily.TRIG_PLUS, RFamily.TRIG_MINUS) if trig else (RFamily.RATIONAL_PLUS, RFamily.RATIONAL_MINUS)
    )
    for fam in (plus, minus):
        if admissible(OmegaKind.for_family(fam), grading, weights):
            return fam
    return None


def degeneracy_sweep(
    K: int,
    weights: Sequence[int],
    n: int,
    twist: Sequence,
    positions: Sequence,
    params: RParams,
    trig: bool = True,
    gradings: Optional[Sequence[Grading]] = None,
) -> List[CorrespondenceResult]:
    """Run the d=1 check for every parity assignment; the last entry compares eigenvalues."""
    results = []
    for grading in gradings or all_gradings(K):
        family = sweep_family(grading, weights, trig)
        config = ChainConfig(n, grading, tuple(positions), tuple(twist), params)
        if family is None:
            results.append(
                CorrespondenceResult(
                    name="degeneracy",
                    config=_summary(config, weights),
                    backend=params.backend,
                    skipped="skipped: no invariant vector",
                )
            )
            continue
        r = check_qkz_macdonald(family, 1, weights, config)
        r.name = f"degeneracy[{family.value}]"
        results.append(r)
    ran = [r for r in results if not r.skipped]
    spread = max_residual(*[r.eigenvalue - ran[0].eigenvalue for r in ran]) if ran else 0
    results.append(
        CorrespondenceResult(
            name="degeneracy-eigenvalue-invariance",
            config={"K": K, "n": n, "weights": list(weights), "runs": len(ran)},
            backend=params.backend,
            eigenvalue=ran[0].eigenvalue if ran else None,
            residual=spread,
        )
    )
    return results


# ---------------------------------------------------------------------------
# sign-flip map


def check_sign_flip_map(config: ChainConfig) -> CorrespondenceResult:
    """Conjugation by the grading flip ``Q`` turns the ``(q^-1)``-family into the ``q``-family.

    Checked on ``P^q``, on the R-matrices, on every ``K_i^(hbar)`` and on the
    invariant covectors of all admissible weights.
    """
    g = config.grading
    params = config.params
    params.require(RFamily.TRIG_PLUS)
    if params.w is None:
        raise ValueError("the sign-flip check needs w")
    inv = params.inverted()
    flipped = ChainConfig(config.n, g.flipped(), config.positions, config.twist, params)
    minus_config = ChainConfig(config.n, g, config.positions, config.twist, inv)
    b = config.backend
    two_sites = chain_sites(2)

    # Q P^q(p) Q^-1 = -P^q(p+1)
    pq = embed_local(q_permutation(g, params.q, b), (2, 1), two_sites)
    pq_flipped = embed_local(q_permutation(g.flipped(), params.q, b), (2, 1), two_sites)
    perm_res = (grading_flip(pq) + pq_flipped).max_abs()

    u = config.x(1) / config.x(config.n) if config.n > 1 else config.x(1) * 3
    r_minus = embed_local(build_r_signed(-1, u, inv, g), (1, 2), two_sites)
    r_plus = embed_local(build_r(RFamily.TRIG_PLUS, u, params, g.flipped()), (1, 2), two_sites)
    r_res = (grading_flip(r_minus) - r_plus).max_abs()

    k_res = 0
    for i in range(1, config.n + 1):
        lhs = k_product(i, params.w, minus_config, True, lambda arg: build_r_signed(-1, arg, inv, g))
        rhs = k_operator(i, params.w, flipped, RFamily.TRIG_PLUS)
        k_res = max(k_res, (grading_flip(lhs) - rhs).max_abs())

    cov_res = 0
    for weights in all_weights(g.K, config.n):
        if not admissible(OmegaKind.Q_PLUS, g, weights):
            continue
        plus = build_omega(OmegaKind.Q_PLUS, g, weights, config.n, q=params.q, backend=b)
        minus = build_omega(OmegaKind.Q_MINUS, g.flipped(), weights, config.n, q=params.q, backend=b)
        cov_res = max(cov_res, (grading_flip(plus) - minus).max_abs())

    details = {
        "q-permutation": perm_res,
        "r-matrix": r_res,
        "k-operators": k_res,
        "covector-duality": cov_res,
    }
    return CorrespondenceResult(
        name="sign-flip",
        config=_summary(config, [], q=_fmt(params.q), w=_fmt(params.w)),
        backend=b,
        residual=max_residual(*details.values()),
        details=details,
    )


# ---------------------------------------------------------------------------
# random configurations


def random_rational(rng: random.Random, positive: bool = False, bound: int = 100) -> Fraction:
    num = rng.randint(1, bound) if positive else rng.randint(-bound, bound)
    return Fraction(num, rng.randint(1, bound))


def sample_positions(
    rng: random.Random,
    n: int,
    grading: Grading,
    twist: Sequence,
    params: RParams,
    family: RFamily,
    kappa=None,
    max_tries: int = 1000,
) -> ChainConfig:
    """Draw positions with numerators and denominators up to 100 until the
    configuration is nonsingular, also at the shifted qKZ arguments."""
    b = params.backend
    shift = params.w if family.trig else (params.hbar * params.eta if params.hbar is not None else None)
    for _ in range(max_tries):
        pos = tuple(b.convert(random_rational(rng, positive=family.trig)) for _ in range(n))
        try:
            config = ChainConfig(n, grading, pos, tuple(twist), params, kappa)
            config.check_family(family)
            if shift is not None:
                _check_shifted(config, family, shift)
            return config
        except SingularParameterError:
            continue
    raise SingularParameterError("no nonsingular configuration found")


def _check_shifted(config: ChainConfig, family: RFamily, shift):
    # both signs of the family share the positions in sweeps
    partners = [f for f in RFamily if f.trig == family.trig]
    for i in range(1, config.n + 1):
        for j in range(1, i):
            if family.trig:
                arg = config.x(i) / config.x(j) * shift
            else:
                arg = config.x(i) - config.x(j) + shift
                config.backend.nonzero(arg, "shifted argument vanishes")
            for f in partners:
                build_r(f, arg, config.params, config.grading)
