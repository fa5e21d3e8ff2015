"""qKZ operators, Gaudin and spin-chain Hamiltonians, transfer matrices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Optional, Sequence, Tuple

from .checks import CheckReport
from .graded import (
    GradedOp,
    Grading,
    chain_sites,
    diagonal,
    embed_local,
    identity,
    local_diag,
    local_supertrace,
    partial_supertrace_aux,
    permutation_op,
    weight_operator,
)
from .rmatrix import RFamily, RParams, build_r, build_r_rescaled, r_asymptotic
from .scalars import SingularParameterError, sh2


@dataclass(frozen=True)
class ChainConfig:
    """Inhomogeneous chain: positions are additive ``x_i`` (rational) or ``u_i = e^{x_i}`` (trig)."""

    n: int
    grading: Grading
    positions: Tuple
    twist: Tuple
    params: RParams
    kappa: Optional[object] = None

    def __post_init__(self):
        b = self.params.backend
        object.__setattr__(self, "positions", tuple(b.convert(x) for x in self.positions))
        object.__setattr__(self, "twist", tuple(b.convert(t) for t in self.twist))
        if self.kappa is not None:
            object.__setattr__(self, "kappa", b.convert(self.kappa))
        if len(self.positions) != self.n:
            raise ValueError(f"need {self.n} positions, got {len(self.positions)}")
        if len(self.twist) != self.grading.K:
            raise ValueError(f"twist needs {self.grading.K} entries, got {len(self.twist)}")
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if b.is_pole(self.positions[i] - self.positions[j]):
                    raise SingularParameterError(f"coincident positions {i + 1}, {j + 1}")

    @property
    def backend(self):
        return self.params.backend

    @property
    def sites(self) -> Tuple[int, ...]:
        return chain_sites(self.n)

    def one(self):
        return self.params.one()

    def x(self, i: int):
        return self.positions[i - 1]

    def check_family(self, family: RFamily):
        """Reject configurations on the poles of ``family`` (``x_i - x_j = +-eta`` etc.)."""
        self.params.require(family)
        b = self.backend
        for i in range(1, self.n + 1):
            for j in range(1, self.n + 1):
                if i == j:
                    continue
                d = diff(family, self.x(i), self.x(j))
                if family.trig:
                    for z in (d, d * self.params.q, d / self.params.q):
                        if b.is_pole(sh2(z)):
                            raise SingularParameterError(f"sinh vanishes between sites {i}, {j}")
                elif b.is_pole(d + self.params.eta) or b.is_pole(d - self.params.eta):
                    raise SingularParameterError(f"x_{i} - x_{j} = +-eta")

    @cached_property
    def twist_local(self):
        return local_diag(self.grading, self.twist)

    def g_at(self, i: int, sites: Optional[Sequence[int]] = None) -> GradedOp:
        return embed_local(self.twist_local, (i,), sites or self.sites)


def diff(family: RFamily, a, b):
    """Spectral-parameter difference ``a - b`` (or ratio ``a/b`` for trig)."""
    return a / b if family.trig else a - b


def shifted(family: RFamily, arg, shift):
    return arg * shift if family.trig else arg + shift


def ratio_factor(family: RFamily, d, params: RParams):
    """Scalar ``f`` with ``Rtilde = f * R``: ``(x +- eta)/x`` or ``sinh(x +- eta)/sinh x``."""
    b = params.backend
    if family.trig:
        q = params.q if family.sign > 0 else 1 / params.q
        return sh2(d * q) / b.nonzero(sh2(d), "sinh(x_i - x_j) = 0")
    return (d + family.sign * params.eta) / b.nonzero(d, "x_i = x_j")


def _shift_value(family: RFamily, shift, params: RParams):
    if shift is None:
        return params.backend.convert(1 if family.trig else 0)
    shift = params.backend.convert(shift)
    return shift if family.trig else params.eta * shift


@lru_cache(maxsize=512)
def k_operator(i: int, shift, config: ChainConfig, family: RFamily) -> GradedOp:
    """``K_i = R_{i,i-1}(x_i-x_{i-1}+eta hbar) ... R_{i1}(...) g^(i) R_{in}(x_i-x_n) ... R_{i,i+1}``.

    ``shift`` is ``hbar`` (rational) or ``w = e^(eta hbar)`` (trig); ``None``
    gives the unshifted ``K_i^(0)``.
    """
    config.params.require(family)
    return k_product(
        i,
        _shift_value(family, shift, config.params),
        config,
        family.trig,
        lambda arg: build_r(family, arg, config.params, config.grading),
    )


def k_product(i: int, s, config: ChainConfig, trig: bool, r_of: Callable) -> GradedOp:
    """The ordered K-operator product for an arbitrary R-matrix builder ``r_of(arg)``."""
    sites = config.sites
    op = identity(config.grading, sites, config.one())
    d = (lambda a, b: a / b) if trig else (lambda a, b: a - b)
    for j in range(i - 1, 0, -1):
        arg = d(config.x(i), config.x(j))
        arg = arg * s if trig else arg + s
        op = op @ embed_local(r_of(arg), (i, j), sites)
    op = op @ config.g_at(i)
    for j in range(config.n, i, -1):
        op = op @ embed_local(r_of(d(config.x(i), config.x(j))), (i, j), sites)
    return op


@lru_cache(maxsize=512)
def gaudin_hamiltonian(i: int, config: ChainConfig) -> GradedOp:
    """``g^(i) + kappa sum_{j != i} P_ij / (x_i - x_j)``."""
    if config.kappa is None:
        raise ValueError("Gaudin Hamiltonians need kappa")
    op = config.g_at(i)
    for j in range(1, config.n + 1):
        if j != i:
            d = config.backend.nonzero(config.x(i) - config.x(j), "coincident positions")
            op = op + permutation_op(i, j, config.sites, config.grading) * (config.kappa / d)
    return op


@lru_cache(maxsize=512)
def chain_hamiltonian_product(i: int, config: ChainConfig, family: RFamily) -> GradedOp:
    """Ordered product of rescaled R-matrices around ``g^(i)``."""
    sites = config.sites
    op = identity(config.grading, sites, config.one())
    for j in range(i - 1, 0, -1):
        R = build_r_rescaled(family, diff(family, config.x(i), config.x(j)), config.params, config.grading)
        op = op @ embed_local(R, (i, j), sites)
    op = op @ config.g_at(i)
    for j in range(config.n, i, -1):
        R = build_r_rescaled(family, diff(family, config.x(i), config.x(j)), config.params, config.grading)
        op = op @ embed_local(R, (i, j), sites)
    return op


def hamiltonian_factor(i: int, config: ChainConfig, family: RFamily):
    """``prod_{j != i} f(x_i - x_j)``."""
    f = config.one()
    for j in range(1, config.n + 1):
        if j != i:
            f = f * ratio_factor(family, diff(family, config.x(i), config.x(j)), config.params)
    return f


def chain_hamiltonian_scalar(i: int, config: ChainConfig, family: RFamily) -> GradedOp:
    """``K_i^(0) * prod_{j != i} f(x_i - x_j)``."""
    return k_operator(i, None, config, family) * hamiltonian_factor(i, config, family)


def chain_hamiltonian(i: int, config: ChainConfig, family: RFamily) -> GradedOp:
    return chain_hamiltonian_product(i, config, family)


def transfer_matrix(x0, config: ChainConfig, family: RFamily) -> GradedOp:
    """``str_0( Rtilde_{0n}(x0-x_n) ... Rtilde_{01}(x0-x_1) g^(0) )``."""
    b = config.backend
    x0 = b.convert(x0)
    sites = chain_sites(config.n, aux=True)
    op = identity(config.grading, sites, config.one())
    for k in range(config.n, 0, -1):
        d = diff(family, x0, config.x(k))
        if (family.trig and b.is_pole(sh2(d))) or (not family.trig and b.is_pole(d)):
            raise SingularParameterError(f"spectral parameter collides with x_{k}")
        R = build_r_rescaled(family, d, config.params, config.grading)
        op = op @ embed_local(R, (0, k), sites)
    op = op @ config.g_at(0, sites)
    return partial_supertrace_aux(op)


def transfer_from_asymptotic_r(direction: int, config: ChainConfig, family: RFamily) -> GradedOp:
    """Same trace as :func:`transfer_matrix`, built from the limiting R-matrices."""
    sites = chain_sites(config.n, aux=True)
    R = r_asymptotic(family, direction, config.params, config.grading)
    op = identity(config.grading, sites, config.one())
    for k in range(config.n, 0, -1):
        op = op @ embed_local(R, (0, k), sites)
    op = op @ config.g_at(0, sites)
    return partial_supertrace_aux(op)


def transfer_asymptotic(direction: int, config: ChainConfig, family: RFamily = RFamily.TRIG_PLUS) -> GradedOp:
    """Closed form ``sum_B g_a q^{+-M_a} - sum_F g_a q^{-+M_a}`` (diagonal)."""
    if not family.trig:
        raise ValueError("transfer asymptotics are defined for trigonometric families")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    g = config.grading
    q = config.params.q

    def value(J):
        total = 0
        for a in g.letters:
            m = sum(1 for j in J if j == a)
            if g.p(a) == 0:
                total += config.twist[a - 1] * q ** (direction * m)
            else:
                total -= config.twist[a - 1] * q ** (-direction * m)
        return total

    return diagonal(g, config.sites, value)


def weighted_twist_sum(config: ChainConfig) -> GradedOp:
    """``sum_a g_a M_a``."""
    op = identity(config.grading, config.sites, config.one()).zero_like()
    for a in config.grading.letters:
        op = op + weight_operator(a, config.sites, config.grading) * config.twist[a - 1]
    return op


def sinh_eta(params: RParams):
    return sh2(params.q) / 2


def coth_diff(u, uk):
    z = u / uk
    return (z + 1 / z) / sh2(z)


def transfer_expansion(x, H: Sequence[GradedOp], C: GradedOp, config: ChainConfig, family: RFamily) -> GradedOp:
    """Right-hand side of the pole expansion of ``T(x)``.

    rational: ``str g + sum eta H_k / (x - x_k)``;
    trig: ``C + sinh(eta) sum H_k coth(x - x_k)``.
    """
    x = config.backend.convert(x)
    out = C
    for k, Hk in enumerate(H, start=1):
        if family.trig:
            out = out + Hk * (sinh_eta(config.params) * coth_diff(x, config.x(k)))
        else:
            out = out + Hk * (config.params.eta / (x - config.x(k)))
    return out


def default_sample_points(config: ChainConfig, family: RFamily, count: int = 2) -> list:
    """Spectral points away from every pole: beyond the largest position."""
    one = config.one()
    if family.trig:
        top = max(config.positions, key=abs)
        return [top * (one * (7 + 4 * k) / 3) for k in range(count)]
    top = max(config.positions, key=lambda v: v.real if isinstance(v, complex) else v)
    return [top + one * (5 + 3 * k) / 2 for k in range(count)]


def validate_chain_identities(config: ChainConfig, family: RFamily, points: Optional[Sequence] = None) -> CheckReport:
    """Sum rule, agreement of the two Hamiltonian forms, pole structure of ``T``,
    commutativity and weight conservation."""
    config.check_family(family)
    b = config.backend
    n = config.n
    H = [chain_hamiltonian_product(i, config, family) for i in range(1, n + 1)]
    res = {}
    res["hamiltonian-forms"] = max(
        (H[i - 1] - chain_hamiltonian_scalar(i, config, family)).max_abs() for i in range(1, n + 1)
    )
    total = H[0]
    for h in H[1:]:
        total = total + h
    if points is None:
        points = default_sample_points(config, family)
    if family.trig:
        t_plus = transfer_asymptotic(1, config, family)
        t_minus = transfer_asymptotic(-1, config, family)
        res["sum-rule"] = (total * (2 * sinh_eta(config.params)) - (t_plus - t_minus)).max_abs()
        res["asymptotic-trace"] = max(
            (transfer_from_asymptotic_r(1, config, family) - t_plus).max_abs(),
            (transfer_from_asymptotic_r(-1, config, family) - t_minus).max_abs(),
        )
        C = t_plus - total * sinh_eta(config.params)
        res["constant-term"] = (C - (t_minus + total * sinh_eta(config.params))).max_abs()
    else:
        res["sum-rule"] = (total - weighted_twist_sum(config)).max_abs()
        C = identity(config.grading, config.sites, config.one()) * local_supertrace(config.twist_local)
    res["pole-expansion"] = max(
        (transfer_matrix(x, config, family) - transfer_expansion(x, H, C, config, family)).max_abs()
        for x in points
    )
    comm = 0
    for i in range(n):
        for j in range(i + 1, n):
            comm = max(comm, H[i].commutator(H[j]).max_abs())
    res["hamiltonians-commute"] = comm
    res["weights-conserved"] = 0 if all(h.preserves_weights() and h.parity() == 0 for h in H) else 1
    return CheckReport(
        name=f"chain[{family.value}]",
        residuals=res,
        backend=b,
        inputs={"family": family.value, "grading": str(config.grading), "n": n},
    )
