"""Graded rational and trigonometric R-matrices and their companions.

Rational families take an additive spectral parameter ``x``.  Trigonometric
families take the multiplicative parameter ``u = e^x`` together with
``q = e^eta``; ``sinh`` never appears explicitly, every entry is a rational
function of ``u`` and ``q``.

All constructors return :class:`~sqkz.graded.LocalOp` expansions on ``V (x) V``;
place them on a chain with :func:`~sqkz.graded.embed_local`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .checks import CheckReport
from .graded import (
    Covector,
    GradedOp,
    Grading,
    LocalOp,
    diagonal,
    embed_local,
    from_index,
    local_diag,
    local_identity,
    local_op,
    local_permutation,
)
from .scalars import EXACT, Backend, SingularParameterError, sh2, uniform_backend


class RFamily(enum.Enum):
    RATIONAL_PLUS = "rational-plus"
    RATIONAL_MINUS = "rational-minus"
    TRIG_PLUS = "trig-plus"
    TRIG_MINUS = "trig-minus"

    @property
    def trig(self) -> bool:
        return self in (RFamily.TRIG_PLUS, RFamily.TRIG_MINUS)

    @property
    def sign(self) -> int:
        return 1 if self in (RFamily.RATIONAL_PLUS, RFamily.TRIG_PLUS) else -1

    @classmethod
    def parse(cls, text: str) -> "RFamily":
        try:
            return cls(text)
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown family {text!r} (expected one of {names})") from None


@dataclass(frozen=True)
class RParams:
    """Couplings.  Rational: ``eta``, ``hbar``.  Trigonometric: ``q = e^eta``, ``w = e^(eta hbar)``."""

    eta: Optional[object] = None
    hbar: Optional[object] = None
    q: Optional[object] = None
    w: Optional[object] = None
    backend: Backend = EXACT

    def __post_init__(self):
        values = [v for v in (self.eta, self.hbar, self.q, self.w) if v is not None]
        found = uniform_backend(*values)
        if values and found != self.backend:
            raise TypeError("couplings do not match the declared backend")
        if self.q is not None and self.backend.is_pole(self.q):
            raise ValueError("q must be non-zero")
        if self.w is not None and self.backend.is_pole(self.w):
            raise ValueError("w must be non-zero")

    @classmethod
    def rational(cls, eta, hbar=None, backend: Backend = EXACT) -> "RParams":
        return cls(
            eta=backend.convert(eta),
            hbar=None if hbar is None else backend.convert(hbar),
            backend=backend,
        )

    @classmethod
    def trig(cls, q, w=None, backend: Backend = EXACT) -> "RParams":
        return cls(q=backend.convert(q), w=None if w is None else backend.convert(w), backend=backend)

    def one(self):
        return self.backend.convert(1)

    def require(self, family: RFamily):
        if family.trig and self.q is None:
            raise ValueError(f"{family.value} needs q")
        if not family.trig and self.eta is None:
            raise ValueError(f"{family.value} needs eta")

    def inverted(self) -> "RParams":
        """``eta -> -eta`` (and ``hbar -> -hbar``); ``w = e^(eta hbar)`` is unchanged."""
        return RParams(
            eta=None if self.eta is None else -self.eta,
            hbar=None if self.hbar is None else -self.hbar,
            q=None if self.q is None else 1 / self.q,
            w=self.w,
            backend=self.backend,
        )


def _sign(p: int, one):
    return -one if p else one


def _pow(q, k: int):
    return q**k if k >= 0 else 1 / q ** (-k)


def local_id2(grading: Grading, one) -> LocalOp:
    return local_identity(grading, 2, one)


def _rational_r(family: RFamily, x, params: RParams, grading: Grading) -> LocalOp:
    eta = params.eta
    den = params.backend.nonzero(x + family.sign * eta, f"x = {-family.sign * eta} for {family.value}")
    one = params.one()
    return (local_id2(grading, one) * x + local_permutation(grading, one) * eta) * (1 / den)


def _trig_r(sign: int, u, q, grading: Grading, backend: Backend, swap_off_diagonal: bool) -> LocalOp:
    """Trigonometric R with ``sinh(x + sign*eta)`` in the denominator.

    ``swap_off_diagonal`` exchanges the ``e^x`` / ``e^-x`` weights of the two
    off-diagonal sums.
    """
    one = backend.convert(1)
    den = backend.nonzero(sh2(u * _pow(q, sign)), "u q^(+-1) = +-1")
    off = sh2(q) / den
    up, down = (1 / u, u) if swap_off_diagonal else (u, 1 / u)
    terms = []
    for a in grading.letters:
        pa = grading.p(a)
        num = u * q * _pow(q, -2 * pa) - _pow(q, 2 * pa) / (u * q)
        terms.append((((a, a), (a, a)), num / den))
        for b in grading.letters:
            if b != a:
                terms.append((((a, a), (b, b)), sh2(u) / den))
    for a in grading.letters:
        for b in grading.letters:
            if a < b:
                terms.append((((a, b), (b, a)), off * up * _sign(grading.p(b), one)))
                terms.append((((b, a), (a, b)), off * down * _sign(grading.p(a), one)))
    return local_op(grading, 2, terms)


def build_r(family: RFamily, arg, params: RParams, grading: Grading) -> LocalOp:
    """R-matrix of ``family`` at spectral parameter ``arg`` (``x`` or ``u = e^x``).

    ``TRIG_MINUS`` is the opposite-coupling trigonometric matrix in the form
    ``-P + sinh x / sinh(x - eta) (I + P^q) + G^-``.
    """
    params.require(family)
    arg = params.backend.convert(arg)
    if not family.trig:
        return _rational_r(family, arg, params, grading)
    if params.backend.is_pole(arg):
        raise SingularParameterError("u = 0")
    return _trig_r(family.sign, arg, params.q, grading, params.backend, family == RFamily.TRIG_MINUS)


def build_r_signed(sign: int, u, params: RParams, grading: Grading) -> LocalOp:
    """``R^p_+-(x|eta) = sinh x / sinh(x +- eta) * Rtilde^p(x|eta)``.

    This is the pair used by the grading-flip symmetry.  For ``sign=+1`` it
    coincides with ``TRIG_PLUS``; for ``sign=-1`` it is ``P R^{TRIG_MINUS} P``.
    """
    u = params.backend.convert(u)
    return _trig_r(sign, u, params.q, grading, params.backend, swap_off_diagonal=False)


def build_r_rescaled(family: RFamily, arg, params: RParams, grading: Grading) -> LocalOp:
    """``I + (eta/x) P`` (rational) or ``sinh(x +- eta)/sinh x * R(x)`` (trigonometric)."""
    params.require(family)
    b = params.backend
    arg = b.convert(arg)
    one = params.one()
    if not family.trig:
        b.nonzero(arg, "x = 0 for the rescaled R-matrix")
        return local_id2(grading, one) + local_permutation(grading, one) * (params.eta / arg)
    b.nonzero(sh2(arg), "u = +-1 for the rescaled R-matrix")
    R = build_r(family, arg, params, grading)
    return R * (sh2(arg * _pow(params.q, family.sign)) / sh2(arg))


def q_permutation(grading: Grading, q, backend: Backend = EXACT) -> LocalOp:
    """Quantum permutation ``P^q``."""
    q = backend.convert(q)
    if backend.is_pole(q):
        raise ValueError("q must be non-zero")
    one = backend.convert(1)
    terms = []
    for a in grading.letters:
        for b in grading.letters:
            s = _sign(grading.p(b), one)
            if a == b:
                terms.append((((a, a), (a, a)), s))
            elif a > b:
                terms.append((((a, b), (b, a)), q * s))
            else:
                terms.append((((a, b), (b, a)), s / q))
    return local_op(grading, 2, terms)


def g_correction(sign: int, u, params: RParams, grading: Grading) -> LocalOp:
    """Diagonal ``G^+-`` on ``e_aa (x) e_aa``; ``G^+`` lives on fermions, ``G^-`` on bosons."""
    b = params.backend
    u = b.convert(u)
    q = params.q
    den = b.nonzero(sh2(u * _pow(q, sign)), "u q^(+-1) = +-1")
    value = (q + 1 / q - 2) * sh2(u) / den
    carrier = 1 if sign > 0 else 0
    return local_op(
        grading,
        2,
        [(((a, a), (a, a)), value) for a in grading.letters if grading.p(a) == carrier],
    )


def r_asymptotic(family: RFamily, direction: int, params: RParams, grading: Grading) -> LocalOp:
    """Limit of the rescaled trigonometric R-matrix as ``x -> +-inf``."""
    if not family.trig:
        raise ValueError("asymptotics are only defined for trigonometric families")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    q = params.q
    one = params.one()
    # off-diagonal sum: a<b for (plus,+inf) and (minus,-inf), a>b otherwise
    lower = (family.sign * direction) > 0
    coeff = (q - 1 / q) * direction
    terms = [(((a, a), (b, b)), one) for a in grading.letters for b in grading.letters]
    for a in grading.letters:
        pa = grading.p(a)
        terms.append((((a, a), (a, a)), _pow(q, direction * (1 - 2 * pa)) - one))
        for b in grading.letters:
            if (a < b) if lower else (a > b):
                terms.append((((a, b), (b, a)), coeff * _sign(grading.p(b), one)))
    return local_op(grading, 2, terms)


# ---------------------------------------------------------------------------
# grading flip


def flip_sign(J, grading: Grading) -> int:
    """``(-1)^{#inversions of J between letters of different parity}``."""
    n = len(J)
    s = 0
    for k in range(n):
        for l in range(k + 1, n):
            if J[k] > J[l] and grading.p(J[k]) != grading.p(J[l]):
                s ^= 1
    return -1 if s else 1


def flip_operator(grading: Grading, sites, one=Fraction(1)) -> GradedOp:
    """The diagonal sign operator realising ``Q`` on the chain (``Q^2 = 1``)."""
    return diagonal(grading, sites, lambda J: one * flip_sign(J, grading))


def grading_flip(obj):
    """Exchange bosons and fermions.

    A :class:`Grading` gets ``p -> p+1``.  A :class:`LocalOp` keeps its
    matrix-unit coefficients.  On the chain the Koszul signs of the two
    gradings differ, so a :class:`GradedOp` is conjugated and a
    :class:`Covector` multiplied by the diagonal sign operator of
    :func:`flip_operator`; both are relabelled with the flipped grading.
    """
    if isinstance(obj, Grading):
        return obj.flipped()
    if isinstance(obj, LocalOp):
        return obj.regraded(obj.grading.flipped())
    if isinstance(obj, GradedOp):
        g = obj.grading
        n = obj.nsites
        K = g.K
        signs = [flip_sign(from_index(i, K, n), g) for i in range(obj.dim)]
        rows = {
            r: {c: (v if signs[r] == signs[c] else -v) for c, v in row.items()}
            for r, row in obj.rows.items()
        }
        return GradedOp(g.flipped(), obj.sites, rows)
    if isinstance(obj, Covector):
        g = obj.grading
        return Covector(
            g.flipped(),
            obj.n,
            {J: (v if flip_sign(J, g) > 0 else -v) for J, v in obj.coeffs.items()},
        )
    raise TypeError(f"cannot flip the grading of {type(obj).__name__}")


# ---------------------------------------------------------------------------
# axioms


def _difference(family: RFamily, x, y):
    return x / y if family.trig else x - y


def _inverse_arg(family: RFamily, x):
    return 1 / x if family.trig else -x


def validate_r_axioms(
    family: RFamily,
    grading: Grading,
    samples: Sequence[tuple],
    params: RParams,
    twist: Optional[Sequence] = None,
) -> CheckReport:
    """Unitarity, graded Yang-Baxter and twist symmetry at each ``(x, y)`` sample."""
    b = params.backend
    samples = [(b.convert(x), b.convert(y)) for x, y in samples]
    # reject singular samples before any evaluation
    for x, y in samples:
        for arg in (x, y, _difference(family, x, y), _inverse_arg(family, x)):
            build_r(family, arg, params, grading)
    one = params.one()
    if twist is None:
        twist = [one * (k + 2) for k in range(grading.K)]
    twist = [b.convert(t) for t in twist]
    s2 = (1, 2)
    s3 = (1, 2, 3)
    P = embed_local(local_permutation(grading, one), (1, 2), s2)
    Id = embed_local(local_id2(grading, one), (1, 2), s2)
    gg = embed_local(local_diag(grading, twist), (1,), s2) @ embed_local(local_diag(grading, twist), (2,), s2)
    unit_res = ybe_res = twist_res = 0
    for x, y in samples:
        R = embed_local(build_r(family, x, params, grading), (1, 2), s2)
        R21 = P @ embed_local(build_r(family, _inverse_arg(family, x), params, grading), (1, 2), s2) @ P
        unit_res = max(unit_res, (R @ R21 - Id).max_abs())

        Rxy = build_r(family, _difference(family, x, y), params, grading)
        Rx = build_r(family, x, params, grading)
        Ry = build_r(family, y, params, grading)
        R12 = embed_local(Rxy, (1, 2), s3)
        R13 = embed_local(Rx, (1, 3), s3)
        R23 = embed_local(Ry, (2, 3), s3)
        ybe_res = max(ybe_res, (R12 @ R13 @ R23 - R23 @ R13 @ R12).max_abs())

        twist_res = max(twist_res, (gg @ R - R @ gg).max_abs())
    return CheckReport(
        name=f"r-axioms[{family.value}]",
        residuals={"unitarity": unit_res, "yang-baxter": ybe_res, "twist": twist_res},
        backend=b,
        inputs={"family": family.value, "grading": str(grading), "samples": len(samples)},
    )
