"""Invariant covectors on weight subspaces.

Coefficients are normalised to 1 on the sorted multi-index and given by
inversion-counting sign rules; the adjacent-swap recursion they solve is
exercised in the tests.
"""

from __future__ import annotations

import enum
import json
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence

from .checks import CheckReport
from .graded import Covector, Grading, chain_sites, embed_local, local_permutation, weight_basis
from .rmatrix import RFamily, RParams, build_r, g_correction, q_permutation
from .scalars import EXACT, Backend, uniform_backend


class OmegaError(ValueError):
    pass


class OmegaKind(enum.Enum):
    SYM_PLUS = "sym-plus"
    SYM_MINUS = "sym-minus"
    Q_PLUS = "q-plus"
    Q_MINUS = "q-minus"

    @property
    def sign(self) -> int:
        """+1 for invariant, -1 for anti-invariant kinds."""
        return 1 if self in (OmegaKind.SYM_PLUS, OmegaKind.Q_PLUS) else -1

    @property
    def quantum(self) -> bool:
        return self in (OmegaKind.Q_PLUS, OmegaKind.Q_MINUS)

    @classmethod
    def for_family(cls, family: RFamily) -> "OmegaKind":
        return {
            RFamily.RATIONAL_PLUS: cls.SYM_PLUS,
            RFamily.RATIONAL_MINUS: cls.SYM_MINUS,
            RFamily.TRIG_PLUS: cls.Q_PLUS,
            RFamily.TRIG_MINUS: cls.Q_MINUS,
        }[family]


def inversion_count(J: Sequence[int]) -> int:
    n = len(J)
    return sum(1 for k in range(n) for l in range(k + 1, n) if J[k] > J[l])


def admissible(kind: OmegaKind, grading: Grading, weights: Sequence[int]) -> bool:
    # invariant kinds cannot hold two equal fermions, anti-invariant ones two equal bosons
    forbidden = 1 if kind.sign > 0 else 0
    return all(m <= 1 for a, m in zip(grading.letters, weights) if grading.p(a) == forbidden)


def _sign_exponent(kind: OmegaKind, J, grading: Grading) -> int:
    s = 0
    n = len(J)
    for k in range(n):
        for l in range(k + 1, n):
            if J[k] > J[l]:
                both_odd = grading.p(J[k]) == 1 and grading.p(J[l]) == 1
                if both_odd == (kind.sign > 0):
                    s += 1
    return s


def omega_coefficient(kind: OmegaKind, J: Sequence[int], grading: Grading, q=None):
    sign = -1 if _sign_exponent(kind, J, grading) % 2 else 1
    if kind.quantum:
        return sign * q ** inversion_count(J)
    return sign


def build_omega(
    kind: OmegaKind,
    grading: Grading,
    weights: Sequence[int],
    n: int,
    q=None,
    backend: Backend = EXACT,
) -> Covector:
    weights = tuple(weights)
    if len(weights) != grading.K:
        raise OmegaError(f"expected {grading.K} weights, got {len(weights)}")
    states = weight_basis(grading, weights, n)
    if not admissible(kind, grading, weights):
        which = "fermion" if kind.sign > 0 else "boson"
        raise OmegaError(
            f"vector does not exist: {kind.value} covector needs no repeated {which} in weights {weights}"
        )
    if kind.quantum:
        if q is None:
            raise OmegaError(f"{kind.value} needs q")
        q = backend.convert(q)
    one = backend.convert(1)
    return Covector(grading, n, {J: one * omega_coefficient(kind, J, grading, q) for J in states})


def validate_omega(
    covector: Covector,
    kind: OmegaKind,
    params: Optional[RParams] = None,
    points: Sequence = (),
) -> CheckReport:
    """Residuals of the defining relations of ``kind`` on ``covector``.

    Symmetric kinds: ``<W|P_ij = +-<W|`` for every pair.  Quantum kinds:
    ``<W|P^q_{i,i-1} = +-<W|``, ``<W|G_{i,i-1} = 0`` and
    ``<W|R_{i,i-1}(u) = +-<W|P_{i,i-1}`` at every ``u`` in ``points``.
    """
    g = covector.grading
    n = covector.n
    sites = chain_sites(n)
    res = {}
    eps = kind.sign
    backend = params.backend if params else uniform_backend(*covector.coeffs.values())
    if not kind.quantum:
        worst = 0
        P = local_permutation(g, backend.convert(1))
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                P_ij = embed_local(P, (i, j), sites)
                worst = max(worst, ((covector @ P_ij) - covector * eps).max_abs())
        res["permutation"] = worst
    else:
        if params is None or params.q is None:
            raise ValueError("quantum covectors are validated against q")
        b = params.backend
        one = params.one()
        family = RFamily.TRIG_PLUS if eps > 0 else RFamily.TRIG_MINUS
        Pq = q_permutation(g, params.q, b)
        P = local_permutation(g, one)
        w_pq = w_g = w_r = 0
        for i in range(2, n + 1):
            at = (i, i - 1)
            w_pq = max(w_pq, ((covector @ embed_local(Pq, at, sites)) - covector * eps).max_abs())
            for u in points:
                G = g_correction(eps, u, params, g)
                w_g = max(w_g, (covector @ embed_local(G, at, sites)).max_abs())
                lhs = covector @ embed_local(build_r(family, u, params, g), at, sites)
                rhs = (covector @ embed_local(P, at, sites)) * eps
                w_r = max(w_r, (lhs - rhs).max_abs())
        res["q-permutation"] = w_pq
        res["g-correction"] = w_g
        res["r-projection"] = w_r
    return CheckReport(
        name=f"omega[{kind.value}]",
        residuals=res,
        backend=backend,
        inputs={"kind": kind.value, "grading": str(g), "n": n, "weights": list(covector.weights or ())},
    )


# ---------------------------------------------------------------------------
# reference coefficients shipped with the package


def load_goldens() -> list[dict]:
    folder = resources.files("sqkz") / "golden"
    out = []
    for entry in sorted(folder.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            data = json.loads(entry.read_text())
            data["name"] = entry.name[: -len(".json")]
            out.append(data)
    return out


def golden_grading(data: dict) -> Grading:
    return Grading(tuple(int(c) for c in data["grading"]))


def check_golden(data: dict, q=2, backend: Backend = EXACT) -> CheckReport:
    """Compare :func:`build_omega` with stored coefficients ``sign * q^power``."""
    kind = OmegaKind(data["kind"])
    grading = golden_grading(data)
    q = backend.convert(q)
    built = build_omega(kind, grading, data["weights"], data["n"], q=q, backend=backend)
    expected = {tuple(J): backend.convert(Fraction(c)) * q**k for J, c, k in data["coefficients"]}
    states = set(expected) | set(built.coeffs)
    worst = max(abs(built[J] - expected.get(J, 0)) for J in states)
    missing = len(set(built.coeffs) ^ set(expected))
    return CheckReport(
        name=f"omega-golden[{data['name']}]",
        residuals={"coefficients": worst, "support": missing},
        backend=backend,
        inputs={"kind": kind.value, "grading": data["grading"], "n": data["n"], "weights": data["weights"]},
    )
