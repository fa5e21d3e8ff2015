"""Z2-graded tensor algebra on (C^{N|M})^{(x)n} with Koszul signs.

Basis vectors are multi-indices of letters ``1..K``.  A multi-index is
mapped to a linear index big-endian in base ``K``; the leftmost tensor
factor is the most significant digit.

Local operators are kept as sums of matrix-unit monomials
``e_{a1 b1} (x) ... (x) e_{am bm}`` (:class:`LocalOp`).  They become matrices
on the whole chain only through :func:`embed_local`, which is the single
place where Koszul signs enter.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, Iterator, Mapping, Sequence, Tuple

from gmpy2 import mpq

from .scalars import Scalar

MultiIndex = Tuple[int, ...]
Monomial = Tuple[Tuple[int, int], ...]


class GradingError(ValueError):
    pass


@dataclass(frozen=True)
class Grading:
    """Parity assignment ``p(a)`` for letters ``a = 1..K``."""

    parity: Tuple[int, ...]

    def __post_init__(self):
        if len(self.parity) == 0:
            raise GradingError("grading needs K >= 1")
        if any(v not in (0, 1) for v in self.parity):
            raise GradingError(f"parities must be 0 or 1, got {self.parity}")

    @property
    def K(self) -> int:
        return len(self.parity)

    @property
    def N(self) -> int:
        return self.parity.count(0)

    @property
    def M(self) -> int:
        return self.parity.count(1)

    @property
    def bosons(self) -> Tuple[int, ...]:
        return tuple(a for a in self.letters if self.p(a) == 0)

    @property
    def fermions(self) -> Tuple[int, ...]:
        return tuple(a for a in self.letters if self.p(a) == 1)

    @property
    def letters(self) -> range:
        return range(1, self.K + 1)

    def p(self, a: int) -> int:
        return self.parity[a - 1]

    def p_unit(self, a: int, b: int) -> int:
        """Parity of the matrix unit ``e_ab``."""
        return (self.parity[a - 1] + self.parity[b - 1]) & 1

    def p_multi(self, J: Sequence[int]) -> int:
        return sum(self.parity[j - 1] for j in J) & 1

    def flipped(self) -> "Grading":
        return Grading(tuple(1 - v for v in self.parity))

    def __str__(self):
        return "".join(str(v) for v in self.parity)


def make_grading(K: int, bosons: Iterable[int]) -> Grading:
    if K < 1:
        raise GradingError("K must be >= 1")
    bosons = set(bosons)
    bad = sorted(b for b in bosons if not 1 <= b <= K)
    if bad:
        raise GradingError(f"boson index out of range 1..{K}: {bad}")
    return Grading(tuple(0 if a in bosons else 1 for a in range(1, K + 1)))


def all_gradings(K: int) -> list[Grading]:
    """All ``2^K`` parity assignments, ordered by the binary value of the parity tuple."""
    return [Grading(bits) for bits in itertools.product((0, 1), repeat=K)]


# ---------------------------------------------------------------------------
# basis indexing


@lru_cache(maxsize=None)
def basis(K: int, n: int) -> Tuple[MultiIndex, ...]:
    """All multi-indices of length ``n`` in linear-index order."""
    return tuple(itertools.product(range(1, K + 1), repeat=n))


@lru_cache(maxsize=None)
def _index_table(K: int, n: int) -> Dict[MultiIndex, int]:
    return {J: i for i, J in enumerate(basis(K, n))}


def to_index(J: Sequence[int], K: int) -> int:
    idx = 0
    for j in J:
        idx = idx * K + (j - 1)
    return idx


def from_index(idx: int, K: int, n: int) -> MultiIndex:
    return basis(K, n)[idx]


def weights_of(J: Sequence[int], K: int) -> Tuple[int, ...]:
    counts = [0] * K
    for j in J:
        counts[j - 1] += 1
    return tuple(counts)


def weight_basis(grading: Grading | int, weights: Sequence[int], n: int) -> list[MultiIndex]:
    """Multi-indices with letter counts ``weights``, lexicographically ordered."""
    K = grading.K if isinstance(grading, Grading) else grading
    if len(weights) != K:
        raise GradingError(f"need {K} weights, got {len(weights)}")
    if any(m < 0 for m in weights):
        raise GradingError("weights must be non-negative")
    if sum(weights) != n:
        raise GradingError("weights must sum to n")
    letters = [a for a in range(1, K + 1) for _ in range(weights[a - 1])]
    return sorted(set(itertools.permutations(letters)))


def all_weights(K: int, n: int) -> list[Tuple[int, ...]]:
    """Every weight vector ``(M_1..M_K)`` with sum ``n``, in lexicographic order."""
    return sorted(w for w in itertools.product(range(n + 1), repeat=K) if sum(w) == n)


# ---------------------------------------------------------------------------
# local operators (matrix-unit expansions)


@dataclass(frozen=True)
class LocalOp:
    """A sum of matrix-unit monomials on ``V^{(x)m}``.

    ``terms`` maps ``((a1, b1), ..., (am, bm))`` to a coefficient.  The
    grading is carried along so that parity of each monomial is defined.
    """

    grading: Grading
    arity: int
    terms: Mapping[Monomial, Scalar]

    def parity_of(self, mono: Monomial) -> int:
        return sum(self.grading.p_unit(a, b) for a, b in mono) & 1

    def is_homogeneous(self) -> bool:
        return len({self.parity_of(m) for m in self.terms}) <= 1

    def coefficient(self, *units: Tuple[int, int]) -> Scalar:
        return self.terms.get(tuple(units), 0)

    def _combine(self, other: "LocalOp", sign: int) -> "LocalOp":
        if other.arity != self.arity or other.grading != self.grading:
            raise GradingError("local operators live on different spaces")
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + sign * c
            if v == 0:
                out.pop(m, None)
            else:
                out[m] = v
        return LocalOp(self.grading, self.arity, out)

    def __add__(self, other: "LocalOp") -> "LocalOp":
        return self._combine(other, 1)

    def __sub__(self, other: "LocalOp") -> "LocalOp":
        return self._combine(other, -1)

    def __neg__(self) -> "LocalOp":
        return LocalOp(self.grading, self.arity, {m: -c for m, c in self.terms.items()})

    def scale(self, c) -> "LocalOp":
        if c == 0:
            return LocalOp(self.grading, self.arity, {})
        return LocalOp(self.grading, self.arity, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, c) -> "LocalOp":
        return self.scale(c)

    __rmul__ = __mul__

    def regraded(self, grading: Grading) -> "LocalOp":
        """Same coefficients, new parity labels."""
        return LocalOp(grading, self.arity, dict(self.terms))

    def max_abs(self):
        return max((abs(v) for v in self.terms.values()), default=0)


def local_op(grading: Grading, arity: int, terms: Iterable[Tuple[Monomial, Scalar]]) -> LocalOp:
    out: Dict[Monomial, Scalar] = {}
    for mono, c in terms:
        if len(mono) != arity:
            raise GradingError(f"monomial {mono} has wrong arity (expected {arity})")
        v = out.get(mono, 0) + c
        if v == 0:
            out.pop(mono, None)
        else:
            out[mono] = v
    return LocalOp(grading, arity, out)


def unit(grading: Grading, a: int, b: int, c: Scalar = 1) -> LocalOp:
    return local_op(grading, 1, [(((a, b),), c)])


def local_identity(grading: Grading, arity: int, one: Scalar = Fraction(1)) -> LocalOp:
    mono_sets = itertools.product(grading.letters, repeat=arity)
    return local_op(grading, arity, [(tuple((a, a) for a in letters), one) for letters in mono_sets])


def local_diag(grading: Grading, values: Sequence[Scalar]) -> LocalOp:
    return local_op(grading, 1, [(((a, a),), values[a - 1]) for a in grading.letters])


def local_tensor(A: LocalOp, B: LocalOp) -> LocalOp:
    """Formal tensor product ``A (x) B`` of matrix-unit expansions."""
    return local_op(
        A.grading,
        A.arity + B.arity,
        [(ma + mb, ca * cb) for ma, ca in A.terms.items() for mb, cb in B.terms.items()],
    )


def local_permutation(grading: Grading, one: Scalar = Fraction(1)) -> LocalOp:
    """Graded permutation ``sum_ab (-1)^p(b) e_ab (x) e_ba``."""
    return local_op(
        grading,
        2,
        [
            (((a, b), (b, a)), one if grading.p(b) == 0 else -one)
            for a in grading.letters
            for b in grading.letters
        ],
    )


# ---------------------------------------------------------------------------
# operators on the whole chain


@dataclass(frozen=True)
class GradedOp:
    """Sparse operator on ``V^{(x) len(sites)}``; ``rows[r][c]`` is the (r, c) entry."""

    grading: Grading
    sites: Tuple[int, ...]
    rows: Mapping[int, Mapping[int, Scalar]] = field(repr=False)

    @property
    def K(self) -> int:
        return self.grading.K

    @property
    def nsites(self) -> int:
        return len(self.sites)

    @property
    def dim(self) -> int:
        return self.K ** self.nsites

    def _check(self, other: "GradedOp"):
        if other.grading != self.grading or other.sites != self.sites:
            raise GradingError("operators act on different graded spaces")

    def entry(self, J: Sequence[int], Jp: Sequence[int]) -> Scalar:
        return self.rows.get(to_index(J, self.K), {}).get(to_index(Jp, self.K), 0)

    def items(self) -> Iterator[Tuple[int, int, Scalar]]:
        for r, row in self.rows.items():
            for c, v in row.items():
                yield r, c, v

    def __add__(self, other: "GradedOp") -> "GradedOp":
        self._check(other)
        return _from_accumulator(self, _accumulate([(self, 1), (other, 1)]))

    def __sub__(self, other: "GradedOp") -> "GradedOp":
        self._check(other)
        return _from_accumulator(self, _accumulate([(self, 1), (other, -1)]))

    def __neg__(self) -> "GradedOp":
        return self.scale(-1)

    def scale(self, c) -> "GradedOp":
        if c == 0:
            return self.zero_like()
        return GradedOp(
            self.grading,
            self.sites,
            {r: {k: c * v for k, v in row.items()} for r, row in self.rows.items()},
        )

    def __mul__(self, c) -> "GradedOp":
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "GradedOp") -> "GradedOp":
        self._check(other)
        out: Dict[int, Dict[int, Scalar]] = {}
        orows = other.rows
        for r, row in self.rows.items():
            acc: Dict[int, Scalar] = {}
            for k, a in row.items():
                brow = orows.get(k)
                if not brow:
                    continue
                for c, b in brow.items():
                    acc[c] = acc.get(c, 0) + a * b
            acc = {c: v for c, v in acc.items() if v != 0}
            if acc:
                out[r] = acc
        return GradedOp(self.grading, self.sites, out)

    def zero_like(self) -> "GradedOp":
        return GradedOp(self.grading, self.sites, {})

    def commutator(self, other: "GradedOp") -> "GradedOp":
        return self @ other - other @ self

    def max_abs(self):
        return max((abs(v) for _, _, v in self.items()), default=0)

    def is_zero(self) -> bool:
        return not any(v != 0 for _, _, v in self.items())

    def parity(self) -> int | None:
        """0 or 1 if homogeneous, ``None`` if mixed (zero counts as even)."""
        K, n = self.K, self.nsites
        found = set()
        for r, c, _ in self.items():
            pr = self.grading.p_multi(from_index(r, K, n))
            pc = self.grading.p_multi(from_index(c, K, n))
            found.add(pr ^ pc)
        if not found:
            return 0
        return found.pop() if len(found) == 1 else None

    def preserves_weights(self) -> bool:
        K, n = self.K, self.nsites
        return all(
            weights_of(from_index(r, K, n), K) == weights_of(from_index(c, K, n), K)
            for r, c, _ in self.items()
        )

    def block(self, states: Sequence[MultiIndex]) -> list[list[Scalar]]:
        """Dense restriction to the span of ``states`` (rows and columns)."""
        idx = [to_index(J, self.K) for J in states]
        return [[self.rows.get(r, {}).get(c, 0) for c in idx] for r in idx]

    def apply(self, vector: Mapping[MultiIndex, Scalar]) -> Dict[MultiIndex, Scalar]:
        """Action on a ket given as ``{multi-index: coefficient}``."""
        K, n = self.K, self.nsites
        col: Dict[int, Scalar] = {to_index(J, K): v for J, v in vector.items()}
        out: Dict[int, Scalar] = {}
        for r, row in self.rows.items():
            s = sum((a * col[c] for c, a in row.items() if c in col), 0)
            if s != 0:
                out[r] = s
        return {from_index(r, K, n): v for r, v in out.items()}


def _accumulate(parts) -> Dict[int, Dict[int, Scalar]]:
    out: Dict[int, Dict[int, Scalar]] = {}
    for op, sign in parts:
        for r, row in op.rows.items():
            acc = out.setdefault(r, {})
            for c, v in row.items():
                acc[c] = acc.get(c, 0) + (v if sign == 1 else -v)
    return out


def _from_accumulator(like: GradedOp, acc) -> GradedOp:
    rows = {}
    for r, row in acc.items():
        row = {c: v for c, v in row.items() if v != 0}
        if row:
            rows[r] = row
    return GradedOp(like.grading, like.sites, rows)


def chain_sites(n: int, aux: bool = False) -> Tuple[int, ...]:
    return tuple(range(0 if aux else 1, n + 1))


def identity(grading: Grading, sites: Sequence[int], one: Scalar = Fraction(1)) -> GradedOp:
    dim = grading.K ** len(sites)
    return GradedOp(grading, tuple(sites), {i: {i: one} for i in range(dim)})


def diagonal(grading: Grading, sites: Sequence[int], fn: Callable[[MultiIndex], Scalar]) -> GradedOp:
    sites = tuple(sites)
    rows = {}
    for i, J in enumerate(basis(grading.K, len(sites))):
        v = fn(J)
        if v != 0:
            rows[i] = {i: v}
    return GradedOp(grading, sites, rows)


def embed_local(A: LocalOp, at: Sequence[int], sites: Sequence[int]) -> GradedOp:
    """Place ``A`` on the tensor factors labelled ``at`` (in the order of A's factors).

    A monomial ``e_{a1 b1} (x) ... (x) e_{am bm}`` becomes the composition
    ``e^{(at[0])}_{a1 b1} ... e^{(at[m-1])}_{am bm}``.  Each single-site unit
    at tensor position ``k`` acting on ``e_J`` picks up the Koszul sign
    ``(-1)^{p(e_ab) (p(j_1) + ... + p(j_{k-1}))}``.
    """
    sites = tuple(sites)
    at = tuple(at)
    if len(at) != A.arity:
        raise GradingError(f"operator of arity {A.arity} placed on {len(at)} sites")
    if len(set(at)) != len(at):
        raise GradingError(f"site collision in {at}")
    missing = [s for s in at if s not in sites]
    if missing:
        raise GradingError(f"sites {missing} not in chain {sites}")
    if not A.is_homogeneous():
        raise GradingError("embed_local needs a homogeneous operator; decompose it first")

    g = A.grading
    K, n = g.K, len(sites)
    par = g.parity
    positions = [sites.index(s) for s in at]
    # factors applied right-to-left
    plan = [
        (tuple(zip(positions, mono))[::-1], coeff)
        for mono, coeff in A.terms.items()
    ]
    weights = [K ** (n - 1 - k) for k in range(n)]
    rows: Dict[int, Dict[int, Scalar]] = {}
    for col, J in enumerate(basis(K, n)):
        for steps, coeff in plan:
            state = list(J)
            sign = 0
            ok = True
            for pos, (a, b) in steps:
                if state[pos] != b:
                    ok = False
                    break
                if (par[a - 1] + par[b - 1]) & 1:
                    sign ^= sum(par[state[m] - 1] for m in range(pos)) & 1
                state[pos] = a
            if not ok:
                continue
            row = sum((state[k] - 1) * weights[k] for k in range(n))
            acc = rows.setdefault(row, {})
            v = acc.get(col, 0) + (-coeff if sign else coeff)
            if v == 0:
                acc.pop(col, None)
            else:
                acc[col] = v
    rows = {r: row for r, row in rows.items() if row}
    return GradedOp(g, sites, rows)


def permutation_op(i: int, j: int, n_or_sites, grading: Grading) -> GradedOp:
    """Graded permutation ``P_ij`` on the chain."""
    if i == j:
        raise GradingError("permutation needs two distinct sites")
    sites = chain_sites(n_or_sites) if isinstance(n_or_sites, int) else tuple(n_or_sites)
    return embed_local(local_permutation(grading), (i, j), sites)


def weight_operator(a: int, n_or_sites, grading: Grading) -> GradedOp:
    """Letter-counting operator ``M_a = sum_l e_aa^(l)``."""
    if not 1 <= a <= grading.K:
        raise GradingError(f"letter {a} out of range 1..{grading.K}")
    sites = chain_sites(n_or_sites) if isinstance(n_or_sites, int) else tuple(n_or_sites)
    return diagonal(grading, sites, lambda J: Fraction(sum(1 for j in J if j == a)))


def supertrace(A: GradedOp | LocalOp) -> Scalar:
    """``sum_J (-1)^p(J) A_JJ`` with ``p`` extended additively to multi-indices."""
    if isinstance(A, LocalOp):
        A = embed_local(A, tuple(range(A.arity)), tuple(range(A.arity)))
    K, n = A.K, A.nsites
    total = 0
    for r, row in A.rows.items():
        v = row.get(r)
        if v is None:
            continue
        total += -v if A.grading.p_multi(from_index(r, K, n)) else v
    return total


def local_supertrace(A: LocalOp) -> Scalar:
    """Supertrace of a single-factor local operator."""
    if A.arity != 1:
        raise GradingError("local_supertrace expects a single-factor operator")
    return sum(
        (-c if A.grading.p(a) else c) for ((a, b),), c in A.terms.items() if a == b
    )


def partial_supertrace_aux(A: GradedOp) -> GradedOp:
    """Supertrace over the first tensor factor (the auxiliary space)."""
    if A.nsites < 1:
        raise GradingError("nothing to trace over")
    K = A.K
    rest = K ** (A.nsites - 1)
    par = A.grading.parity
    acc: Dict[int, Dict[int, Scalar]] = {}
    for r, row in A.rows.items():
        a, jr = divmod(r, rest)
        neg = par[a]
        for c, v in row.items():
            ac, jc = divmod(c, rest)
            if ac != a:
                continue
            d = acc.setdefault(jr, {})
            d[jc] = d.get(jc, 0) + (-v if neg else v)
    rows = {}
    for r, row in acc.items():
        row = {c: v for c, v in row.items() if v != 0}
        if row:
            rows[r] = row
    return GradedOp(A.grading, A.sites[1:], rows)


# ---------------------------------------------------------------------------
# covectors


@dataclass(frozen=True)
class Covector:
    """Linear functional ``sum_J c_J <J|`` supported in one weight subspace."""

    grading: Grading
    n: int
    coeffs: Mapping[MultiIndex, Scalar]

    @property
    def K(self) -> int:
        return self.grading.K

    @property
    def weights(self) -> Tuple[int, ...] | None:
        ws = {weights_of(J, self.K) for J in self.coeffs}
        if len(ws) > 1:
            raise GradingError("covector support spans several weight subspaces")
        return ws.pop() if ws else None

    def __getitem__(self, J: Sequence[int]) -> Scalar:
        return self.coeffs.get(tuple(J), 0)

    def __matmul__(self, op: GradedOp) -> "Covector":
        if op.grading != self.grading or op.nsites != self.n:
            raise GradingError("covector and operator act on different spaces")
        K = self.K
        acc: Dict[int, Scalar] = {}
        for J, v in self.coeffs.items():
            row = op.rows.get(to_index(J, K))
            if not row:
                continue
            for c, a in row.items():
                acc[c] = acc.get(c, 0) + v * a
        return Covector(
            self.grading,
            self.n,
            {from_index(c, K, self.n): v for c, v in sorted(acc.items()) if v != 0},
        )

    def _combine(self, other: "Covector", sign: int) -> "Covector":
        if other.grading != self.grading or other.n != self.n:
            raise GradingError("covectors on different spaces")
        out = dict(self.coeffs)
        for J, v in other.coeffs.items():
            s = out.get(J, 0) + (v if sign == 1 else -v)
            if s == 0:
                out.pop(J, None)
            else:
                out[J] = s
        return Covector(self.grading, self.n, out)

    def __add__(self, other: "Covector") -> "Covector":
        return self._combine(other, 1)

    def __sub__(self, other: "Covector") -> "Covector":
        return self._combine(other, -1)

    def __neg__(self) -> "Covector":
        return self.scale(-1)

    def scale(self, c) -> "Covector":
        if c == 0:
            return Covector(self.grading, self.n, {})
        return Covector(self.grading, self.n, {J: c * v for J, v in self.coeffs.items()})

    def __mul__(self, c) -> "Covector":
        return self.scale(c)

    __rmul__ = __mul__

    def pair(self, vector: Mapping[MultiIndex, Scalar]) -> Scalar:
        return sum((v * vector.get(J, 0) for J, v in self.coeffs.items()), 0)

    def max_abs(self):
        return max((abs(v) for v in self.coeffs.values()), default=0)

    def sorted_items(self) -> list[Tuple[MultiIndex, Scalar]]:
        return sorted(self.coeffs.items())


# ---------------------------------------------------------------------------
# JSON debug format


def _pack(v) -> list:
    if isinstance(v, complex):
        return [v.real, v.imag]
    f = Fraction(v)
    return [f.numerator, f.denominator]


def _unpack(a, b, exact: bool) -> Scalar:
    return mpq(a, b) if exact else complex(a, b)


def op_to_json(A: GradedOp) -> dict:
    """Entries as ``[row, col, numerator, denominator]`` (``[row, col, re, im]`` for floats)."""
    K, n = A.K, A.nsites
    entries = []
    exact = True
    for r in sorted(A.rows):
        for c in sorted(A.rows[r]):
            v = A.rows[r][c]
            exact = exact and not isinstance(v, complex)
            entries.append([list(from_index(r, K, n)), list(from_index(c, K, n)), *_pack(v)])
    return {
        "grading": list(A.grading.parity),
        "sites": list(A.sites),
        "backend": "exact" if exact else "float",
        "entries": entries,
    }


def op_from_json(data: dict) -> GradedOp:
    grading = Grading(tuple(data["grading"]))
    exact = data.get("backend", "exact") == "exact"
    rows: Dict[int, Dict[int, Scalar]] = {}
    for J, Jp, a, b in data["entries"]:
        rows.setdefault(to_index(J, grading.K), {})[to_index(Jp, grading.K)] = _unpack(a, b, exact)
    return GradedOp(grading, tuple(data["sites"]), rows)


def covector_to_json(w: Covector) -> dict:
    exact = not any(isinstance(v, complex) for v in w.coeffs.values())
    return {
        "grading": list(w.grading.parity),
        "n": w.n,
        "backend": "exact" if exact else "float",
        "coeffs": [[list(J), *_pack(v)] for J, v in w.sorted_items()],
    }


def covector_from_json(data: dict) -> Covector:
    grading = Grading(tuple(data["grading"]))
    exact = data.get("backend", "exact") == "exact"
    return Covector(grading, data["n"], {tuple(J): _unpack(a, b, exact) for J, a, b in data["coeffs"]})
