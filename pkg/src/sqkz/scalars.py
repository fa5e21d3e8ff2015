"""Scalar backends: exact rationals and double-precision complex numbers.

All operator entries inside one computation come from a single backend.
Trigonometric quantities are never evaluated directly; they are rational
functions of the multiplicative variables ``u = e^x``, ``q = e^eta`` and
``w = e^(eta*hbar)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

from gmpy2 import mpq

# exact values are gmpy2 rationals; they compare and hash like Fraction
Scalar = Union[Fraction, mpq, complex]

MPQ = mpq

FLOAT_POLE_TOL = 1e-8
FLOAT_RESIDUAL_TOL = 1e-9


class SingularParameterError(ValueError):
    """A spectral parameter or coupling hits a pole."""

    def __init__(self, what: str):
        super().__init__(f"singular spectral parameter: {what}")


class BackendMismatchError(TypeError):
    pass


@dataclass(frozen=True)
class Backend:
    name: str

    @property
    def exact(self) -> bool:
        return self.name == "exact"

    def convert(self, value) -> Scalar:
        if self.exact:
            if isinstance(value, complex):
                raise BackendMismatchError(f"complex value {value!r} in exact backend")
            if isinstance(value, float):
                raise BackendMismatchError(f"float value {value!r} in exact backend")
            if isinstance(value, str):
                value = Fraction(value)
            return mpq(value)
        if isinstance(value, (Fraction, mpq)):
            return complex(int(value.numerator) / int(value.denominator))
        return complex(value)

    def owns(self, value) -> bool:
        if self.exact:
            return isinstance(value, Rational)
        return isinstance(value, complex)

    def is_zero(self, value, tol: float = FLOAT_RESIDUAL_TOL) -> bool:
        if self.exact:
            return value == 0
        return abs(value) < tol

    def is_pole(self, denominator) -> bool:
        if self.exact:
            return denominator == 0
        return abs(denominator) < FLOAT_POLE_TOL

    def nonzero(self, denominator, what: str):
        """Return ``denominator`` unchanged, or raise if it vanishes."""
        if self.is_pole(denominator):
            raise SingularParameterError(what)
        return denominator

    def passes(self, residual) -> bool:
        return self.is_zero(residual)


EXACT = Backend("exact")
FLOAT = Backend("float")


def get_backend(name: str) -> Backend:
    if name == "exact":
        return EXACT
    if name == "float":
        return FLOAT
    raise ValueError(f"unknown backend {name!r} (expected 'exact' or 'float')")


def backend_of(value) -> Backend:
    if isinstance(value, complex):
        return FLOAT
    if isinstance(value, (Fraction, int, MPQ)):
        return EXACT
    raise BackendMismatchError(f"unsupported scalar type {type(value).__name__}")


def uniform_backend(*values) -> Backend:
    """Backend shared by all ``values``; mixing backends is an error."""
    found = None
    for v in values:
        if isinstance(v, int) and not isinstance(v, bool):
            continue
        b = backend_of(v)
        if found is None:
            found = b
        elif b != found:
            raise BackendMismatchError("scalars from different backends mixed in one computation")
    return found or EXACT


def parse_rational(text: str) -> Fraction:
    """Parse ``"3"``, ``"-5/2"`` or ``"0.25"`` into an exact Fraction."""
    text = text.strip()
    if not text:
        raise ValueError("empty rational")
    return Fraction(text)


def magnitude(value) -> Scalar:
    """|value| for either backend (a Fraction stays a Fraction)."""
    return abs(value)


def to_json(value):
    """Lossless JSON form: ``"num/den"`` strings for rationals, numbers for floats."""
    if isinstance(value, (Fraction, int, MPQ)) and not isinstance(value, bool):
        f = Fraction(value)
        return f"{f.numerator}/{f.denominator}"
    if isinstance(value, complex):
        if value.imag == 0:
            return value.real
        return [value.real, value.imag]
    if isinstance(value, float):
        return value
    raise TypeError(f"cannot serialise {value!r}")


def from_json(data) -> Scalar:
    if isinstance(data, str):
        return mpq(Fraction(data))
    if isinstance(data, list):
        return complex(data[0], data[1])
    return complex(data)


def sh2(z):
    """``2 sinh(x)`` written in ``z = e^x``."""
    return z - 1 / z
