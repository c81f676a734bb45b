"""Exact rational arithmetic backend.

gmpy2.mpq is used when available (much faster on large numerators); the
stdlib Fraction is the fallback.  Both expose .numerator/.denominator and
hash equal for equal values, so expression interning is backend-agnostic.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import DivisionByZero, DomainError

try:
    from gmpy2 import mpq as Rat, mpz, iroot

    def _int_nth_root(n: int, k: int):
        """Exact k-th root of a nonnegative integer, or None."""
        root, exact = iroot(mpz(n), k)
        return int(root) if exact else None

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    Rat = Fraction
    HAVE_GMPY2 = False

    def _int_nth_root(n: int, k: int):
        if n < 2:
            return n
        root = round(n ** (1.0 / k))
        for cand in (root - 1, root, root + 1):
            if cand >= 0 and cand ** k == n:
                return cand
        return None


RZERO = Rat(0)
RONE = Rat(1)


def as_rat(value) -> Rat:
    """Coerce int / Fraction / mpq (and exact-decimal strings) to the backend type."""
    if isinstance(value, int):
        return Rat(value)
    if isinstance(value, (Fraction, type(RZERO))):
        return Rat(value.numerator, value.denominator)
    if isinstance(value, str):
        return Rat(Fraction(value))
    raise TypeError(f"not an exact rational: {value!r}")


def is_int(q) -> bool:
    return q.denominator == 1


def rat_pow_exact(base: Rat, exp: Rat):
    """base**exp as an exact rational, or None when irrational.

    Raises DivisionByZero for 0**negative and DomainError for an even root
    of a negative base.  Odd roots of negatives take the real branch.
    """
    if is_int(exp):
        e = int(exp)
        if base == 0 and e < 0:
            raise DivisionByZero("0 raised to a negative power")
        return base ** e
    p, q = int(exp.numerator), int(exp.denominator)
    if base == 0:
        if p < 0:
            raise DivisionByZero("0 raised to a negative power")
        return RZERO
    sign = 1
    if base < 0:
        if q % 2 == 0:
            raise DomainError("negative base under an even root")
        sign = (-1) ** p
        base = -base
    num, den = int(base.numerator), int(base.denominator)
    if p < 0:
        num, den, p = den, num, -p
    rn = _int_nth_root(num ** p, q)
    if rn is None:
        return None
    rd = _int_nth_root(den ** p, q)
    if rd is None:
        return None
    return Rat(sign * rn, rd)
