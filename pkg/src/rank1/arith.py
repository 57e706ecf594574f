"""Exact number-theoretic and certified-real helpers.

Everything here returns Python ints or :class:`fractions.Fraction`.  The
transcendental functions (``ln``, ``ln ln``, square roots) are returned as
rational enclosures ``(lo, hi)`` with ``lo <= f(x) <= hi`` guaranteed, so
comparisons made with them can be three-valued instead of trusting floats.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from mpmath.ctx_iv import MPIntervalContext

PRIME_CAP = 2**31


class NotPrimeError(ValueError):
    """Raised when a prime was required; ``witness`` is a nontrivial factor."""

    def __init__(self, n: int, witness: int | None):
        self.n = n
        self.witness = witness
        if witness is None:
            super().__init__(f"{n} is not prime")
        else:
            super().__init__(f"{n} is not prime (divisible by {witness})")


def smallest_factor(n: int) -> int:
    """Smallest prime factor of ``n >= 2`` by trial division."""
    if n % 2 == 0:
        return 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return d
        d += 2
    return n


def is_prime(n: int) -> bool:
    return n >= 2 and smallest_factor(n) == n


def next_prime(n: int) -> int:
    """Smallest prime ``>= n``."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``n`` in increasing order."""
    out = []
    while n > 1:
        p = smallest_factor(n)
        out.append(p)
        while n % p == 0:
            n //= p
    return out


def find_primitive_root(p: int) -> int:
    """Smallest generator of the multiplicative group mod the prime ``p``.

    ``q`` is a generator iff ``q**((p-1)/f) != 1 (mod p)`` for every prime
    ``f`` dividing ``p - 1``.
    """
    if p < 3 or p > PRIME_CAP:
        raise ValueError(f"prime must lie in [3, 2**31], got {p}")
    f = smallest_factor(p)
    if f != p:
        raise NotPrimeError(p, f)
    factors = prime_factors(p - 1)
    for q in range(2, p):
        if all(pow(q, (p - 1) // f, p) != 1 for f in factors):
            return q
    raise AssertionError("unreachable: every prime has a primitive root")


def is_primitive_root(q: int, p: int) -> bool:
    """Brute-force check that the powers of ``q`` exhaust ``{1..p-1}``."""
    seen = set()
    x = 1
    for _ in range(p - 1):
        x = x * q % p
        seen.add(x)
    return len(seen) == p - 1


def sidon_set(r: int) -> list[int]:
    """``r`` integers starting at 0 with pairwise distinct differences.

    Erdős–Turán construction ``2pk + (k^2 mod p)`` with ``p`` the smallest
    prime ``>= r``; the largest element is below ``2p^2``.
    """
    p = next_prime(r)
    return [2 * p * k + (k * k) % p for k in range(r)]


def sidon_set_max(r: int) -> int:
    p = next_prime(r)
    k = r - 1
    return 2 * p * k + (k * k) % p


# -- certified reals ---------------------------------------------------------

def _mpf_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    x = Fraction(int(man) << exp) if exp >= 0 else Fraction(int(man), 1 << -exp)
    return -x if sign else x


def sqrt_bounds(x: Fraction | int, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational ``(lo, hi)`` with ``lo <= sqrt(x) <= hi`` and ``hi - lo <= 2**-bits``-ish."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative number")
    scale = 4**bits
    # sqrt(a/b) = sqrt(a*b)/b
    num = x.numerator * x.denominator * scale
    s = isqrt(num)
    lo = Fraction(s, x.denominator * 2**bits)
    hi = lo if s * s == num else Fraction(s + 1, x.denominator * 2**bits)
    return lo, hi


def _interval_ctx(prec: int) -> MPIntervalContext:
    # private context: no shared precision state between callers
    ctx = MPIntervalContext()
    ctx.prec = prec
    return ctx


def psi_bounds(name: str, m: int | Fraction, prec: int = 128) -> tuple[Fraction, Fraction]:
    """Enclosure of a catalog slow function at ``m``.

    Catalog: ``lnln`` (ln ln m), ``ln`` (ln m), ``sqrt`` (sqrt m, test stub).
    """
    if name == "sqrt":
        return sqrt_bounds(m, bits=prec)
    if m <= 1 or (name == "lnln" and m <= 2):
        raise ValueError(f"psi {name!r} undefined or non-positive at m={m}")
    if name not in ("lnln", "ln"):
        raise KeyError(f"unknown psi {name!r}; catalog is lnln, ln, sqrt")
    iv = _interval_ctx(prec)
    x = Fraction(m)
    v = iv.log(iv.mpf(x.numerator) / x.denominator)
    if name == "lnln":
        v = iv.log(v)
    lo, hi = v._mpi_
    return _mpf_to_fraction(lo), _mpf_to_fraction(hi)


PSI_CATALOG = ("lnln", "ln", "sqrt")


def psi_min_arg(name: str) -> int:
    """Smallest integer where the catalog function is positive."""
    return {"lnln": 3, "ln": 2, "sqrt": 1}[name]


def compare(lo_hi_left: tuple[Fraction, Fraction], lo_hi_right: tuple[Fraction, Fraction]) -> int | None:
    """Certified sign of ``left - right``: -1, 0 (never), +1, or None if undecided."""
    a, b = lo_hi_left
    c, d = lo_hi_right
    if b < c:
        return -1
    if a > d:
        return 1
    if a == b == c == d:
        return 0
    return None


def fmt_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s: str | int | Fraction) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    return Fraction(s.strip())
